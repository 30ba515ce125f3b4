"""Elementary matrices, snake-move products and monodromy building blocks.

Two arithmetic backends share every constructor: complex128 arrays for
experiments and object arrays of Gaussian rationals (sympy's QQ_I) for exact
identity checks.  The backend is inferred from the coordinate values unless
`exact` is passed explicitly.

Building blocks are returned as unnormalized projective representatives:
    delta = +1:  M(t) . diag(z_1..z_{n-1}, ..., z_{n-1}, 1)       ~ T(t) E(e)
    delta = -1:  P_{n-1} ... P_1 . diag(z_1..z_{n-1}, ..., 1)     ~ T(t)^-1 E(e)
where P_k = build_S_Step_S(t, k).  Both have nonnegative entries when the
coordinates are positive, and both coincide with the weight matrices of the
networks built in `fgdom.network`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np
from sympy.polys.domains import QQ_I

from .coords import BuildingBlockSpec, EdgeInvariants, MonodromyWord, TriangleInvariants

RESCALE_EVERY = 8
PROJECTIVE_RTOL = 1e-9

GaussianRational = type(QQ_I(0, 0))


def to_exact(v: Any) -> Any:
    """Exact Gaussian rational equal to `v` (floats convert without rounding)."""
    if isinstance(v, GaussianRational):
        return v
    if isinstance(v, (int, Fraction)):
        return QQ_I(v, 0)
    c = complex(v)
    return QQ_I(Fraction(c.real), Fraction(c.imag))


def _is_exact_value(v: Any) -> bool:
    return isinstance(v, (GaussianRational, Fraction))


def _infer_exact(values: Iterable[Any], exact: bool | None) -> bool:
    if exact is not None:
        return exact
    vals = list(values)
    return bool(vals) and all(_is_exact_value(v) for v in vals)


def _scalar(v: Any, exact: bool) -> Any:
    return to_exact(v) if exact else complex(v)


def identity(n: int, exact: bool = False) -> np.ndarray:
    if exact:
        m = np.empty((n, n), dtype=object)
        m[:, :] = QQ_I(0, 0)
        for i in range(n):
            m[i, i] = QQ_I(1, 0)
        return m
    return np.eye(n, dtype=complex)


def _zeros(n: int, exact: bool) -> np.ndarray:
    if exact:
        m = np.empty((n, n), dtype=object)
        m[:, :] = QQ_I(0, 0)
        return m
    return np.zeros((n, n), dtype=complex)


def _check_rank(n: int) -> None:
    if n < 2:
        raise ValueError(f"rank must be >= 2, got {n}")


def _check_index(n: int, i: int, name: str = "index") -> None:
    if not 1 <= i <= n - 1:
        raise ValueError(f"{name} {i} out of range 1..{n - 1}")


def elem_S(n: int, exact: bool = False) -> np.ndarray:
    """Antidiagonal matrix with (i, n+1-i) entry (-1)^(i+1)."""
    _check_rank(n)
    m = _zeros(n, exact)
    for i in range(n):
        m[i, n - 1 - i] = _scalar(1 if i % 2 == 0 else -1, exact)
    return m


def elem_F(n: int, i: int, exact: bool = False) -> np.ndarray:
    """Identity plus a 1 in position (i+1, i), 1-based."""
    _check_rank(n)
    _check_index(n, i)
    m = identity(n, exact)
    m[i, i - 1] = _scalar(1, exact)
    return m


def elem_f(n: int, i: int, exact: bool = False) -> np.ndarray:
    """Inverse of elem_F: a -1 in position (i+1, i)."""
    _check_rank(n)
    _check_index(n, i)
    m = identity(n, exact)
    m[i, i - 1] = _scalar(-1, exact)
    return m


def elem_H(n: int, i: int, x: Any, exact: bool | None = None) -> np.ndarray:
    """diag(1, ..., 1, x, ..., x) with the last i entries equal to x."""
    _check_rank(n)
    _check_index(n, i)
    if not x:
        raise ValueError("H_i(x) needs x != 0")
    exact = _infer_exact([x], exact)
    m = identity(n, exact)
    for r in range(n - i, n):
        m[r, r] = _scalar(x, exact)
    return m


def elem_h(n: int, i: int, x: Any, exact: bool | None = None) -> np.ndarray:
    """Inverse of elem_H: H_i(1/x)."""
    exact = _infer_exact([x], exact)
    xs = _scalar(x, exact)
    return elem_H(n, i, _scalar(1, exact) / xs, exact)


def _prod(factors: Sequence[np.ndarray], n: int, exact: bool) -> np.ndarray:
    out = identity(n, exact)
    for f in factors:
        out = out @ f
    return out


def _triangle_exact(t: TriangleInvariants, exact: bool | None) -> bool:
    return _infer_exact(t.values.values(), exact) if t.values else bool(exact)


def build_St(t: TriangleInvariants, k: int, exact: bool | None = None) -> np.ndarray:
    """St(k) = F_{n-1} prod_{i=1}^{k-1} H_i(X_{i-1,k-i-1,n-k-1}) F_{n-i-1}."""
    n = t.n
    _check_rank(n)
    _check_index(n, k, "step index")
    exact = _triangle_exact(t, exact)
    factors = [elem_F(n, n - 1, exact)]
    for i in range(1, k):
        factors.append(elem_H(n, i, t[(i - 1, k - i - 1, n - k - 1)], exact))
        factors.append(elem_F(n, n - i - 1, exact))
    return _prod(factors, n, exact)


def M_factors(t: TriangleInvariants, exact: bool | None = None) -> list[np.ndarray]:
    """Elementary F/H factors of M(t), left to right."""
    n = t.n
    _check_rank(n)
    exact = _triangle_exact(t, exact)
    factors = []
    for j in range(1, n):
        factors.append(elem_F(n, n - 1, exact))
        for i in range(1, n - j):
            factors.append(elem_H(n, i, t[(i - 1, n - i - j - 1, j - 1)], exact))
            factors.append(elem_F(n, n - i - 1, exact))
    return factors


def build_M(t: TriangleInvariants, exact: bool | None = None) -> np.ndarray:
    """M(t) = prod_{j=1}^{n-1}[F_{n-1} prod_{i=1}^{n-j-1} H_i(X_{i-1,n-i-j-1,j-1}) F_{n-i-1}]."""
    exact = _triangle_exact(t, exact)
    return _prod(M_factors(t, exact), t.n, exact)


def build_Step(t: TriangleInvariants, k: int, exact: bool | None = None) -> np.ndarray:
    """Step(k) = St(n-k)^{-1} as the product of f/h factors.

    Step(k) = prod_{i=n-k-1}^{1} (f_{n-i-1} h_i(X_{i-1,n-k-i-1,k-1})) . f_{n-1}
    """
    n = t.n
    _check_rank(n)
    _check_index(n, k, "step index")
    exact = _triangle_exact(t, exact)
    factors = []
    for i in range(n - k - 1, 0, -1):
        factors.append(elem_f(n, n - i - 1, exact))
        factors.append(elem_h(n, i, t[(i - 1, n - k - i - 1, k - 1)], exact))
    factors.append(elem_f(n, n - 1, exact))
    return _prod(factors, n, exact)


def _step_weights(t: TriangleInvariants, k: int, exact: bool) -> list[Any]:
    """c_s = prod_{l<s} 1/X_{n-k-l-1,l-1,k-1} for s = 1..n-k (c_1 = 1)."""
    n = t.n
    one = _scalar(1, exact)
    out = [one]
    for l in range(1, n - k):
        out.append(out[-1] / _scalar(t[(n - k - l - 1, l - 1, k - 1)], exact))
    return out


def S_Step_S_factors(t: TriangleInvariants, k: int,
                     exact: bool | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(C, U) with build_S_Step_S = C . U.

    C is diagonal with c_{n-k}, ..., c_1 on its first n-k entries and 1 after;
    U is the identity plus ones on the first n-k superdiagonal positions.
    """
    n = t.n
    _check_rank(n)
    _check_index(n, k, "step index")
    exact = _triangle_exact(t, exact)
    c = _step_weights(t, k, exact)
    C = identity(n, exact)
    U = identity(n, exact)
    for i in range(n - k):
        C[i, i] = c[n - k - 1 - i]
        U[i, i + 1] = _scalar(1, exact)
    return C, U


def build_S_Step_S(t: TriangleInvariants, k: int, exact: bool | None = None) -> np.ndarray:
    """Upper bidiagonal nonnegative-pattern form of S . Step(k) . S.

    Rows i <= n-k carry c_{n-k+1-i} on the diagonal and superdiagonal; the
    remaining rows are the identity.  S.Step(k).S = (-1)^(n+1) times this.
    """
    C, U = S_Step_S_factors(t, k, exact)
    return C @ U


def build_T(t: TriangleInvariants, exact: bool | None = None) -> np.ndarray:
    """T(t) = M(t) . S."""
    exact = _triangle_exact(t, exact)
    return build_M(t, exact) @ elem_S(t.n, exact)


def _edge_diagonal(e: EdgeInvariants, exact: bool) -> list[Any]:
    """(1, z_{n-1}, z_{n-2} z_{n-1}, ..., z_1 ... z_{n-1})."""
    n = e.n
    if len(e.values) != n - 1:
        raise ValueError(f"expected {n - 1} edge invariants, got {len(e.values)}")
    d = [_scalar(1, exact)]
    for r in range(n - 1, 0, -1):
        d.append(d[-1] * _scalar(e[r], exact))
    return d


def build_E(e: EdgeInvariants, exact: bool | None = None) -> np.ndarray:
    """E(e) = diag(1, z_{n-1}, ..., z_1...z_{n-1}) . S."""
    _check_rank(e.n)
    exact = _infer_exact(e.values, exact)
    d = _edge_diagonal(e, exact)
    D = _zeros(e.n, exact)
    for i, v in enumerate(d):
        D[i, i] = v
    return D @ elem_S(e.n, exact)


def build_SE(e: EdgeInvariants, exact: bool | None = None) -> np.ndarray:
    """Positive diagonal diag(z_1...z_{n-1}, ..., z_{n-1}, 1) ~ S . E(e)."""
    _check_rank(e.n)
    exact = _infer_exact(e.values, exact)
    d = _edge_diagonal(e, exact)[::-1]
    D = _zeros(e.n, exact)
    for i, v in enumerate(d):
        D[i, i] = v
    return D


def _spec_exact(spec: BuildingBlockSpec, exact: bool | None) -> bool:
    vals = list(spec.triangle.values.values()) + list(spec.edge.values)
    return _infer_exact(vals, exact)


def build_block(spec: BuildingBlockSpec, exact: bool | None = None) -> np.ndarray:
    """Unnormalized representative of T(t)^delta E(e)."""
    n = spec.n
    exact = _spec_exact(spec, exact)
    D = build_SE(spec.edge, exact)
    if spec.delta == 1:
        left = build_M(spec.triangle, exact)
    else:
        left = _prod([build_S_Step_S(spec.triangle, k, exact) for k in range(n - 1, 0, -1)],
                     n, exact)
    return left @ D


@dataclass(frozen=True)
class ScaledMatrix:
    """A matrix together with a log-scale: the represented value is exp(log_scale) * matrix."""

    matrix: np.ndarray
    log_scale: float = 0.0


def _rescale(m: np.ndarray) -> tuple[np.ndarray, float]:
    s = float(np.max(np.abs(m)))
    if s == 0.0 or not math.isfinite(s):
        raise FloatingPointError("product became zero or non-finite")
    return m / s, math.log(s)


def monodromy_with_scale(word: MonodromyWord, exact: bool | None = None) -> ScaledMatrix:
    """Right-to-left product of the blocks, rescaled every few multiplications."""
    blocks = list(word.blocks)
    exact = _infer_exact(
        [v for b in blocks for v in list(b.triangle.values.values()) + list(b.edge.values)],
        exact)
    out = build_block(blocks[0], exact)
    log_scale = 0.0
    for count, b in enumerate(blocks[1:], start=1):
        out = build_block(b, exact) @ out
        if not exact and count % RESCALE_EVERY == 0:
            out, ls = _rescale(out)
            log_scale += ls
    return ScaledMatrix(out, log_scale)


def monodromy(word: MonodromyWord, exact: bool | None = None) -> np.ndarray:
    """rho(gamma) = B_k ... B_1 for the word's blocks B_1, ..., B_k (projective representative)."""
    return monodromy_with_scale(word, exact).matrix


def to_complex(m: np.ndarray) -> np.ndarray:
    """complex128 copy of a matrix from either backend."""
    if m.dtype != object:
        return np.asarray(m, dtype=complex)
    out = np.empty(m.shape, dtype=complex)
    for idx, v in np.ndenumerate(m):
        if isinstance(v, GaussianRational):
            out[idx] = complex(float(v.x), float(v.y))
        else:
            out[idx] = complex(v)
    return out


def normalize_projective(m: np.ndarray) -> np.ndarray:
    """Divide by the first entry of largest modulus."""
    m = to_complex(m)
    flat = m.ravel()
    mods = np.abs(flat)
    idx = int(np.argmax(mods))
    if mods[idx] == 0:
        raise ValueError("zero matrix has no projective class")
    return m / flat[idx]


def projective_equal(a: np.ndarray, b: np.ndarray, rtol: float = PROJECTIVE_RTOL) -> bool:
    """A = cB for some c != 0, compared after max-modulus normalization.

    The pivot is taken from `a`; comparing both after dividing by the same
    entry avoids spurious failures when two entries tie for the maximum.
    """
    a, b = to_complex(a), to_complex(b)
    if a.shape != b.shape:
        return False
    flat_a, flat_b = a.ravel(), b.ravel()
    idx = int(np.argmax(np.abs(flat_a)))
    if flat_a[idx] == 0 or flat_b[idx] == 0:
        return False
    na, nb = a / flat_a[idx], b / flat_b[idx]
    return bool(np.all(np.abs(na - nb) <= rtol * max(1.0, float(np.max(np.abs(na))))))


def exact_equal(a: np.ndarray, b: np.ndarray) -> bool:
    if a.shape != b.shape:
        return False
    return all(to_exact(x) == to_exact(y) for x, y in zip(a.ravel(), b.ravel()))
