"""Eigenvalue moduli, exterior powers, length functionals and majorization.

Monodromy matrices of long words have eigenvalue moduli spread over hundreds
of natural-log units, far beyond what a dense float product can resolve.
Every spectral quantity is therefore computed from the compound matrices
wedge^k A, accumulated as products of the compounds of the individual
factors (Cauchy-Binet) with periodic rescaling.  From these:

* primary path: the characteristic polynomial, whose k-th coefficient is
  (-1)^k trace(wedge^k A), solved by Aberth iteration in extended precision;
* cross-check path: spectral radii sigma(wedge^k A) = |lambda_n ... lambda_{n-k+1}|,
  whose successive ratios are the individual moduli.

Disagreement between the two beyond the cutoff marks the spectrum as clustered.
"""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Sequence, Union

import mpmath
import numpy as np

from .factory import GaussianRational, ScaledMatrix, to_complex, to_exact

CROSS_CHECK_RTOL = 1e-6
WELL_SEPARATED = "well-separated"
CLUSTERED = "clustered"


class SingularMatrix(ArithmeticError):
    pass


class IllConditioned(ArithmeticError):
    pass


@dataclass(frozen=True)
class FactoredMatrix:
    """The product factors[-1] ... factors[1] factors[0], never formed densely."""

    factors: tuple[np.ndarray, ...]
    log_scale: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "factors", tuple(to_complex(f) for f in self.factors))
        if not self.factors:
            raise ValueError("empty product")

    @property
    def n(self) -> int:
        return self.factors[0].shape[0]

    def dense(self) -> np.ndarray:
        out = self.factors[0]
        for f in self.factors[1:]:
            out = f @ out
        return out


MatrixLike = Union[np.ndarray, ScaledMatrix, FactoredMatrix]


def _as_factored(m: MatrixLike) -> FactoredMatrix:
    if isinstance(m, FactoredMatrix):
        return m
    if isinstance(m, ScaledMatrix):
        return FactoredMatrix((m.matrix,), m.log_scale)
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.dtype != object and not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return FactoredMatrix((a,))


@lru_cache(maxsize=None)
def _subsets(n: int, k: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(n), k)), dtype=int)


def _exact_det(rows: list[list[Any]]) -> Any:
    """Determinant by Gaussian elimination over whatever field the entries live in."""
    m = [list(r) for r in rows]
    size = len(m)
    det: Any = 1
    for c in range(size):
        p = next((r for r in range(c, size) if m[r][c]), None)
        if p is None:
            return 0 * det
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        det = det * m[c][c]
        inv = 1 / m[c][c]
        for r in range(c + 1, size):
            f = m[r][c] * inv
            if f:
                for j in range(c, size):
                    m[r][j] = m[r][j] - f * m[c][j]
    return det


def exterior_power(m: np.ndarray, k: int) -> np.ndarray:
    """Matrix of k x k minors, rows and columns indexed by lexicographic k-subsets."""
    a = np.asarray(m)
    n = a.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"order {k} out of range 1..{n}")
    idx = _subsets(n, k)
    if a.dtype == object:
        size = len(idx)
        out = np.empty((size, size), dtype=object)
        ex = [[v if isinstance(v, GaussianRational) else to_exact(v) for v in row] for row in a]
        for r, rows in enumerate(idx):
            for c, cols in enumerate(idx):
                out[r, c] = _exact_det([[ex[i][j] for j in cols] for i in rows])
        return out
    a = a.astype(complex)
    if k == 1:
        return a.copy()
    sub = a[idx[:, None, :, None], idx[None, :, None, :]]
    return np.linalg.det(sub)


def compound_chain(m: MatrixLike, k: int) -> tuple[np.ndarray, float]:
    """wedge^k of the product, as (normalized matrix, log scale)."""
    fm = _as_factored(m)
    out: np.ndarray | None = None
    log_scale = k * fm.log_scale
    for f in fm.factors:
        c = exterior_power(f, k)
        out = c if out is None else c @ out
        s = float(np.max(np.abs(out)))
        if s == 0.0:
            raise SingularMatrix("a compound of the product vanished")
        if not math.isfinite(s):
            raise IllConditioned("overflow while accumulating compounds")
        out = out / s
        log_scale += math.log(s)
    assert out is not None
    return out, log_scale


_local = threading.local()


def _ctx() -> Any:
    ctx = getattr(_local, "ctx", None)
    if ctx is None:
        ctx = mpmath.MPContext()
        ctx.dps = 40
        _local.ctx = ctx
    return ctx


def _initial_guesses(ctx: Any, coeffs: list[Any]) -> list[Any]:
    """Starting points from the Newton polygon of log|a_j| (tropical roots)."""
    deg = len(coeffs) - 1
    # a_j is the coefficient of x^(deg - j); work with exponents e = deg - j
    pts = [(deg - j, float(ctx.log(abs(c)))) for j, c in enumerate(coeffs) if c != 0]
    pts.sort()
    hull: list[tuple[int, float]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (p[0] - x1) <= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    guesses = []
    offset = 0.7
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        mult = x2 - x1
        log_r = (y1 - y2) / mult
        for m in range(mult):
            ang = 2 * math.pi * m / mult + offset
            guesses.append(ctx.mpc(ctx.exp(log_r)) * ctx.expjpi(ang / math.pi))
        offset += 0.4
    while len(guesses) < deg:
        guesses.append(ctx.mpc(0))
    return guesses


def _aberth(coeffs: list[Any], max_iter: int = 200) -> tuple[list[Any], bool]:
    ctx = _ctx()
    deg = len(coeffs) - 1
    z = _initial_guesses(ctx, coeffs)
    dcoeffs = [c * (deg - j) for j, c in enumerate(coeffs[:-1])]
    eps = ctx.mpf(10) ** (-(ctx.dps - 6))
    for _ in range(max_iter):
        done = True
        for i in range(deg):
            p = ctx.polyval(coeffs, z[i])
            if p == 0:
                continue
            ratio = p / ctx.polyval(dcoeffs, z[i])
            s = ctx.fsum(1 / (z[i] - z[j]) for j in range(deg) if j != i and z[i] != z[j])
            w = ratio / (1 - ratio * s)
            z[i] -= w
            if abs(w) > eps * abs(z[i]):
                done = False
        if done:
            return z, True
    return z, False


def _polynomial_log_moduli(fm: FactoredMatrix) -> tuple[list[float], list[float]]:
    """(ascending log-moduli from polynomial roots, log|product| partial sums)."""
    ctx = _ctx()
    n = fm.n
    coeffs = [ctx.mpc(1)]
    log_partial = [0.0]
    for k in range(1, n + 1):
        c, ls = compound_chain(fm, k)
        tr = complex(np.trace(c))
        coeffs.append((-1) ** k * ctx.mpc(tr) * ctx.exp(ls))
        rho = float(np.max(np.abs(np.linalg.eigvals(c)))) if c.shape[0] > 1 else abs(complex(c[0, 0]))
        if rho == 0.0:
            raise SingularMatrix("matrix is singular")
        log_partial.append(math.log(rho) + ls)
    if coeffs[-1] == 0:
        raise SingularMatrix("matrix is singular")
    roots, converged = _aberth(coeffs)
    logs = sorted(float(ctx.log(abs(r))) if r != 0 else -math.inf for r in roots)
    if not converged:
        logs = [math.nan] * n
    return logs, log_partial


@dataclass(frozen=True)
class EigenModuli:
    """Eigenvalue moduli stored as ascending natural logs."""

    logs: tuple[float, ...]
    condition: str = WELL_SEPARATED
    cross_check: tuple[float, ...] = ()

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(math.exp(v) for v in self.logs)

    @property
    def n(self) -> int:
        return len(self.logs)

    @property
    def descending_logs(self) -> tuple[float, ...]:
        return tuple(reversed(self.logs))

    @property
    def log_abs_det(self) -> float:
        return math.fsum(self.logs)

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.logs)

    def __getitem__(self, i: int) -> float:
        return self.values[i]


def eigen_moduli(m: MatrixLike, cutoff: float = CROSS_CHECK_RTOL) -> EigenModuli:
    """Ascending eigenvalue moduli of a matrix, a scaled matrix or a factored product."""
    fm = _as_factored(m)
    poly_logs, partial = _polynomial_log_moduli(fm)
    n = fm.n
    desc = [partial[k] - partial[k - 1] for k in range(1, n + 1)]
    cross = tuple(sorted(desc))
    if any(math.isnan(v) for v in poly_logs):
        return EigenModuli(cross, CLUSTERED, cross)
    scale = max(1.0, max(abs(v) for v in cross))
    # compare partial sums of descending logs: the quantities both paths determine
    a = np.cumsum(sorted(poly_logs, reverse=True))
    b = np.array(partial[1:])
    worst = float(np.max(np.abs(a - b)))
    condition = WELL_SEPARATED if worst <= cutoff * scale else CLUSTERED
    return EigenModuli(tuple(poly_logs), condition, cross)


def spectral_radius(m: MatrixLike) -> float:
    return eigen_moduli(m).values[-1]


def singular_values(m: np.ndarray) -> tuple[float, ...]:
    """Ascending square roots of the eigenvalues of m m*."""
    a = to_complex(np.asarray(m))
    w = np.linalg.eigvalsh(a @ a.conj().T)
    return tuple(float(math.sqrt(max(v, 0.0))) for v in np.sort(w))


def collatz_wielandt_bound(m: np.ndarray, x: Sequence[float]) -> float:
    """min over supported i of (m x)_i / x_i; a lower bound for the spectral radius."""
    a = np.asarray(to_complex(np.asarray(m)))
    if np.any(np.abs(a.imag) > 0) or np.any(a.real < 0):
        raise ValueError("matrix must be real and entrywise nonnegative")
    v = np.asarray(x, dtype=float)
    if np.any(v < 0):
        raise ValueError("vector must be nonnegative")
    if not np.any(v > 0):
        raise ValueError("zero vector")
    mx = a.real @ v
    support = v > 0
    return float(np.min(mx[support] / v[support]))


def _moduli(m: MatrixLike | EigenModuli) -> EigenModuli:
    return m if isinstance(m, EigenModuli) else eigen_moduli(m)


def _finite(em: EigenModuli) -> None:
    if not all(math.isfinite(v) for v in em.logs):
        raise SingularMatrix("matrix is singular")


def hilbert_length(m: MatrixLike | EigenModuli) -> float:
    """ln(|lambda_n| / |lambda_1|)."""
    em = _moduli(m)
    _finite(em)
    return em.logs[-1] - em.logs[0]


def translation_length(m: MatrixLike | EigenModuli) -> float:
    """Root-sum-square of the centered log-moduli."""
    em = _moduli(m)
    _finite(em)
    c = math.fsum(em.logs) / em.n
    return math.sqrt(math.fsum((v - c) ** 2 for v in em.logs))


def lk_lengths(m: MatrixLike | EigenModuli) -> tuple[float, ...]:
    """l_k = log |lambda_{n-k+1} ... lambda_n / (lambda_1 ... lambda_k)|, k = 1..n-1."""
    em = _moduli(m)
    _finite(em)
    c = math.fsum(em.logs) / em.n
    centered = [v - c for v in em.logs]
    n = em.n
    return tuple(math.fsum(centered[n - k:]) - math.fsum(centered[:k]) for k in range(1, n))


def gap_lengths(m: MatrixLike | EigenModuli) -> tuple[float, ...]:
    """l^i = ln(|lambda_{i+1}| / |lambda_i|), i = 1..n-1."""
    em = _moduli(m)
    _finite(em)
    return tuple(b - a for a, b in zip(em.logs, em.logs[1:]))


def weak_majorization(x: Sequence[float], y: Sequence[float], tol: float = 0.0) -> bool:
    """True iff every partial sum of sorted-descending x is <= that of y (+ tol)."""
    if len(x) != len(y):
        raise ValueError("length mismatch")
    xs = sorted(x, reverse=True)
    ys = sorted(y, reverse=True)
    sx = sy = 0.0
    for a, b in zip(xs, ys):
        sx += a
        sy += b
        if sx > sy + tol:
            return False
    return True


def majorization_excess(x: Sequence[float], y: Sequence[float]) -> float:
    """Largest amount by which a partial sum of x exceeds that of y (<= 0 when x <_w y)."""
    xs = np.cumsum(sorted(x, reverse=True))
    ys = np.cumsum(sorted(y, reverse=True))
    return float(np.max(xs - ys))


@dataclass(frozen=True)
class LengthReport:
    hilbert: float
    translation: float
    lks: tuple[float, ...]
    gaps: tuple[float, ...]
    moduli: EigenModuli

    def to_json(self) -> dict[str, Any]:
        return {
            "hilbert": self.hilbert,
            "translation": self.translation,
            "lks": list(self.lks),
            "gaps": list(self.gaps),
            "log_moduli": list(self.moduli.logs),
            "condition": self.moduli.condition,
        }


def length_report(m: MatrixLike | EigenModuli) -> LengthReport:
    em = _moduli(m)
    return LengthReport(hilbert_length(em), translation_length(em), lk_lengths(em),
                        gap_lengths(em), em)


def is_exact_matrix(m: np.ndarray) -> bool:
    return m.dtype == object and all(isinstance(v, GaussianRational) for v in m.ravel())
