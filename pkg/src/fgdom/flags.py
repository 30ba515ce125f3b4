"""Triple ratios and double ratios of explicit complete flags.

A flag is stored as an ordered basis of C^n; its p-dimensional subspace is
spanned by the first p basis vectors, so every wedge a_(p) ^ b_(q) ^ c_(r)
with p + q + r = n is the determinant of a column concatenation.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

import numpy as np

DEGENERACY_RTOL = 1e-10


class DegenerateConfiguration(ArithmeticError):
    """A flag tuple is not in general position for the requested invariant."""


@dataclass(frozen=True)
class Flag:
    """Complete flag given by an ordered basis (columns of ``basis``)."""

    basis: np.ndarray

    def __post_init__(self) -> None:
        b = np.array(self.basis, dtype=complex)
        if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[0] < 2:
            raise ValueError(f"flag basis must be a square matrix of size >= 2, got shape {b.shape}")
        if _relative_det(b) < DEGENERACY_RTOL:
            raise DegenerateConfiguration("flag basis is not linearly independent")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    def part(self, p: int) -> np.ndarray:
        """Spanning vectors of the p-dimensional subspace F_p."""
        return self.basis[:, :p]

    def rescaled(self, scalars: Sequence[complex]) -> "Flag":
        return Flag(self.basis * np.asarray(scalars, dtype=complex)[None, :])

    def transformed(self, g: np.ndarray) -> "Flag":
        return Flag(np.asarray(g, dtype=complex) @ self.basis)

    @classmethod
    def from_vectors(cls, vectors: Sequence[Sequence[complex]]) -> "Flag":
        """Flag whose i-th basis vector is ``vectors[i]``."""
        return cls(np.array(vectors, dtype=complex).T)

    @classmethod
    def from_point_and_line(cls, v: Sequence[complex], covector: Sequence[complex]) -> "Flag":
        """Flag in C^3 with F_1 = <v> and F_2 = ker(covector).

        Requires covector(v) = 0.
        """
        v = np.asarray(v, dtype=complex)
        f = np.asarray(covector, dtype=complex)
        if v.shape != (3,) or f.shape != (3,):
            raise ValueError("point-and-line flags live in C^3")
        if abs(f @ v) > DEGENERACY_RTOL * np.linalg.norm(f) * np.linalg.norm(v):
            raise DegenerateConfiguration("point does not lie on the line")
        # kernel of f: pick the kernel vector farthest from <v>
        _, _, vh = np.linalg.svd(f[None, :])
        kernel = vh[1:].conj()
        w = max(kernel, key=lambda k: np.linalg.svd(np.column_stack([v, k]), compute_uv=False)[-1])
        return cls(np.column_stack([v, w, f.conj()]))

    @classmethod
    def standard(cls, n: int) -> "Flag":
        return cls(np.eye(n, dtype=complex))

    @classmethod
    def opposite(cls, n: int) -> "Flag":
        return cls(np.eye(n, dtype=complex)[:, ::-1])


@dataclass(frozen=True)
class FlagTuple:
    flags: tuple[Flag, ...]

    def __post_init__(self) -> None:
        flags = tuple(self.flags)
        if len(flags) not in (3, 4):
            raise ValueError(f"expected 3 or 4 flags, got {len(flags)}")
        if len({f.n for f in flags}) != 1:
            raise ValueError("flags must share the same rank")
        object.__setattr__(self, "flags", flags)

    @property
    def n(self) -> int:
        return self.flags[0].n

    def __len__(self) -> int:
        return len(self.flags)

    def __getitem__(self, i: int) -> Flag:
        return self.flags[i]

    def transformed(self, g: np.ndarray) -> "FlagTuple":
        return FlagTuple(tuple(f.transformed(g) for f in self.flags))

    def rotated(self) -> "FlagTuple":
        """(A, B, C) -> (B, C, A)."""
        return FlagTuple(self.flags[1:] + self.flags[:1])


def _relative_det(m: np.ndarray) -> float:
    norms = np.prod(np.linalg.norm(m, axis=0))
    if norms == 0:
        return 0.0
    return float(abs(np.linalg.det(m)) / norms)


def wedge(parts: Sequence[tuple[Flag, int]], check: bool = False) -> complex:
    """Determinant of the columns F_p of each (flag, p), concatenated in order."""
    m = np.column_stack([f.part(p) for f, p in parts if p > 0])
    n = m.shape[0]
    if m.shape[1] != n:
        raise ValueError(f"dimensions sum to {m.shape[1]}, expected {n}")
    if check and _relative_det(m) < DEGENERACY_RTOL:
        dims = tuple(p for _, p in parts)
        raise DegenerateConfiguration(f"wedge with dimensions {dims} vanishes")
    return complex(np.linalg.det(m))


def triple_ratio(t: FlagTuple | Sequence[Flag], p: int, q: int, r: int) -> complex:
    """The pqr-triple ratio of (A, B, C), p, q, r >= 1 and p + q + r = n."""
    a, b, c = _as_tuple(t, 3).flags
    n = a.n
    if min(p, q, r) < 1 or p + q + r != n:
        raise ValueError(f"need positive p, q, r summing to {n}, got {(p, q, r)}")
    num = (
        wedge([(a, p - 1), (b, q + 1), (c, r)])
        * wedge([(a, p), (b, q - 1), (c, r + 1)])
        * wedge([(a, p + 1), (b, q), (c, r - 1)])
    )
    den = (
        wedge([(a, p + 1), (b, q - 1), (c, r)], check=True)
        * wedge([(a, p), (b, q + 1), (c, r - 1)], check=True)
        * wedge([(a, p - 1), (b, q), (c, r + 1)], check=True)
    )
    return num / den


def triangle_invariants(t: FlagTuple | Sequence[Flag]) -> dict[tuple[int, int, int], complex]:
    """X_{i,j,k} = T_{i+1,j+1,k+1}(A, B, C) for i + j + k = n - 3."""
    n = _as_tuple(t, 3).n
    s = n - 3
    return {
        (i, j, s - i - j): triple_ratio(t, i + 1, j + 1, s - i - j + 1)
        for i in range(s + 1)
        for j in range(s - i + 1)
    }


def double_ratio(t: FlagTuple | Sequence[Flag], r: int) -> complex:
    """The r-th double ratio of (A, B, C, C'), 1 <= r <= n - 1.

    Normalized so that for n = 2 it is the classical cross ratio
    (a, b; c, c') of the four points.
    """
    a, b, c, c2 = _as_tuple(t, 4).flags
    n = a.n
    if not 1 <= r <= n - 1:
        raise ValueError(f"double ratio index must lie in 1..{n - 1}, got {r}")
    num = wedge([(a, r), (b, n - r - 1), (c, 1)]) * wedge([(a, r - 1), (b, n - r), (c2, 1)])
    den = (
        wedge([(a, r), (b, n - r - 1), (c2, 1)], check=True)
        * wedge([(a, r - 1), (b, n - r), (c, 1)], check=True)
    )
    return num / den


def cross_ratio(z1: complex, z2: complex, z3: complex, z4: complex) -> complex:
    return (z1 - z3) * (z2 - z4) / ((z1 - z4) * (z2 - z3))


def projective_line_flag(z: complex) -> Flag:
    """Flag in C^2 whose line is spanned by (z, 1)."""
    return Flag(np.array([[z, 1], [1, 0]], dtype=complex))


@dataclass(frozen=True)
class GeneralPosition:
    ok: bool
    witness: tuple[int, ...] | None = None
    relative_det: float | None = None

    def __bool__(self) -> bool:
        return self.ok


def _compositions(n: int, parts: int) -> Iterator[tuple[int, ...]]:
    for dims in product(range(n + 1), repeat=parts - 1):
        last = n - sum(dims)
        if last >= 0:
            yield (*dims, last)


def general_position_check(t: FlagTuple | Sequence[Flag]) -> GeneralPosition:
    """Check every spanning determinant; report the first vanishing dimension vector."""
    ft = _as_tuple(t, None)
    for dims in _compositions(ft.n, len(ft)):
        m = np.column_stack([f.part(p) for f, p in zip(ft.flags, dims) if p > 0])
        rel = _relative_det(m)
        if rel < DEGENERACY_RTOL:
            return GeneralPosition(False, dims, rel)
    return GeneralPosition(True)


def example_triple(x: complex) -> FlagTuple:
    """The n = 3 configuration with T_111 = x.

    Points (0,0,1), (1,0,1), (0,1,1) on the lines x*u + v = 0, u = w, v = w.
    """
    a = Flag.from_point_and_line([0, 0, 1], [x, 1, 0])
    b = Flag.from_point_and_line([1, 0, 1], [1, 0, -1])
    c = Flag.from_point_and_line([0, 1, 1], [0, 1, -1])
    return FlagTuple((a, b, c))


def random_flag(n: int, rng: np.random.Generator) -> Flag:
    return Flag(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))


def random_tuple(n: int, size: int, rng: np.random.Generator) -> FlagTuple:
    while True:
        t = FlagTuple(tuple(random_flag(n, rng) for _ in range(size)))
        if general_position_check(t):
            return t


def _as_tuple(t: FlagTuple | Sequence[Flag], size: int | None) -> FlagTuple:
    ft = t if isinstance(t, FlagTuple) else FlagTuple(tuple(t))
    if size is not None and len(ft) != size:
        raise ValueError(f"expected {size} flags, got {len(ft)}")
    return ft
