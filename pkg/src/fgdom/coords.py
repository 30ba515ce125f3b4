"""Fock-Goncharov coordinate data, validation and bending to the positive locus.

A framed representation of a punctured surface group is described, relative
to an ideal triangulation, by one tuple of triangle invariants per triangle
and one tuple of edge invariants per oriented edge.  All containers here are
immutable so they can be shared freely between worker threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Iterator, Mapping, Sequence

SCHEMA_VERSION = "fgdom.coords/1"

EDGE_REVERSAL_MODES = ("zr-to-znr", "independent")

Index = tuple[int, int, int]


class CoordinateError(ValueError):
    """Base class for invalid coordinate data."""


class ZeroCoordinate(CoordinateError):
    pass


class MissingEntry(CoordinateError):
    pass


class CountMismatch(CoordinateError):
    pass


def triangle_indices(n: int) -> list[Index]:
    """All (i, j, k) with i + j + k = n - 3, in lexicographic order."""
    if n < 2:
        raise ValueError(f"rank must be >= 2, got {n}")
    s = n - 3
    return [(i, j, s - i - j) for i in range(s + 1) for j in range(s - i + 1)]


def modulus(v: Any) -> Any:
    """Overflow-safe modulus; exact rationals stay exact when real."""
    if isinstance(v, (complex, float, int)):
        return abs(complex(v)) if isinstance(v, complex) else abs(v)
    if isinstance(v, Fraction):
        return abs(v)
    # Gaussian rationals from sympy carry .x (real) and .y (imaginary)
    re, im = getattr(v, "x", None), getattr(v, "y", None)
    if re is not None and im is not None:
        if im == 0:
            return type(v)(abs(re), 0)
        return math.hypot(float(re), float(im))
    return abs(complex(v))


def is_zero(v: Any) -> bool:
    return not v


@dataclass(frozen=True)
class TriangleInvariants:
    """Triangle invariants X_{i,j,k}, i+j+k = n-3, in the frame (A, B, C)."""

    n: int
    values: Mapping[Index, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", dict(self.values))

    def __getitem__(self, ijk: Index) -> Any:
        try:
            return self.values[tuple(ijk)]
        except KeyError:
            raise MissingEntry(f"triangle invariant X{tuple(ijk)} missing for n={self.n}") from None

    @classmethod
    def constant(cls, n: int, value: Any = 1) -> TriangleInvariants:
        return cls(n, {ijk: value for ijk in triangle_indices(n)})

    @classmethod
    def from_sequence(cls, n: int, seq: Sequence[Any]) -> TriangleInvariants:
        keys = triangle_indices(n)
        if len(seq) != len(keys):
            raise CountMismatch(f"expected {len(keys)} triangle invariants, got {len(seq)}")
        return cls(n, dict(zip(keys, seq)))

    def as_sequence(self) -> list[Any]:
        return [self[ijk] for ijk in triangle_indices(self.n)]

    def rotated(self, steps: int = 1) -> TriangleInvariants:
        """Invariants for the relabelled frame (B, C, A), applied `steps` times."""
        vals = dict(self.values)
        for _ in range(steps % 3):
            vals = {(j, k, i): v for (i, j, k), v in vals.items()}
        return TriangleInvariants(self.n, vals)

    def bent(self) -> TriangleInvariants:
        return TriangleInvariants(self.n, {k: modulus(v) for k, v in self.values.items()})

    def problems(self, where: str) -> list[tuple[str, str, str]]:
        out = []
        expected = triangle_indices(self.n)
        if len(self.values) != len(expected):
            out.append(("CountMismatch", where,
                        f"{len(self.values)} invariants, expected {len(expected)}"))
        for ijk in expected:
            if ijk not in self.values:
                out.append(("MissingEntry", f"{where}.X{ijk}", "missing"))
            elif is_zero(self.values[ijk]):
                out.append(("ZeroCoordinate", f"{where}.X{ijk}", "value is zero"))
        for ijk in self.values:
            if ijk not in expected:
                out.append(("CountMismatch", f"{where}.X{ijk}", "index not of the form i+j+k=n-3"))
        return out


@dataclass(frozen=True)
class EdgeInvariants:
    """Edge invariants (z_1, ..., z_{n-1}) for one oriented edge."""

    n: int
    values: tuple[Any, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))

    def __getitem__(self, r: int) -> Any:
        """1-based access z_r."""
        if not 1 <= r <= len(self.values):
            raise MissingEntry(f"edge invariant z_{r} missing for n={self.n}")
        return self.values[r - 1]

    @classmethod
    def constant(cls, n: int, value: Any = 1) -> EdgeInvariants:
        return cls(n, (value,) * (n - 1))

    def reversed(self) -> EdgeInvariants:
        """Opposite orientation under the rule z'_r = z_{n-r}."""
        return EdgeInvariants(self.n, self.values[::-1])

    def bent(self) -> EdgeInvariants:
        return EdgeInvariants(self.n, tuple(modulus(v) for v in self.values))

    def problems(self, where: str) -> list[tuple[str, str, str]]:
        out = []
        if len(self.values) != self.n - 1:
            out.append(("CountMismatch", where,
                        f"{len(self.values)} invariants, expected {self.n - 1}"))
        for r, v in enumerate(self.values, start=1):
            if is_zero(v):
                out.append(("ZeroCoordinate", f"{where}.z{r}", "value is zero"))
        return out


def split_oriented(edge_id: str) -> tuple[str, int]:
    """'e3+' -> ('e3', +1); accepts both '-' and the unicode minus."""
    if edge_id.endswith("+"):
        return edge_id[:-1], 1
    if edge_id.endswith("-") or edge_id.endswith("−"):
        return edge_id[:-1], -1
    raise CoordinateError(f"oriented edge id must end in '+' or '-': {edge_id!r}")


def oriented(edge: str, sign: int) -> str:
    return f"{edge}{'+' if sign > 0 else '-'}"


def coordinate_count(genus: int, punctures: int, n: int) -> int:
    """Number of complex parameters (2g + k - 2)(n^2 - 1)."""
    return (2 * genus + punctures - 2) * (n * n - 1)


@dataclass(frozen=True)
class FGCoordinates:
    n: int
    genus: int
    punctures: int
    triangle_data: Mapping[str, TriangleInvariants]
    edge_data: Mapping[str, EdgeInvariants]
    triangulation_ref: str = ""
    edge_reversal: str = "zr-to-znr"

    def __post_init__(self) -> None:
        if self.edge_reversal not in EDGE_REVERSAL_MODES:
            raise CoordinateError(f"unknown edge-reversal mode {self.edge_reversal!r}")
        object.__setattr__(self, "triangle_data", dict(self.triangle_data))
        edges = {}
        for key, val in self.edge_data.items():
            base, sign = split_oriented(key)
            edges[oriented(base, sign)] = val
        object.__setattr__(self, "edge_data", edges)

    def triangle(self, tid: str) -> TriangleInvariants:
        try:
            return self.triangle_data[tid]
        except KeyError:
            raise MissingEntry(f"no invariants for triangle {tid!r}") from None

    def edge(self, edge: str, sign: int) -> EdgeInvariants:
        """Invariants of `edge` crossed in orientation `sign`."""
        key = oriented(edge, sign)
        if key in self.edge_data:
            return self.edge_data[key]
        other = oriented(edge, -sign)
        if self.edge_reversal == "zr-to-znr" and other in self.edge_data:
            return self.edge_data[other].reversed()
        raise MissingEntry(f"no invariants for oriented edge {key!r}")

    def edge_ids(self) -> list[str]:
        return sorted({split_oriented(k)[0] for k in self.edge_data})

    def bent(self) -> FGCoordinates:
        return FGCoordinates(
            self.n, self.genus, self.punctures,
            {k: v.bent() for k, v in self.triangle_data.items()},
            {k: v.bent() for k, v in self.edge_data.items()},
            self.triangulation_ref, self.edge_reversal,
        )

    def to_json(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "surface": {"genus": self.genus, "punctures": self.punctures},
            "triangulation": self.triangulation_ref,
            "edge_reversal": self.edge_reversal,
            "triangles": {
                tid: {"X": {",".join(map(str, ijk)): _pair(v) for ijk, v in t.values.items()}}
                for tid, t in sorted(self.triangle_data.items())
            },
            "edges": {eid: {"z": [_pair(v) for v in e.values]}
                      for eid, e in sorted(self.edge_data.items())},
        }

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> FGCoordinates:
        try:
            n = int(doc["n"])
            surface = doc["surface"]
            tris = {
                tid: TriangleInvariants(n, {
                    tuple(int(s) for s in key.split(",")): _unpair(v)
                    for key, v in body.get("X", {}).items()
                })
                for tid, body in doc.get("triangles", {}).items()
            }
            edges = {eid: EdgeInvariants(n, tuple(_unpair(v) for v in body["z"]))
                     for eid, body in doc.get("edges", {}).items()}
            return cls(n, int(surface["genus"]), int(surface["punctures"]), tris, edges,
                       str(doc.get("triangulation", "")),
                       str(doc.get("edge_reversal", "zr-to-znr")))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, CoordinateError):
                raise
            raise CoordinateError(f"malformed coordinate document: {exc}") from exc


def _pair(v: Any) -> list[float]:
    c = complex(v) if not hasattr(v, "x") else complex(float(v.x), float(v.y))
    return [c.real, c.imag]


def _unpair(v: Any) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    re, im = v
    return complex(float(re), float(im))


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[tuple[str, str, str], ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __iter__(self) -> Iterator[tuple[str, str, str]]:
        return iter(self.violations)

    def raise_for_errors(self) -> None:
        if self.violations:
            kind, where, msg = self.violations[0]
            exc = {"ZeroCoordinate": ZeroCoordinate, "MissingEntry": MissingEntry,
                   "CountMismatch": CountMismatch}[kind]
            detail = "; ".join(f"{k} at {w}: {m}" for k, w, m in self.violations)
            raise exc(detail)


def validate(coords: FGCoordinates, triangulation: Any = None) -> ValidationReport:
    """Check every coordinate invariant, collecting all violations.

    When a triangulation is supplied, its triangle and edge ids must all be
    covered; otherwise the counts implied by (genus, punctures) are used.
    """
    out: list[tuple[str, str, str]] = []
    n = coords.n
    chi = 2 * coords.genus + coords.punctures - 2
    if n < 2:
        out.append(("CountMismatch", "n", f"rank {n} < 2"))
    if chi <= 0:
        out.append(("CountMismatch", "surface", "surface must have negative Euler characteristic"))
    for tid, t in sorted(coords.triangle_data.items()):
        if t.n != n:
            out.append(("CountMismatch", f"triangles.{tid}", f"rank {t.n} != {n}"))
        out.extend(t.problems(f"triangles.{tid}"))
    for eid, e in sorted(coords.edge_data.items()):
        if e.n != n:
            out.append(("CountMismatch", f"edges.{eid}", f"rank {e.n} != {n}"))
        out.extend(e.problems(f"edges.{eid}"))

    if triangulation is not None:
        tri_ids = [t.id for t in triangulation.triangles]
        edge_ids = triangulation.edge_ids()
    else:
        tri_ids = sorted(coords.triangle_data)
        edge_ids = coords.edge_ids()
    for tid in tri_ids:
        if tid not in coords.triangle_data:
            out.append(("MissingEntry", f"triangles.{tid}", "missing"))
    for eid in edge_ids:
        present = [s for s in (1, -1) if oriented(eid, s) in coords.edge_data]
        if coords.edge_reversal == "independent":
            for s in (1, -1):
                if s not in present:
                    out.append(("MissingEntry", f"edges.{oriented(eid, s)}", "missing"))
        elif not present:
            out.append(("MissingEntry", f"edges.{eid}", "missing"))

    if chi > 0 and n >= 2:
        expected = coordinate_count(coords.genus, coords.punctures, n)
        got = (len(tri_ids) * (n - 1) * (n - 2) // 2) + len(edge_ids) * (n - 1)
        if len(tri_ids) != 2 * chi or len(edge_ids) != 3 * chi or got != expected:
            out.append(("CountMismatch", "surface",
                        f"{len(tri_ids)} triangles / {len(edge_ids)} edges give {got} "
                        f"coordinates, expected {expected}"))
    return ValidationReport(tuple(out))


def bend_to_positive(coords: FGCoordinates) -> FGCoordinates:
    """Replace each coordinate by its modulus."""
    validate(coords).raise_for_errors()
    return coords.bent()


@dataclass(frozen=True)
class BuildingBlockSpec:
    """One factor T(t)^delta E(e) of a monodromy word, in the local frame."""

    delta: int
    triangle: TriangleInvariants
    edge: EdgeInvariants

    def __post_init__(self) -> None:
        if self.delta not in (1, -1):
            raise ValueError(f"delta must be +1 or -1, got {self.delta}")
        if self.triangle.n != self.edge.n:
            raise ValueError("triangle and edge invariants have different ranks")

    @property
    def n(self) -> int:
        return self.edge.n

    def bent(self) -> BuildingBlockSpec:
        return BuildingBlockSpec(self.delta, self.triangle.bent(), self.edge.bent())


@dataclass(frozen=True)
class MonodromyWord:
    """Blocks in application order: blocks[0] acts first (rightmost factor)."""

    blocks: tuple[BuildingBlockSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not self.blocks:
            raise ValueError("a monodromy word needs at least one block")
        if len({b.n for b in self.blocks}) != 1:
            raise ValueError("all blocks of a word must share the same rank")

    @property
    def n(self) -> int:
        return self.blocks[0].n

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self) -> Iterator[BuildingBlockSpec]:
        return iter(self.blocks)

    @property
    def deltas(self) -> tuple[int, ...]:
        return tuple(b.delta for b in self.blocks)

    def to_json(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "blocks": [
                {"delta": b.delta,
                 "X": [_pair(v) for v in b.triangle.as_sequence()],
                 "z": [_pair(v) for v in b.edge.values]}
                for b in self.blocks
            ],
        }

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> MonodromyWord:
        try:
            n = int(doc["n"])
            return cls(tuple(
                BuildingBlockSpec(
                    int(b["delta"]),
                    TriangleInvariants.from_sequence(n, [_unpair(v) for v in b.get("X", [])]),
                    EdgeInvariants(n, tuple(_unpair(v) for v in b["z"])),
                )
                for b in doc["blocks"]
            ))
        except (KeyError, TypeError) as exc:
            raise CoordinateError(f"malformed word document: {exc}") from exc


def bend_word(word: MonodromyWord) -> MonodromyWord:
    """Replace every coordinate of every block by its modulus; signs unchanged."""
    return MonodromyWord(tuple(b.bent() for b in word.blocks))


def word_from_blocks(blocks: Iterable[BuildingBlockSpec]) -> MonodromyWord:
    return MonodromyWord(tuple(blocks))
