"""Ideal triangulations of punctured surfaces and compilation of curves.

Each triangle stores its ideal vertices v0, v1, v2 in counterclockwise order;
side j joins v_j to v_{j+1}.  A gluing pairs two side slots with opposite
orientation, so v_j is identified with v'_{j'+1} and v_{j+1} with v'_{j'}.
The i-th gluing defines edge "e<i>"; crossing it from the first slot's
triangle into the second's is the orientation "e<i>+".

A curve is recorded as a walk through the dual graph.  Every step names the
side through which the current triangle is left and the turn taken inside
the triangle that is entered:

* entering through side j and leaving through side j+1 is a right turn;
  the local frame is (A, B, C) = (v_{j+1}, v_{j+2}, v_j), so the curve goes
  from CA to AB and contributes T(t) E(e);
* leaving through side j+2 is a left turn; the frame is (v_j, v_{j+1},
  v_{j+2}), the curve goes from AB to CA and contributes T(t)^{-1} E(e).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .coords import (
    EDGE_REVERSAL_MODES,
    BuildingBlockSpec,
    CoordinateError,
    EdgeInvariants,
    FGCoordinates,
    MonodromyWord,
    TriangleInvariants,
    oriented,
    triangle_indices,
    validate,
)

SCHEMA_VERSION = "fgdom.surface/1"

LEFT, RIGHT = "left", "right"
TURN_DELTA = {RIGHT: 1, LEFT: -1}

Slot = tuple[int, int]  # (triangle position, side)


class TriangulationError(ValueError):
    pass


class WalkError(ValueError):
    pass


class OpenWalk(WalkError):
    pass


class SlotMismatch(WalkError):
    pass


@dataclass(frozen=True)
class Triangle:
    id: str

    def slot_id(self, side: int) -> str:
        return f"{self.id}:{side}"


@dataclass(frozen=True)
class IdealTriangulation:
    genus: int
    punctures: int
    triangles: tuple[Triangle, ...]
    gluing: tuple[tuple[Slot, Slot], ...]
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "triangles", tuple(self.triangles))
        object.__setattr__(self, "gluing", tuple((tuple(a), tuple(b)) for a, b in self.gluing))
        self._check()

    def _check(self) -> None:
        chi = 2 * self.genus + self.punctures - 2
        if chi <= 0:
            raise TriangulationError("surface must satisfy 2 - 2g - k < 0")
        if len(self.triangles) != 2 * chi:
            raise TriangulationError(f"{len(self.triangles)} triangles, expected {2 * chi}")
        if len(self.gluing) != 3 * chi:
            raise TriangulationError(f"{len(self.gluing)} edges, expected {3 * chi}")
        if len({t.id for t in self.triangles}) != len(self.triangles):
            raise TriangulationError("duplicate triangle ids")
        seen: set[Slot] = set()
        for a, b in self.gluing:
            for t, s in (a, b):
                if not (0 <= t < len(self.triangles) and 0 <= s < 3):
                    raise TriangulationError(f"slot {(t, s)} out of range")
            if a == b:
                raise TriangulationError(f"slot {a} glued to itself")
            if a[0] == b[0]:
                # any two sides of one triangle are adjacent, so this folds it
                raise TriangulationError(f"self-folded triangle at slots {a}, {b}")
            for slot in (a, b):
                if slot in seen:
                    raise TriangulationError(f"slot {slot} glued twice")
                seen.add(slot)
        if len(seen) != 3 * len(self.triangles):
            raise TriangulationError("gluing must pair every side slot")
        k = len(self.puncture_classes())
        if k != self.punctures:
            raise TriangulationError(f"gluing produces {k} punctures, declared {self.punctures}")

    def triangle_ids(self) -> list[str]:
        return [t.id for t in self.triangles]

    def index_of(self, tid: str) -> int:
        for i, t in enumerate(self.triangles):
            if t.id == tid:
                return i
        raise TriangulationError(f"unknown triangle {tid!r}")

    def edge_ids(self) -> list[str]:
        return [f"e{i}" for i in range(len(self.gluing))]

    def partner(self, slot: Slot) -> tuple[Slot, str, int]:
        """Slot across the side, the edge id and the crossing orientation."""
        for i, (a, b) in enumerate(self.gluing):
            if a == slot:
                return b, f"e{i}", 1
            if b == slot:
                return a, f"e{i}", -1
        raise TriangulationError(f"slot {slot} is not glued")

    def puncture_classes(self) -> list[list[tuple[int, int]]]:
        """Corners (triangle, vertex) grouped by the puncture they sit at."""
        parent = {(t, v): (t, v) for t in range(len(self.triangles)) for v in range(3)}

        def find(x: tuple[int, int]) -> tuple[int, int]:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (t1, s1), (t2, s2) in self.gluing:
            for u, w in (((t1, s1), (t2, (s2 + 1) % 3)), ((t1, (s1 + 1) % 3), (t2, s2))):
                ru, rw = find(u), find(w)
                if ru != rw:
                    parent[max(ru, rw)] = min(ru, rw)
        classes: dict[tuple[int, int], list[tuple[int, int]]] = {}
        for c in sorted(parent):
            classes.setdefault(find(c), []).append(c)
        return sorted(classes.values())

    def to_json(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "genus": self.genus,
            "punctures": self.punctures,
            "triangles": [{"id": t.id, "sides": [t.slot_id(s) for s in range(3)]}
                          for t in self.triangles],
            "gluing": [[self.triangles[a[0]].slot_id(a[1]), self.triangles[b[0]].slot_id(b[1])]
                       for a, b in self.gluing],
        }

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> IdealTriangulation:
        try:
            triangles = tuple(Triangle(str(t["id"])) for t in doc["triangles"])
            slots: dict[str, Slot] = {}
            for i, t in enumerate(doc["triangles"]):
                sides = t.get("sides") or [f"{t['id']}:{s}" for s in range(3)]
                if len(sides) != 3:
                    raise TriangulationError(f"triangle {t['id']!r} needs 3 side slots")
                for s, sid in enumerate(sides):
                    slots[str(sid)] = (i, s)
            gluing = tuple((slots[str(a)], slots[str(b)]) for a, b in doc["gluing"])
            return cls(int(doc["genus"]), int(doc["punctures"]), triangles, gluing,
                       str(doc.get("name", "")))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, TriangulationError):
                raise
            raise TriangulationError(f"malformed triangulation document: {exc}") from exc


def _tetrahedron() -> tuple[tuple[Triangle, ...], tuple[tuple[Slot, Slot], ...]]:
    faces = [(0, 2, 1), (0, 1, 3), (0, 3, 2), (1, 2, 3)]
    directed = {}
    for t, f in enumerate(faces):
        for s in range(3):
            directed[(f[s], f[(s + 1) % 3])] = (t, s)
    gluing = []
    for (u, w), slot in sorted(directed.items()):
        other = directed[(w, u)]
        if slot < other:
            gluing.append((slot, other))
    return tuple(Triangle(f"T{t}") for t in range(4)), tuple(sorted(gluing))


def builtin_triangulation(name: str) -> IdealTriangulation:
    """One of "once-punctured-torus", "thrice-punctured-sphere", "four-punctured-sphere".

    * torus: T0 and T1 glued side j to side j;
    * thrice-punctured sphere: two triangles glued along matching boundaries;
    * four-punctured sphere: faces of a tetrahedron.
    """
    two = (Triangle("T0"), Triangle("T1"))
    if name == "once-punctured-torus":
        return IdealTriangulation(1, 1, two, (((0, 0), (1, 0)), ((0, 1), (1, 1)), ((0, 2), (1, 2))), name)
    if name == "thrice-punctured-sphere":
        return IdealTriangulation(0, 3, two, (((0, 0), (1, 0)), ((0, 1), (1, 2)), ((0, 2), (1, 1))), name)
    if name == "four-punctured-sphere":
        triangles, gluing = _tetrahedron()
        return IdealTriangulation(0, 4, triangles, gluing, name)
    raise TriangulationError(f"unknown builtin triangulation {name!r}")


BUILTIN_NAMES = ("once-punctured-torus", "thrice-punctured-sphere", "four-punctured-sphere")


@dataclass(frozen=True)
class Step:
    side: int
    turn: str

    def __post_init__(self) -> None:
        if self.side not in (0, 1, 2):
            raise WalkError(f"side must be 0, 1 or 2, got {self.side}")
        if self.turn not in TURN_DELTA:
            raise WalkError(f"turn must be 'left' or 'right', got {self.turn!r}")


@dataclass(frozen=True)
class CurveWalk:
    start: str
    steps: tuple[Step, ...]
    closed: bool = True

    def __post_init__(self) -> None:
        steps = tuple(s if isinstance(s, Step) else Step(int(s[0]), str(s[1])) for s in self.steps)
        object.__setattr__(self, "steps", steps)

    def to_json(self) -> dict[str, Any]:
        return {"schema_version": SCHEMA_VERSION, "start": self.start,
                "steps": [{"side": s.side, "turn": s.turn} for s in self.steps],
                "closed": self.closed}

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> CurveWalk:
        try:
            return cls(str(doc["start"]),
                       tuple(Step(int(s["side"]), str(s["turn"])) for s in doc["steps"]),
                       bool(doc.get("closed", True)))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, WalkError):
                raise
            raise WalkError(f"malformed walk document: {exc}") from exc


def _exit_side(entry: int, turn: str) -> int:
    return (entry + (1 if turn == RIGHT else 2)) % 3


def _frame_rotation(entry: int, turn: str) -> int:
    return (entry + 1) % 3 if turn == RIGHT else entry


@dataclass(frozen=True)
class Crossing:
    edge: str
    sign: int
    triangle: str
    rotation: int
    delta: int


def trace(walk: CurveWalk, tri: IdealTriangulation) -> list[Crossing]:
    """Follow the walk; one crossing per step."""
    if not walk.closed:
        raise OpenWalk("walk is not marked closed")
    if not walk.steps:
        raise OpenWalk("walk has no steps")
    cur = tri.index_of(walk.start)
    out = []
    for i, step in enumerate(walk.steps):
        (nxt, entry), edge, sign = tri.partner((cur, step.side))
        exit_side = _exit_side(entry, step.turn)
        following = walk.steps[(i + 1) % len(walk.steps)]
        if following.side != exit_side:
            where = "closing step" if i + 1 == len(walk.steps) else f"step {i + 1}"
            raise SlotMismatch(f"{where} leaves {tri.triangles[nxt].id} by side "
                               f"{following.side}, but the turn at step {i} leads to side {exit_side}")
        out.append(Crossing(edge, sign, tri.triangles[nxt].id,
                            _frame_rotation(entry, step.turn), TURN_DELTA[step.turn]))
        cur = nxt
    if tri.triangles[cur].id != walk.start:
        raise OpenWalk(f"walk ends in {tri.triangles[cur].id}, started in {walk.start}")
    return out


def compile(walk: CurveWalk, coords: FGCoordinates, tri: IdealTriangulation) -> MonodromyWord:
    """Building blocks of the curve, in the order the curve crosses the edges."""
    if coords.genus != tri.genus or coords.punctures != tri.punctures:
        raise CoordinateError("coordinates and triangulation describe different surfaces")
    validate(coords, tri).raise_for_errors()
    blocks = []
    for c in trace(walk, tri):
        t = coords.triangle(c.triangle).rotated(c.rotation)
        blocks.append(BuildingBlockSpec(c.delta, t, coords.edge(c.edge, c.sign)))
    return MonodromyWord(tuple(blocks))


def peripheral_walks(tri: IdealTriangulation, turn: str = LEFT) -> list[CurveWalk]:
    """One closed walk around each puncture, turning the same way every time."""
    walks = []
    for corners in tri.puncture_classes():
        t, c = corners[0]
        # a left turn keeps the pivot v_c: enter side c, leave side c + 2;
        # a right turn keeps v_{c}: enter side c - 1, leave side c
        first = (t, (c + 2) % 3 if turn == LEFT else c)
        state, steps = first, []
        while True:
            (nxt, entry), _, _ = tri.partner(state)
            steps.append(Step(state[1], turn))
            state = (nxt, _exit_side(entry, turn))
            if state == first:
                break
        walks.append(CurveWalk(tri.triangles[t].id, tuple(steps), True))
    return walks


def sample_value(rng: np.random.Generator, modulus_range: tuple[float, float] = (0.2, 5.0),
                 positive: bool = False) -> complex:
    """Log-uniform modulus and uniform phase on [-pi, pi)."""
    lo, hi = modulus_range
    r = math.exp(rng.uniform(math.log(lo), math.log(hi)))
    if positive:
        return complex(r, 0.0)
    phase = rng.uniform(-math.pi, math.pi)
    return complex(r * math.cos(phase), r * math.sin(phase))


def random_coordinates(tri: IdealTriangulation, n: int, rng: np.random.Generator,
                       mode: str = "complex", edge_reversal: str = "zr-to-znr",
                       modulus_range: tuple[float, float] = (0.2, 5.0)) -> FGCoordinates:
    """Random coordinates; mode is "complex" or "positive".

    Under "zr-to-znr" only the "+" orientation is sampled and the other is
    derived; under "independent" both orientations are sampled.
    """
    if mode not in ("complex", "positive"):
        raise ValueError(f"unknown sampling mode {mode!r}")
    if edge_reversal not in EDGE_REVERSAL_MODES:
        raise CoordinateError(f"unknown edge-reversal mode {edge_reversal!r}")
    positive = mode == "positive"

    def draw() -> complex:
        return sample_value(rng, modulus_range, positive)

    triangles = {t.id: TriangleInvariants(n, {ijk: draw() for ijk in triangle_indices(n)})
                 for t in tri.triangles}
    signs = (1,) if edge_reversal == "zr-to-znr" else (1, -1)
    edges = {oriented(e, s): EdgeInvariants(n, tuple(draw() for _ in range(n - 1)))
             for e in tri.edge_ids() for s in signs}
    return FGCoordinates(n, tri.genus, tri.punctures, triangles, edges, tri.name, edge_reversal)


def constant_coordinates(tri: IdealTriangulation, n: int, value: Any = 1,
                         edge_reversal: str = "zr-to-znr") -> FGCoordinates:
    triangles = {t.id: TriangleInvariants.constant(n, value) for t in tri.triangles}
    edges = {oriented(e, 1): EdgeInvariants.constant(n, value) for e in tri.edge_ids()}
    if edge_reversal == "independent":
        edges.update({oriented(e, -1): EdgeInvariants.constant(n, value) for e in tri.edge_ids()})
    return FGCoordinates(n, tri.genus, tri.punctures, triangles, edges, tri.name, edge_reversal)


def walk_from_turns(tri: IdealTriangulation, start: str, first_side: int,
                    turns: Sequence[str]) -> CurveWalk:
    """Walk obtained by leaving ``start`` through ``first_side`` and turning as given.

    The result is closed only if the turns bring the curve back to its
    starting side; check with :func:`trace`.
    """
    state = (tri.index_of(start), first_side)
    steps = []
    for turn in turns:
        (nxt, entry), _, _ = tri.partner(state)
        steps.append(Step(state[1], turn))
        state = (nxt, _exit_side(entry, turn))
    return CurveWalk(start, tuple(steps), True)


def is_closed(walk: CurveWalk, tri: IdealTriangulation) -> bool:
    try:
        trace(walk, tri)
    except WalkError:
        return False
    return True


def closed_walks(tri: IdealTriangulation, length: int) -> Iterable[CurveWalk]:
    """All closed walks with the given number of steps, by brute force."""
    for start in tri.triangle_ids():
        for side in range(3):
            for bits in range(2 ** length):
                turns = [RIGHT if bits >> i & 1 else LEFT for i in range(length)]
                w = walk_from_turns(tri, start, side, turns)
                if is_closed(w, tri):
                    yield w


def reverse_walk(walk: CurveWalk, tri: IdealTriangulation) -> CurveWalk:
    """The same closed curve traversed backwards, from the same start triangle."""
    trace(walk, tri)
    cur = tri.index_of(walk.start)
    entries = []
    for st in walk.steps:
        (cur, entry), _, _ = tri.partner((cur, st.side))
        entries.append(entry)
    flip = {LEFT: RIGHT, RIGHT: LEFT}
    k = len(walk.steps)
    steps = tuple(Step(entries[i], flip[walk.steps[i - 1].turn]) for i in range(k - 1, -1, -1))
    return CurveWalk(walk.start, steps, True)
