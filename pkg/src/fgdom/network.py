"""Layered planar networks and their weight matrices.

Vertices sit on an integer grid (layer, track), tracks 1..n bottom to top.
Every edge joins layer l to layer l+1 and moves at most one track, and two
edges between the same pair of layers may not cross.  Sources are the
vertices (0, t) and sinks the vertices (L, t).  Entry (i, j) of the weight
matrix sums the weights of all paths from source i to sink j.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Iterator, Sequence

import numpy as np

from .coords import BuildingBlockSpec, MonodromyWord, modulus
from .factory import GaussianRational, M_factors, S_Step_S_factors, build_SE, to_exact

SCHEMA_VERSION = "fgdom.network/1"

Vertex = tuple[int, int]


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    layer: int
    tail: int
    head: int
    weight: Any

    @property
    def source(self) -> Vertex:
        return (self.layer, self.tail)

    @property
    def target(self) -> Vertex:
        return (self.layer + 1, self.head)

    @property
    def slope(self) -> int:
        return self.head - self.tail


class PlanarNetwork:
    """Immutable layered planar network of order n with `layers` layer gaps."""

    def __init__(self, order: int, layers: int, edges: Iterable[Edge]):
        self.order = int(order)
        self.layers = int(layers)
        self.edges: tuple[Edge, ...] = tuple(sorted(edges, key=lambda e: (e.layer, e.tail, e.head)))
        self._check()

    def _check(self) -> None:
        n, L = self.order, self.layers
        if n < 1 or L < 1:
            raise NetworkError("a network needs order >= 1 and at least one layer")
        seen: set[tuple[int, int, int]] = set()
        for e in self.edges:
            if not 0 <= e.layer < L:
                raise NetworkError(f"edge {e} outside layers 0..{L}")
            if not (1 <= e.tail <= n and 1 <= e.head <= n):
                raise NetworkError(f"edge {e} leaves tracks 1..{n}")
            if abs(e.slope) > 1:
                raise NetworkError(f"edge {e} skips a track")
            if not e.weight:
                raise NetworkError(f"edge {e} has zero weight")
            key = (e.layer, e.tail, e.head)
            if key in seen:
                raise NetworkError(f"duplicate edge {key}")
            seen.add(key)
        for e in self.edges:
            if e.slope == 1 and (e.layer, e.tail + 1, e.tail) in seen:
                raise NetworkError(f"crossing edges in layer {e.layer} at tracks {e.tail}/{e.tail + 1}")

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, PlanarNetwork) and self.order == other.order
                and self.layers == other.layers and self.edges == other.edges)

    def __repr__(self) -> str:
        return f"PlanarNetwork(order={self.order}, layers={self.layers}, edges={len(self.edges)})"

    @property
    def exact(self) -> bool:
        """True when some weight is not a float/complex (rationals, symbols)."""
        return any(not isinstance(e.weight, (complex, float)) for e in self.edges)

    @property
    def sources(self) -> list[Vertex]:
        return [(0, t) for t in range(1, self.order + 1)]

    @property
    def sinks(self) -> list[Vertex]:
        return [(self.layers, t) for t in range(1, self.order + 1)]

    def vertices(self) -> list[Vertex]:
        vs = set(self.sources) | set(self.sinks)
        for e in self.edges:
            vs.add(e.source)
            vs.add(e.target)
        return sorted(vs)

    def out_edges(self) -> dict[Vertex, list[Edge]]:
        out: dict[Vertex, list[Edge]] = {}
        for e in self.edges:
            out.setdefault(e.source, []).append(e)
        return out

    def transfer_matrix(self, layer: int) -> np.ndarray:
        n = self.order
        if self.exact:
            m = np.zeros((n, n), dtype=object)
        else:
            m = np.zeros((n, n), dtype=complex)
        for e in self.edges:
            if e.layer == layer:
                m[e.tail - 1, e.head - 1] = e.weight
        return m

    def slanted_runs(self) -> int:
        """Number of maximal straight chains of non-horizontal edges."""
        slanted = {(e.layer, e.tail, e.head) for e in self.edges if e.slope != 0}
        starts = 0
        for (l, a, b) in slanted:
            if (l - 1, 2 * a - b, a) not in slanted:
                starts += 1
        return starts

    def to_json(self) -> dict[str, Any]:
        def vid(v: Vertex) -> str:
            return f"v{v[0]}_{v[1]}"

        def pair(w: Any) -> list[float]:
            if isinstance(w, GaussianRational):
                return [float(w.x), float(w.y)]
            c = complex(w)
            return [c.real, c.imag]

        return {
            "schema_version": SCHEMA_VERSION,
            "order": self.order,
            "layers": self.layers,
            "vertices": [{"id": vid(v), "layer": v[0], "track": v[1]} for v in self.vertices()],
            "edges": [{"from": vid(e.source), "to": vid(e.target), "w": pair(e.weight)}
                      for e in self.edges],
            "sources": [vid(v) for v in self.sources],
            "sinks": [vid(v) for v in self.sinks],
        }

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> PlanarNetwork:
        try:
            pos = {v["id"]: (int(v["layer"]), int(v["track"])) for v in doc["vertices"]}
            edges = []
            for e in doc["edges"]:
                (l0, t0), (l1, t1) = pos[e["from"]], pos[e["to"]]
                if l1 != l0 + 1:
                    raise NetworkError(f"edge {e['from']}->{e['to']} must join adjacent layers")
                re, im = e["w"]
                edges.append(Edge(l0, t0, t1, complex(re, im)))
            return cls(int(doc["order"]), int(doc["layers"]), edges)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, NetworkError):
                raise
            raise NetworkError(f"malformed network document: {exc}") from exc

    def to_dot(self, name: str = "network") -> str:
        """Graphviz description with nodes pinned at (layer, track)."""
        lines = [f"digraph {name} {{", "  rankdir=LR;", "  node [shape=point];"]
        for (l, t) in self.vertices():
            lines.append(f'  "v{l}_{t}" [pos="{l},{t}!"];')
        for e in self.edges:
            w = e.weight
            label = _format_weight(w)
            lines.append(f'  "v{e.layer}_{e.tail}" -> "v{e.layer + 1}_{e.head}" [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _format_weight(w: Any) -> str:
    if isinstance(w, GaussianRational):
        return str(w)
    c = complex(w)
    if c.imag == 0:
        return f"{c.real:.6g}"
    return f"{c.real:.6g}{c.imag:+.6g}i"


def weight_matrix(net: PlanarNetwork) -> np.ndarray:
    """Product of the layer transfer matrices."""
    out = net.transfer_matrix(0)
    for layer in range(1, net.layers):
        out = out @ net.transfer_matrix(layer)
    return out


def concat(a: PlanarNetwork, b: PlanarNetwork) -> PlanarNetwork:
    """Glue the sinks of `a` to the sources of `b`; the weight matrix is W(a) W(b)."""
    if a.order != b.order:
        raise NetworkError(f"order mismatch: {a.order} vs {b.order}")
    shifted = [Edge(e.layer + a.layers, e.tail, e.head, e.weight) for e in b.edges]
    return PlanarNetwork(a.order, a.layers + b.layers, list(a.edges) + shifted)


def concat_all(nets: Sequence[PlanarNetwork]) -> PlanarNetwork:
    out = nets[0]
    for net in nets[1:]:
        out = concat(out, net)
    return out


def modulus_map(net: PlanarNetwork) -> PlanarNetwork:
    """Same graph with every weight replaced by its modulus."""
    return PlanarNetwork(net.order, net.layers,
                         [Edge(e.layer, e.tail, e.head, modulus(e.weight)) for e in net.edges])


def _paths(out: dict[Vertex, list[Edge]], start: Vertex, end_track: int, last: int,
           below: Sequence[int] | None) -> Iterator[tuple[list[int], Any]]:
    """All paths start -> (last, end_track) staying strictly below `below`."""
    layer0, track0 = start
    tracks = [track0]

    def walk(v: Vertex, weight: Any) -> Iterator[tuple[list[int], Any]]:
        layer, track = v
        if layer == last:
            if track == end_track:
                yield list(tracks), weight
            return
        # remaining layers bound how far the path may still move
        for e in out.get(v, ()):
            nt = e.head
            if abs(nt - end_track) > last - layer - 1:
                continue
            if below is not None and nt >= below[layer + 1 - layer0]:
                continue
            tracks.append(nt)
            yield from walk(e.target, weight * e.weight)
            tracks.pop()

    if below is not None and track0 >= below[0]:
        return
    yield from walk(start, 1)


def path_families(net: PlanarNetwork, I: Sequence[int], J: Sequence[int]) -> Iterator[tuple[list[list[int]], Any]]:
    """Vertex-disjoint families from sources I to sinks J, as (track lists, weight).

    Families in a layered planar network cannot cross, so the k-th highest
    source is joined to the k-th highest sink; sources are processed from the
    top down and each path is pruned to stay strictly below the previous one.
    """
    if len(I) != len(J):
        raise ValueError("|I| must equal |J|")
    out = net.out_edges()
    src = sorted(I, reverse=True)
    dst = sorted(J, reverse=True)

    def extend(idx: int, upper: list[int] | None, acc: list[list[int]], weight: Any):
        if idx == len(src):
            yield [list(p) for p in acc], weight
            return
        for tracks, w in _paths(out, (0, src[idx]), dst[idx], net.layers, upper):
            acc.append(tracks)
            yield from extend(idx + 1, tracks, acc, weight * w)
            acc.pop()

    yield from extend(0, None, [], 1)


def lindstrom_minor(net: PlanarNetwork, I: Sequence[int], J: Sequence[int]) -> Any:
    """Sum of weights of vertex-disjoint path families from sources I to sinks J (1-based)."""
    if len(I) != len(J) or len(I) > net.order:
        raise ValueError("need |I| = |J| <= n")
    if not I:
        return 1
    total: Any = 0
    for _, w in path_families(net, I, J):
        total = total + w
    return total


def minor(m: np.ndarray, I: Sequence[int], J: Sequence[int]) -> Any:
    """(I, J) minor of m with 1-based index sets; exact for object arrays."""
    from .spectral import _exact_det
    rows = [i - 1 for i in sorted(I)]
    cols = [j - 1 for j in sorted(J)]
    if m.dtype == object:
        return _exact_det([[m[i, j] for j in cols] for i in rows])
    return complex(np.linalg.det(m[np.ix_(rows, cols)]))


class NonRealMatrix(ValueError):
    pass


@dataclass(frozen=True)
class PositivityVerdict:
    kind: str
    min_minor: float
    witness: tuple[tuple[int, ...], tuple[int, ...]]

    @property
    def totally_positive(self) -> bool:
        return self.kind == "totally positive"

    @property
    def totally_nonnegative(self) -> bool:
        return self.kind in ("totally positive", "totally nonnegative")


def total_nonnegativity_check(m: np.ndarray, tol: float = 1e-12) -> PositivityVerdict:
    """Classify by the sign of every minor: totally positive / nonnegative / neither."""
    a = np.asarray(m)
    n = a.shape[0]
    exact = a.dtype == object
    if exact:
        a = np.array([[to_exact(v) for v in row] for row in a], dtype=object)
        if any(v.y != 0 for v in a.ravel()):
            raise NonRealMatrix("matrix has non-real entries")
    else:
        a = a.astype(complex)
        if np.any(np.abs(a.imag) > tol):
            raise NonRealMatrix("matrix has non-real entries")
    worst: Any = None
    witness: tuple[tuple[int, ...], tuple[int, ...]] = ((), ())
    for k in range(1, n + 1):
        for I in itertools.combinations(range(1, n + 1), k):
            for J in itertools.combinations(range(1, n + 1), k):
                v = minor(a, I, J)
                v = to_exact(v).x if exact else v.real
                if worst is None or v < worst:
                    worst, witness = v, (I, J)
    assert worst is not None
    if exact:
        kind = ("totally positive" if worst > 0 else
                "totally nonnegative" if worst >= 0 else "neither")
    else:
        kind = ("totally positive" if worst > tol else
                "totally nonnegative" if worst >= -tol else "neither")
    return PositivityVerdict(kind, float(worst), witness)


def layer_network(m: np.ndarray) -> PlanarNetwork:
    """Single-layer network whose weight matrix is m (pattern must be legal)."""
    n = m.shape[0]
    edges = []
    for a in range(n):
        for b in range(n):
            w = m[a, b]
            if w:
                edges.append(Edge(0, a + 1, b + 1, w))
    return PlanarNetwork(n, 1, edges)


def _mergeable(a: np.ndarray, b: np.ndarray) -> bool:
    """True when a.b is again one legal layer with single-path entries."""
    n = a.shape[0]
    nz_a = np.array([[bool(a[i, j]) for j in range(n)] for i in range(n)])
    nz_b = np.array([[bool(b[i, j]) for j in range(n)] for i in range(n)])
    counts = nz_a.astype(int) @ nz_b.astype(int)
    if np.any(counts > 1):
        return False
    for i in range(n):
        for j in range(n):
            if counts[i, j] and abs(i - j) > 1:
                return False
    for i in range(n - 1):
        if counts[i, i + 1] and counts[i + 1, i]:
            return False
    return True


def layers_network(mats: Sequence[np.ndarray], merge: bool = True) -> PlanarNetwork:
    """Concatenation of single-layer networks, greedily merging adjacent layers."""
    merged: list[np.ndarray] = []
    for m in mats:
        if merge and merged and _mergeable(merged[-1], m):
            merged[-1] = merged[-1] @ m
        else:
            merged.append(m)
    return concat_all([layer_network(m) for m in merged])


def net_TE(spec: BuildingBlockSpec, exact: bool | None = None) -> PlanarNetwork:
    """Network with weight matrix M(t) . diag(z_1...z_{n-1}, ..., 1), i.e. T(t)E(e)."""
    if spec.delta != 1:
        raise ValueError("net_TE needs delta = +1")
    from .factory import _spec_exact
    exact = _spec_exact(spec, exact)
    mats = M_factors(spec.triangle, exact) + [build_SE(spec.edge, exact)]
    return layers_network(mats)


def net_S_Step_S(spec_or_t: Any, k: int, exact: bool | None = None) -> PlanarNetwork:
    """Two layers: weights c on the horizontal wires, then the up-slanted edges."""
    t = spec_or_t.triangle if isinstance(spec_or_t, BuildingBlockSpec) else spec_or_t
    C, U = S_Step_S_factors(t, k, exact)
    return layers_network([C, U], merge=False)


def net_TinvE(spec: BuildingBlockSpec, exact: bool | None = None) -> PlanarNetwork:
    """Concatenation of the S.Step(k).S networks for k = n-1..1 and the diagonal S.E(e)."""
    if spec.delta != -1:
        raise ValueError("net_TinvE needs delta = -1")
    from .factory import _spec_exact
    exact = _spec_exact(spec, exact)
    n = spec.n
    parts = [net_S_Step_S(spec.triangle, k, exact) for k in range(n - 1, 0, -1)]
    parts.append(layer_network(build_SE(spec.edge, exact)))
    return concat_all(parts)


def net_block(spec: BuildingBlockSpec, exact: bool | None = None) -> PlanarNetwork:
    return net_TE(spec, exact) if spec.delta == 1 else net_TinvE(spec, exact)


def net_word(word: MonodromyWord, exact: bool | None = None) -> PlanarNetwork:
    """Networks of B_k, ..., B_1 concatenated left to right, so the weight matrix is B_k ... B_1."""
    return concat_all([net_block(b, exact) for b in reversed(word.blocks)])


def random_network(n: int, layers: int, rng: np.random.Generator,
                   weight: Callable[[np.random.Generator], Any],
                   max_edges: int = 40, p_horizontal: float = 0.8,
                   p_slant: float = 0.35) -> PlanarNetwork:
    """Random legal layered network with at most `max_edges` edges."""
    edges: list[Edge] = []
    for layer in range(layers):
        present: set[tuple[int, int]] = set()
        for t in range(1, n + 1):
            if rng.random() < p_horizontal:
                present.add((t, t))
        for t in range(1, n):
            r = rng.random()
            if r < p_slant:
                present.add((t, t + 1))
            elif r < 2 * p_slant:
                present.add((t + 1, t))
        for a, b in sorted(present):
            edges.append(Edge(layer, a, b, weight(rng)))
    if len(edges) > max_edges:
        order = rng.permutation(len(edges))[:max_edges]
        edges = [edges[i] for i in sorted(order)]
    return PlanarNetwork(n, layers, edges)


def same_structure(a: PlanarNetwork, b: PlanarNetwork, rtol: float = 1e-12) -> bool:
    """Same vertices and edges, weights equal within rtol."""
    if (a.order, a.layers, len(a.edges)) != (b.order, b.layers, len(b.edges)):
        return False
    for ea, eb in zip(a.edges, b.edges):
        if (ea.layer, ea.tail, ea.head) != (eb.layer, eb.tail, eb.head):
            return False
        wa, wb = complex(_as_complex(ea.weight)), complex(_as_complex(eb.weight))
        if abs(wa - wb) > rtol * max(abs(wa), abs(wb)):
            return False
    return True


def _as_complex(w: Any) -> complex:
    if isinstance(w, GaussianRational):
        return complex(float(w.x), float(w.y))
    return complex(w)
