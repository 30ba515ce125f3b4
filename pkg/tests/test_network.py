from __future__ import annotations

import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from fgdom import factory as fa
from fgdom import network as nw
from fgdom.coords import BuildingBlockSpec, EdgeInvariants, MonodromyWord, TriangleInvariants
from fgdom.network import Edge, PlanarNetwork

from conftest import random_rational, random_spec


def brute_force_paths(net: PlanarNetwork) -> sp.Matrix:
    """Path-sum matrix by explicit depth-first enumeration."""
    out: dict[tuple[int, int], list[Edge]] = {}
    for e in net.edges:
        out.setdefault((e.layer, e.tail), []).append(e)

    def total(layer: int, track: int, sink: int):
        if layer == net.layers:
            return sp.Integer(1) if track == sink else sp.Integer(0)
        return sum((sp.sympify(e.weight) * total(layer + 1, e.head, sink)
                    for e in out.get((layer, track), [])), sp.Integer(0))

    n = net.order
    return sp.Matrix(n, n, lambda i, j: sp.expand(total(0, i + 1, j + 1)))


def figure_network():
    a, b, c, d, e, f, g, h, i = sp.symbols("a b c d e f g h i", positive=True)
    edges = [Edge(0, 3, 2, a), Edge(1, 2, 1, b), Edge(1, 3, 2, c), Edge(3, 1, 2, h),
             Edge(4, 2, 3, i), Edge(3, 2, 3, g)]
    for layer in range(5):
        for t in (1, 2, 3):
            w = {(2, 1): d, (2, 2): e, (2, 3): f}.get((layer, t), 1)
            edges.append(Edge(layer, t, t, w))
    return PlanarNetwork(3, 5, edges), (a, b, c, d, e, f, g, h, i)


def rational_weight(rng: np.random.Generator) -> Fraction:
    return random_rational(rng)


def test_figure_network_minor_is_degh() -> None:
    net, (a, b, c, d, e, f, g, h, i) = figure_network()
    assert sp.factor(nw.lindstrom_minor(net, [1, 2], [2, 3])) == d * e * g * h


def test_figure_network_weight_matrix_matches_enumeration() -> None:
    net, _ = figure_network()
    w = sp.Matrix(nw.weight_matrix(net).tolist()).applyfunc(sp.expand)
    assert w == brute_force_paths(net)


def test_figure_network_all_minors_obey_lindstrom() -> None:
    net, _ = figure_network()
    w = brute_force_paths(net)
    for k in (1, 2, 3):
        for I in itertools.combinations((1, 2, 3), k):
            for J in itertools.combinations((1, 2, 3), k):
                expected = w.extract([x - 1 for x in I], [y - 1 for y in J]).det()
                assert sp.expand(nw.lindstrom_minor(net, I, J) - expected) == 0


def test_identity_network() -> None:
    net = PlanarNetwork(4, 1, [Edge(0, t, t, Fraction(1)) for t in range(1, 5)])
    assert nw.lindstrom_minor(net, [1, 2, 3, 4], [1, 2, 3, 4]) == 1
    assert nw.lindstrom_minor(net, [1], [2]) == 0
    assert nw.lindstrom_minor(net, [], []) == 1


def test_lindstrom_on_random_rational_networks(rng) -> None:
    for _ in range(15):
        n = int(rng.integers(2, 5))
        net = nw.random_network(n, int(rng.integers(1, 6)), rng, weight=rational_weight)
        w = nw.weight_matrix(net)
        assert sp.Matrix(w.tolist()) == brute_force_paths(net)
        for k in range(1, min(n, 3) + 1):
            for I in itertools.combinations(range(1, n + 1), k):
                for J in itertools.combinations(range(1, n + 1), k):
                    assert nw.lindstrom_minor(net, I, J) == nw.minor(w, I, J)


def test_network_rejects_illegal_edges() -> None:
    with pytest.raises(nw.NetworkError, match="skips a track"):
        PlanarNetwork(3, 1, [Edge(0, 1, 3, 1.0)])
    with pytest.raises(nw.NetworkError, match="crossing"):
        PlanarNetwork(2, 1, [Edge(0, 1, 2, 1.0), Edge(0, 2, 1, 1.0)])
    with pytest.raises(nw.NetworkError, match="zero weight"):
        PlanarNetwork(2, 1, [Edge(0, 1, 1, 0.0)])
    with pytest.raises(nw.NetworkError, match="duplicate"):
        PlanarNetwork(2, 1, [Edge(0, 1, 1, 1.0), Edge(0, 1, 1, 2.0)])
    with pytest.raises(nw.NetworkError):
        PlanarNetwork(2, 1, [Edge(1, 1, 1, 1.0)])


def test_concatenation_multiplies_weight_matrices(rng) -> None:
    for _ in range(10):
        a = nw.random_network(3, 3, rng, weight=rational_weight)
        b = nw.random_network(3, 2, rng, weight=rational_weight)
        assert fa.exact_equal(nw.weight_matrix(nw.concat(a, b)),
                              nw.weight_matrix(a) @ nw.weight_matrix(b))
    with pytest.raises(nw.NetworkError):
        nw.concat(nw.random_network(2, 1, rng, weight=rational_weight),
                  nw.random_network(3, 1, rng, weight=rational_weight))


def test_modulus_map_keeps_graph_and_takes_moduli(rng) -> None:
    net = nw.random_network(4, 4, rng, weight=lambda r: complex(r.normal(), r.normal()))
    mod = nw.modulus_map(net)
    assert [(e.layer, e.tail, e.head) for e in mod.edges] == [(e.layer, e.tail, e.head) for e in net.edges]
    for e, m in zip(net.edges, mod.edges):
        assert complex(m.weight) == pytest.approx(abs(e.weight))
    wm, w = np.abs(nw.weight_matrix(mod)), np.abs(nw.weight_matrix(net))
    assert np.all(w <= wm + 1e-12)


@pytest.mark.parametrize("n", range(2, 6))
@pytest.mark.parametrize("delta", [1, -1])
def test_block_networks_reproduce_the_factory_exactly(n: int, delta: int, rng) -> None:
    for _ in range(4):
        spec = random_spec(rng, n, delta, "rational")
        w = nw.weight_matrix(nw.net_block(spec, exact=True))
        assert fa.projective_equal(fa.to_complex(w), fa.to_complex(fa.build_block(spec, exact=True)))
        # edge weights are positive for positive coordinates
        assert all(fa.to_complex(np.array([e.weight]))[0].real > 0 for e in nw.net_block(spec).edges)


@pytest.mark.parametrize("n", range(2, 6))
def test_word_network_matches_monodromy(n: int, rng) -> None:
    for _ in range(5):
        blocks = tuple(random_spec(rng, n, int(rng.choice([1, -1]))) for _ in range(int(rng.integers(1, 7))))
        word = MonodromyWord(blocks)
        assert fa.projective_equal(nw.weight_matrix(nw.net_word(word)), fa.monodromy(word))


def test_n3_TE_network_shape() -> None:
    spec = BuildingBlockSpec(1, TriangleInvariants(3, {(0, 0, 0): Fraction(2)}),
                             EdgeInvariants(3, (Fraction(3), Fraction(5))))
    net = nw.net_TE(spec, exact=True)
    assert len(net.sources) == 3 and len(net.sinks) == 3
    assert net.slanted_runs() == 2
    assert all(e.slope in (0, -1) for e in net.edges)


def test_block_network_delta_guards(rng) -> None:
    with pytest.raises(ValueError):
        nw.net_TE(random_spec(rng, 3, -1))
    with pytest.raises(ValueError):
        nw.net_TinvE(random_spec(rng, 3, 1))


def test_total_nonnegativity_verdicts() -> None:
    tp = np.array([[1, 1, 1], [1, 2, 3], [1, 3, 6]], dtype=float)
    assert nw.total_nonnegativity_check(tp).kind == "totally positive"
    assert nw.total_nonnegativity_check(np.eye(3)).kind == "totally nonnegative"
    v = nw.total_nonnegativity_check(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert v.kind == "neither" and v.witness == ((1, 2), (1, 2))
    with pytest.raises(nw.NonRealMatrix):
        nw.total_nonnegativity_check(np.array([[1j, 0], [0, 1]]))
    # exact minors with an empty pivot column are zero, not an error
    exact_id = fa.identity(3, True)
    assert nw.total_nonnegativity_check(exact_id).kind == "totally nonnegative"


def test_json_round_trip_and_dot(rng) -> None:
    net = nw.random_network(4, 5, rng, weight=lambda r: complex(r.normal(), r.normal()))
    doc = json.loads(json.dumps(net.to_json()))
    assert doc["schema_version"] == nw.SCHEMA_VERSION
    back = PlanarNetwork.from_json(doc)
    assert nw.same_structure(net, back)
    dot = net.to_dot()
    assert dot.startswith("digraph network {") and dot.count("->") == len(net.edges)
    with pytest.raises(nw.NetworkError):
        PlanarNetwork.from_json({"order": 2})
