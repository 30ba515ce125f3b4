from __future__ import annotations

import json

import numpy as np
import pytest

from fgdom import factory as fa
from fgdom import spectral as spc
from fgdom import surface as sf
from fgdom.coords import CoordinateError, bend_to_positive, bend_word, coordinate_count
from fgdom.harness import factored
from fgdom.surface import CurveWalk, IdealTriangulation, Step, Triangle

EXPECTED_SHAPE = {
    "once-punctured-torus": (1, 1, 2, 3),
    "thrice-punctured-sphere": (0, 3, 2, 3),
    "four-punctured-sphere": (0, 4, 4, 6),
}


@pytest.mark.parametrize("name", sf.BUILTIN_NAMES)
def test_builtin_counts(name: str) -> None:
    tri = sf.builtin_triangulation(name)
    g, k, triangles, edges = EXPECTED_SHAPE[name]
    assert (tri.genus, tri.punctures, len(tri.triangles), len(tri.gluing)) == (g, k, triangles, edges)
    assert len(tri.puncture_classes()) == k
    assert sorted(len(c) for c in tri.puncture_classes()) and sum(
        len(c) for c in tri.puncture_classes()) == 3 * triangles


@pytest.mark.parametrize("name", sf.BUILTIN_NAMES)
@pytest.mark.parametrize("n", [2, 3, 4])
def test_random_coordinates_have_the_expected_count(name: str, n: int, rng) -> None:
    tri = sf.builtin_triangulation(name)
    coords = sf.random_coordinates(tri, n, rng)
    count = sum(len(t.values) for t in coords.triangle_data.values()) + sum(
        len(e.values) for e in coords.edge_data.values())
    assert count == coordinate_count(tri.genus, tri.punctures, n)


@pytest.mark.parametrize("name", sf.BUILTIN_NAMES)
def test_triangulation_json_round_trip(name: str) -> None:
    tri = sf.builtin_triangulation(name)
    doc = json.loads(json.dumps(tri.to_json()))
    assert doc["schema_version"] == sf.SCHEMA_VERSION
    assert IdealTriangulation.from_json(doc) == tri


def test_partner_is_an_involution() -> None:
    tri = sf.builtin_triangulation("four-punctured-sphere")
    for t in range(4):
        for s in range(3):
            other, edge, sign = tri.partner((t, s))
            back, edge2, sign2 = tri.partner(other)
            assert back == (t, s) and edge2 == edge and sign2 == -sign


def test_invalid_triangulations_are_rejected() -> None:
    two = (Triangle("A"), Triangle("B"))
    with pytest.raises(sf.TriangulationError, match="punctures"):
        IdealTriangulation(1, 1, two, (((0, 0), (1, 0)), ((0, 1), (1, 2)), ((0, 2), (1, 1))))
    with pytest.raises(sf.TriangulationError, match="self-folded"):
        IdealTriangulation(1, 1, two, (((0, 0), (0, 1)), ((0, 2), (1, 2)), ((1, 0), (1, 1))))
    with pytest.raises(sf.TriangulationError, match="triangles"):
        IdealTriangulation(1, 1, two[:1], ())
    with pytest.raises(sf.TriangulationError, match="2 - 2g - k < 0"):
        IdealTriangulation(0, 2, (), ())
    with pytest.raises(sf.TriangulationError, match="glued twice"):
        IdealTriangulation(1, 1, two, (((0, 0), (1, 0)), ((0, 0), (1, 1)), ((0, 2), (1, 2))))
    with pytest.raises(sf.TriangulationError, match="unknown builtin"):
        sf.builtin_triangulation("klein-bottle")


@pytest.mark.parametrize("name", sf.BUILTIN_NAMES)
@pytest.mark.parametrize("turn", [sf.LEFT, sf.RIGHT])
def test_peripheral_walks_turn_one_way(name: str, turn: str) -> None:
    tri = sf.builtin_triangulation(name)
    walks = sf.peripheral_walks(tri, turn)
    assert len(walks) == tri.punctures
    assert sum(len(w.steps) for w in walks) == 3 * len(tri.triangles)
    for w in walks:
        deltas = {c.delta for c in sf.trace(w, tri)}
        assert deltas == {sf.TURN_DELTA[turn]}


def test_peripheral_walk_lengths() -> None:
    lengths = {name: sorted(len(w.steps) for w in sf.peripheral_walks(sf.builtin_triangulation(name)))
               for name in sf.BUILTIN_NAMES}
    assert lengths == {"once-punctured-torus": [6], "thrice-punctured-sphere": [2, 2, 2],
                       "four-punctured-sphere": [3, 3, 3, 3]}


@pytest.mark.parametrize("name", sf.BUILTIN_NAMES)
@pytest.mark.parametrize("n", [2, 3, 4])
def test_peripheral_monodromy_is_triangular(name: str, n: int, rng) -> None:
    tri = sf.builtin_triangulation(name)
    coords = sf.random_coordinates(tri, n, rng)
    for w in sf.peripheral_walks(tri):
        m = fa.to_complex(fa.monodromy(sf.compile(w, coords, tri)))
        assert np.allclose(np.tril(m, -1), 0, atol=1e-12 * np.max(np.abs(m)))


def test_mixed_torus_walk() -> None:
    tri = sf.builtin_triangulation("once-punctured-torus")
    walk = CurveWalk("T0", (Step(0, sf.RIGHT), Step(1, sf.LEFT)))
    crossings = sf.trace(walk, tri)
    assert tuple(c.delta for c in crossings) == (1, -1)
    assert [(c.edge, c.sign, c.triangle) for c in crossings] == [("e0", 1, "T1"), ("e1", -1, "T0")]


def test_walk_errors() -> None:
    tri = sf.builtin_triangulation("once-punctured-torus")
    with pytest.raises(sf.SlotMismatch, match="step 1 leaves T1 by side 2"):
        sf.trace(CurveWalk("T0", (Step(0, sf.RIGHT), Step(2, sf.LEFT))), tri)
    with pytest.raises(sf.OpenWalk):
        sf.trace(CurveWalk("T0", (Step(0, sf.RIGHT),), closed=False), tri)
    with pytest.raises(sf.OpenWalk):
        sf.trace(CurveWalk("T0", ()), tri)
    with pytest.raises(sf.WalkError):
        Step(3, sf.LEFT)
    with pytest.raises(sf.WalkError):
        Step(0, "straight")
    with pytest.raises(sf.TriangulationError):
        sf.trace(CurveWalk("T9", (Step(0, sf.RIGHT),)), tri)
    with pytest.raises(sf.WalkError):
        CurveWalk.from_json({"start": "T0"})


def test_walk_json_round_trip() -> None:
    walk = CurveWalk("T0", (Step(0, sf.RIGHT), Step(1, sf.LEFT)))
    assert CurveWalk.from_json(json.loads(json.dumps(walk.to_json()))) == walk


def test_closed_walks_are_closed() -> None:
    tri = sf.builtin_triangulation("thrice-punctured-sphere")
    walks = list(sf.closed_walks(tri, 4))
    assert walks
    assert all(sf.is_closed(w, tri) for w in walks)


@pytest.mark.parametrize("name", sf.BUILTIN_NAMES)
def test_compile_commutes_with_bending(name: str, rng) -> None:
    tri = sf.builtin_triangulation(name)
    coords = sf.random_coordinates(tri, 3, rng)
    for w in list(sf.closed_walks(tri, 4))[:10]:
        assert sf.compile(w, bend_to_positive(coords), tri) == bend_word(sf.compile(w, coords, tri))


@pytest.mark.parametrize("name", sf.BUILTIN_NAMES)
@pytest.mark.parametrize("n", [2, 3])
def test_reversed_walk_gives_the_inverse_spectrum(name: str, n: int, rng) -> None:
    tri = sf.builtin_triangulation(name)
    coords = sf.random_coordinates(tri, n, rng)
    for w in list(sf.closed_walks(tri, 4))[:8]:
        fwd = spc.eigen_moduli(factored(sf.compile(w, coords, tri))).logs
        back = spc.eigen_moduli(factored(sf.compile(sf.reverse_walk(w, tri), coords, tri))).logs
        cf = np.array(fwd) - np.mean(fwd)
        cb = np.array(back) - np.mean(back)
        assert np.allclose(np.sort(-cf), cb, atol=1e-8)


def test_compile_checks_the_surface(rng) -> None:
    torus = sf.builtin_triangulation("once-punctured-torus")
    sphere = sf.builtin_triangulation("thrice-punctured-sphere")
    coords = sf.random_coordinates(sphere, 3, rng)
    with pytest.raises(CoordinateError):
        sf.compile(sf.peripheral_walks(torus)[0], coords, torus)


def test_sample_value_ranges(rng) -> None:
    for _ in range(200):
        v = sf.sample_value(rng, (0.5, 2.0))
        assert 0.5 <= abs(v) <= 2.0
        assert sf.sample_value(rng, positive=True).imag == 0.0
    with pytest.raises(ValueError):
        sf.random_coordinates(sf.builtin_triangulation("once-punctured-torus"), 3, rng, mode="real")


def test_constant_coordinates_compile_to_constant_blocks() -> None:
    tri = sf.builtin_triangulation("once-punctured-torus")
    coords = sf.constant_coordinates(tri, 3)
    word = sf.compile(sf.peripheral_walks(tri)[0], coords, tri)
    assert all(b.triangle.values[(0, 0, 0)] == 1 for b in word)
