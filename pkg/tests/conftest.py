from __future__ import annotations

import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from fgdom.coords import BuildingBlockSpec, EdgeInvariants, MonodromyWord, TriangleInvariants

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

positive_rationals = st.fractions(min_value=Fraction(1, 20), max_value=20, max_denominator=20)
nonzero_rationals = st.one_of(positive_rationals, positive_rationals.map(lambda q: -q))


@st.composite
def complex_values(draw: st.DrawFn, lo: float = 0.2, hi: float = 5.0) -> complex:
    r = draw(st.floats(lo, hi))
    phase = draw(st.floats(-math.pi, math.pi))
    return cmath.rect(r, phase)


@st.composite
def triangles(draw: st.DrawFn, n: int, values: st.SearchStrategy = positive_rationals) -> TriangleInvariants:
    k = (n - 1) * (n - 2) // 2
    return TriangleInvariants.from_sequence(n, draw(st.lists(values, min_size=k, max_size=k)))


@st.composite
def edges(draw: st.DrawFn, n: int, values: st.SearchStrategy = positive_rationals) -> EdgeInvariants:
    return EdgeInvariants(n, tuple(draw(st.lists(values, min_size=n - 1, max_size=n - 1))))


@st.composite
def words(draw: st.DrawFn, n: int, max_len: int = 6,
          values: st.SearchStrategy = positive_rationals,
          deltas: st.SearchStrategy = st.sampled_from([1, -1])) -> MonodromyWord:
    length = draw(st.integers(1, max_len))
    return MonodromyWord(tuple(
        BuildingBlockSpec(draw(deltas), draw(triangles(n, values)), draw(edges(n, values)))
        for _ in range(length)
    ))


def random_rational(rng: np.random.Generator, hi: int = 12) -> Fraction:
    return Fraction(int(rng.integers(1, hi + 1)), int(rng.integers(1, hi + 1)))


def random_spec(rng: np.random.Generator, n: int, delta: int, kind: str = "complex") -> BuildingBlockSpec:
    def draw() -> object:
        if kind == "rational":
            return random_rational(rng)
        r = math.exp(rng.uniform(math.log(0.2), math.log(5.0)))
        if kind == "positive":
            return r
        return cmath.rect(r, rng.uniform(-math.pi, math.pi))

    t = TriangleInvariants.from_sequence(n, [draw() for _ in range((n - 1) * (n - 2) // 2)])
    e = EdgeInvariants(n, tuple(draw() for _ in range(n - 1)))
    return BuildingBlockSpec(delta, t, e)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)
