from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from fgdom import factory as fa
from fgdom.coords import BuildingBlockSpec, EdgeInvariants, MonodromyWord, TriangleInvariants

from conftest import complex_values, edges, positive_rationals, random_spec, triangles, words


def as_sympy(m: np.ndarray) -> sp.Matrix:
    out = fa.to_complex(m) if m.dtype != object else m
    if m.dtype != object:
        return sp.Matrix(out.tolist())
    return sp.Matrix([[sp.Rational(str(v.x)) + sp.I * sp.Rational(str(v.y)) if hasattr(v, "x")
                       else sp.nsimplify(v) for v in row] for row in m])


def golden(rows) -> np.ndarray:
    return np.array(rows, dtype=object)


# ---- oracle: the elementary matrices written out directly

def oracle_S(n: int) -> sp.Matrix:
    return sp.Matrix(n, n, lambda i, j: (-1) ** i if i + j == n - 1 else 0)


def oracle_F(n: int, i: int) -> sp.Matrix:
    m = sp.eye(n)
    m[i, i - 1] = 1
    return m


def oracle_H(n: int, i: int, x) -> sp.Matrix:
    return sp.diag(*([1] * (n - i) + [x] * i))


def oracle_M(t: TriangleInvariants) -> sp.Matrix:
    n = t.n
    out = sp.eye(n)
    for j in range(1, n):
        factor = oracle_F(n, n - 1)
        for i in range(1, n - j):
            x = sp.Rational(t[(i - 1, n - i - j - 1, j - 1)])
            factor = factor * oracle_H(n, i, x) * oracle_F(n, n - i - 1)
        out = out * factor
    return out


def oracle_E(e: EdgeInvariants) -> sp.Matrix:
    n = e.n
    z = [sp.Rational(v) for v in e.values]
    diag = [sp.prod(z[n - 1 - k:]) for k in range(n)]
    return sp.diag(*diag) * oracle_S(n)


# ---- goldens

def test_S_goldens() -> None:
    assert fa.exact_equal(fa.elem_S(3, True), golden([[0, 0, 1], [0, -1, 0], [1, 0, 0]]))
    assert fa.exact_equal(fa.elem_S(2, True), golden([[0, 1], [-1, 0]]))
    s4 = fa.elem_S(4, True)
    assert fa.exact_equal(s4 @ s4, -fa.identity(4, True))


def test_F_and_H_goldens() -> None:
    assert fa.exact_equal(fa.elem_F(3, 2, True), golden([[1, 0, 0], [0, 1, 0], [0, 1, 1]]))
    assert fa.exact_equal(fa.elem_F(3, 1, True), golden([[1, 0, 0], [1, 1, 0], [0, 0, 1]]))
    X = Fraction(5, 3)
    assert fa.exact_equal(fa.elem_H(3, 1, X), golden([[1, 0, 0], [0, 1, 0], [0, 0, X]]))
    for n in range(2, 6):
        for i in range(1, n):
            assert fa.exact_equal(fa.elem_F(n, i, True) @ fa.elem_f(n, i, True), fa.identity(n, True))
            assert fa.exact_equal(fa.elem_H(n, i, X) @ fa.elem_h(n, i, X), fa.identity(n, True))


def test_elementary_index_errors() -> None:
    with pytest.raises(ValueError):
        fa.elem_S(1)
    with pytest.raises(ValueError):
        fa.elem_F(3, 3)
    with pytest.raises(ValueError):
        fa.elem_H(4, 4, 2)
    with pytest.raises(ValueError):
        fa.elem_H(3, 1, 0)


def test_M_goldens() -> None:
    X = Fraction(7, 2)
    t = TriangleInvariants(3, {(0, 0, 0): X})
    assert fa.exact_equal(fa.build_M(t), golden([[1, 0, 0], [1, 1, 0], [1, 1 + X, X]]))
    one = TriangleInvariants.constant(3, Fraction(1))
    assert fa.exact_equal(fa.build_M(one), golden([[1, 0, 0], [1, 1, 0], [1, 2, 1]]))
    assert fa.exact_equal(fa.build_M(TriangleInvariants(2, {}), exact=True), golden([[1, 0], [1, 1]]))


def test_T_and_E_goldens() -> None:
    X = Fraction(3, 4)
    t = TriangleInvariants(3, {(0, 0, 0): X})
    assert fa.exact_equal(fa.build_T(t), golden([[0, 0, 1], [0, -1, 1], [X, -1 - X, 1]]))
    one = TriangleInvariants.constant(3, Fraction(1))
    assert fa.exact_equal(fa.build_T(one), golden([[0, 0, 1], [0, -1, 1], [1, -2, 1]]))
    x, y = Fraction(2, 5), Fraction(9, 7)
    assert fa.exact_equal(fa.build_E(EdgeInvariants(3, (x, y))),
                          golden([[0, 0, 1], [0, -y, 0], [x * y, 0, 0]]))
    Z = Fraction(-6, 11)
    assert fa.exact_equal(fa.build_E(EdgeInvariants(2, (Z,))), golden([[0, 1], [-Z, 0]]))
    assert fa.exact_equal(fa.build_E(EdgeInvariants.constant(5, Fraction(1))), fa.elem_S(5, True))


def test_det_T_equals_X() -> None:
    # det M = X and det S = 1 for n = 3
    X = sp.Symbol("X")
    T = sp.Matrix([[0, 0, 1], [0, -1, 1], [X, -1 - X, 1]])
    assert sp.expand(T.det()) == X
    t = TriangleInvariants(3, {(0, 0, 0): Fraction(13, 3)})
    assert complex(np.linalg.det(fa.to_complex(fa.build_T(t)))) == pytest.approx(13 / 3)


def test_Step_goldens() -> None:
    x1 = Fraction(5, 2)
    t = TriangleInvariants(3, {(0, 0, 0): x1})
    assert fa.exact_equal(fa.build_Step(t, 1), golden([[1, 0, 0], [-1, 1, 0], [0, -1 / x1, 1 / x1]]))
    assert fa.exact_equal(fa.build_S_Step_S(t, 1), golden([[1 / x1, 1 / x1, 0], [0, 1, 1], [0, 0, 1]]))
    one = TriangleInvariants.constant(3, Fraction(1))
    assert fa.exact_equal(fa.build_S_Step_S(one, 1), golden([[1, 1, 0], [0, 1, 1], [0, 0, 1]]))
    for n in range(2, 6):
        t = TriangleInvariants.constant(n, Fraction(3))
        assert fa.exact_equal(fa.build_Step(t, n - 1), fa.elem_f(n, n - 1, True))


def test_St_one_and_lower_triangular_steps() -> None:
    for n in range(2, 6):
        t = TriangleInvariants.constant(n, Fraction(2))
        assert fa.exact_equal(fa.build_St(t, 1), fa.elem_F(n, n - 1, True))
    for k in range(1, 4):
        st_k = fa.to_complex(fa.build_St(TriangleInvariants.constant(4, Fraction(2)), k))
        assert np.allclose(np.triu(st_k, 1), 0) and np.all(st_k.real >= 0)


def test_building_block_goldens() -> None:
    x, y, z = Fraction(2, 3), Fraction(5, 7), Fraction(11, 4)
    t, e = TriangleInvariants(3, {(0, 0, 0): z}), EdgeInvariants(3, (x, y))
    plus = fa.build_block(BuildingBlockSpec(1, t, e))
    minus = fa.build_block(BuildingBlockSpec(-1, t, e))
    assert fa.exact_equal(plus, golden([[x * y, 0, 0], [x * y, y, 0], [x * y, y * (1 + z), z]]))
    assert fa.exact_equal(minus, golden([[x * y / z, y * (1 + z) / z, 1], [0, y, 1], [0, 0, 1]]))
    ones = BuildingBlockSpec(1, TriangleInvariants.constant(3, Fraction(1)),
                             EdgeInvariants.constant(3, Fraction(1)))
    assert fa.exact_equal(fa.build_block(ones), golden([[1, 0, 0], [1, 1, 0], [1, 2, 1]]))


def test_float_backend_matches_goldens_to_1e12() -> None:
    x, y, z = 0.3, 1.7, 2.9
    t, e = TriangleInvariants(3, {(0, 0, 0): z}), EdgeInvariants(3, (x, y))
    plus = fa.build_block(BuildingBlockSpec(1, t, e), exact=False)
    ref = np.array([[x * y, 0, 0], [x * y, y, 0], [x * y, y * (1 + z), z]])
    assert np.max(np.abs(plus - ref)) <= 1e-12
    T = fa.build_T(t, exact=False)
    assert np.max(np.abs(T - np.array([[0, 0, 1], [0, -1, 1], [z, -1 - z, 1]]))) <= 1e-12


# ---- identities against the oracle

@pytest.mark.parametrize("n", range(2, 7))
@given(data=st.data())
def test_M_matches_oracle(n: int, data) -> None:
    t = data.draw(triangles(n))
    assert as_sympy(fa.build_M(t, exact=True)) == oracle_M(t)


@pytest.mark.parametrize("n", range(2, 7))
@given(data=st.data())
def test_T_E_match_oracle(n: int, data) -> None:
    t, e = data.draw(triangles(n)), data.draw(edges(n))
    assert as_sympy(fa.build_T(t, exact=True)) == oracle_M(t) * oracle_S(n)
    assert as_sympy(fa.build_E(e, exact=True)) == oracle_E(e)


@pytest.mark.parametrize("n", range(2, 7))
@given(data=st.data())
def test_step_identities(n: int, data) -> None:
    t = data.draw(triangles(n))
    I = fa.identity(n, True)
    S = fa.elem_S(n, True)
    assert fa.exact_equal(S @ S, (-1) ** (n + 1) * I)
    prod = fa.identity(n, True)
    for k in range(n - 1, 0, -1):
        prod = prod @ fa.build_St(t, k)
    assert fa.exact_equal(prod, fa.build_M(t))
    for k in range(1, n):
        assert fa.exact_equal(fa.build_Step(t, n - k) @ fa.build_St(t, k), I)
        sss = fa.build_S_Step_S(t, k)
        assert fa.exact_equal(S @ fa.build_Step(t, k) @ S, (-1) ** (n + 1) * sss)
        # upper bidiagonal with equal diagonal and superdiagonal in the active rows
        c = fa.to_complex(sss)
        assert np.allclose(np.tril(c, -1), 0) and np.allclose(np.triu(c, 2), 0)


@pytest.mark.parametrize("n", range(2, 7))
def test_float_identities(n: int, rng) -> None:
    spec = random_spec(rng, n, 1, "complex")
    t = spec.triangle
    I = np.eye(n)
    for k in range(1, n):
        prod = fa.build_Step(t, n - k, exact=False) @ fa.build_St(t, k, exact=False)
        assert np.max(np.abs(prod - I)) <= 1e-10


@pytest.mark.parametrize("n", range(2, 7))
def test_blocks_are_projectively_T_pm1_E(n: int, rng) -> None:
    for _ in range(5):
        spec = random_spec(rng, n, 1, "complex")
        T, E = fa.build_T(spec.triangle), fa.build_E(spec.edge)
        assert fa.projective_equal(fa.build_block(spec), T @ E)
        minus = BuildingBlockSpec(-1, spec.triangle, spec.edge)
        assert fa.projective_equal(fa.build_block(minus), np.linalg.inv(T) @ E)


@pytest.mark.parametrize("n", [2, 3])
def test_minus_block_is_exactly_inverse_T_times_E(n: int, rng) -> None:
    spec = random_spec(rng, n, -1, "rational")
    T = as_sympy(fa.build_T(spec.triangle, exact=True))
    E = as_sympy(fa.build_E(spec.edge, exact=True))
    assert as_sympy(fa.build_block(spec, exact=True)) == T.inv() * E


@pytest.mark.parametrize("n", range(2, 7))
@given(data=st.data())
def test_positive_blocks_are_nonnegative(n: int, data) -> None:
    t, e = data.draw(triangles(n)), data.draw(edges(n))
    for delta in (1, -1):
        m = fa.to_complex(fa.build_block(BuildingBlockSpec(delta, t, e)))
        assert np.all(m.real >= 0) and np.all(m.imag == 0)
    for k in range(1, n):
        assert np.all(fa.to_complex(fa.build_S_Step_S(t, k)).real >= 0)


def test_monodromy_order_is_right_to_left(rng) -> None:
    b1, b2 = random_spec(rng, 3, 1, "rational"), random_spec(rng, 3, -1, "rational")
    word = MonodromyWord((b1, b2))
    assert fa.exact_equal(fa.monodromy(word), fa.build_block(b2) @ fa.build_block(b1))
    assert fa.exact_equal(fa.monodromy(MonodromyWord((b1,))), fa.build_block(b1))


@pytest.mark.parametrize("n", [3, 4, 5])
@given(data=st.data())
def test_single_sign_words_are_triangular(n: int, data) -> None:
    for delta, off_triangle in ((1, lambda m: np.triu(m, 1)), (-1, lambda m: np.tril(m, -1))):
        word = data.draw(words(n, values=complex_values(), deltas=st.just(delta)))
        m = fa.to_complex(fa.monodromy(word))
        assert np.allclose(off_triangle(m), 0, atol=1e-12 * np.max(np.abs(m)))


def test_rescaled_monodromy_is_projectively_the_plain_product(rng) -> None:
    blocks = tuple(random_spec(rng, 4, int(rng.choice([1, -1]))) for _ in range(20))
    word = MonodromyWord(blocks)
    plain = np.eye(4, dtype=complex)
    for b in blocks:
        plain = fa.build_block(b, exact=False) @ plain
    scaled = fa.monodromy_with_scale(word)
    assert scaled.log_scale != 0.0
    assert fa.projective_equal(scaled.matrix, plain)
    assert np.allclose(np.exp(scaled.log_scale) * scaled.matrix, plain, rtol=1e-9)


def test_projective_equality() -> None:
    a = np.array([[1, 2], [3, 4]], dtype=complex)
    assert fa.projective_equal(a, (2 - 3j) * a)
    assert not fa.projective_equal(a, a + np.array([[0, 0], [0, 1e-6]]))
