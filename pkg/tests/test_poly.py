import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gsip.poly import (Polynomial, PolynomialMap, SpaceMismatch, VariableSpace, basis_size, grlex_key,
                       monomial_exponents)

SPACE = VariableSpace([("x", 2), ("u", 2)])


@st.composite
def polynomials(draw, space=SPACE, max_deg=3, max_terms=6):
    n = space.dim
    terms = draw(st.lists(
        st.tuples(st.floats(-5, 5, allow_nan=False), st.lists(st.integers(0, max_deg), min_size=n, max_size=n)),
        max_size=max_terms))
    return Polynomial.from_terms(space, [(c, e) for c, e in terms if sum(e) <= max_deg])


points = st.lists(st.floats(-2, 2, allow_nan=False), min_size=4, max_size=4).map(np.array)


@given(polynomials(), polynomials(), points)
def test_ring_operations_match_pointwise(p, q, z):
    assert np.isclose((p + q).eval(z), p.eval(z) + q.eval(z), atol=1e-9)
    assert np.isclose((p - q).eval(z), p.eval(z) - q.eval(z), atol=1e-9)
    assert np.isclose((p * q).eval(z), p.eval(z) * q.eval(z), rtol=1e-9, atol=1e-8)
    assert np.isclose((p ** 2).eval(z), p.eval(z) ** 2, rtol=1e-9, atol=1e-8)


@given(polynomials(), st.lists(points, min_size=1, max_size=5))
def test_eval_many_agrees_with_eval(p, zs):
    Z = np.vstack(zs)
    assert np.allclose(p.eval_many(Z), [p.eval(z) for z in zs], rtol=1e-12, atol=1e-10)


@given(polynomials(), points)
def test_gradient_matches_central_differences(p, z):
    h = 1e-6
    grad = p.gradient()(z)
    for i in range(SPACE.dim):
        e = np.zeros(SPACE.dim)
        e[i] = h
        fd = (p.eval(z + e) - p.eval(z - e)) / (2 * h)
        assert abs(grad[i] - fd) <= 1e-4 * max(1.0, abs(fd))


@given(polynomials(), points)
def test_block_gradient_and_hessian_are_consistent(p, z):
    gu = p.gradient("u")
    H = p.hessian("u")
    assert gu.dim == 2
    for i in range(2):
        for j in range(2):
            assert np.isclose(H[i][j].eval(z), gu[i].diff(SPACE.offset("u") + j).eval(z))
            assert np.isclose(H[i][j].eval(z), H[j][i].eval(z))


@given(polynomials(), polynomials(VariableSpace([("x", 2)]), max_deg=2, max_terms=3),
       polynomials(VariableSpace([("x", 2)]), max_deg=2, max_terms=3), points)
@settings(max_examples=50)
def test_substitution_is_composition(p, q1, q2, z):
    q = PolynomialMap([q1, q2])
    composed = p.substitute("u", q)
    x = z[:2]
    assert composed.space == VariableSpace([("x", 2)])
    expected = p.eval(np.concatenate([x, q(x)]))
    assert np.isclose(composed.eval(x), expected, rtol=1e-8, atol=1e-7)


@given(polynomials(), points)
def test_substitute_values_fixes_a_block(p, z):
    fixed = p.substitute_values({"u": z[2:]})
    assert fixed.space.names == ("x",)
    assert np.isclose(fixed.eval(z[:2]), p.eval(z), rtol=1e-10, atol=1e-9)


def test_embed_and_restrict_round_trip():
    xs = VariableSpace([("x", 2)])
    x = xs.vars("x")
    p = x[0] ** 2 * x[1] - 3 * x[1] + 1
    big = p.embed(SPACE)
    assert big.eval([2.0, 3.0, 9.0, 9.0]) == p.eval([2.0, 3.0])
    assert big.restrict(xs) == p
    with pytest.raises(SpaceMismatch):
        SPACE.vars("u")[0].embed(xs)


def test_terms_iterate_in_graded_lex_order():
    x = SPACE.vars("x")
    u = SPACE.vars("u")
    p = u[1] ** 3 + x[0] * u[0] + 2 + x[1]
    keys = [grlex_key(e) for e in p.terms]
    assert keys == sorted(keys)
    assert p.degree == 3 and p.degree_in("x") == 1 and p.degree_in("u") == 3
    assert p.constant_term() == 2.0


def test_monomial_exponents_count_and_order():
    for n in range(1, 5):
        for d in range(4):
            exps = monomial_exponents(n, d)
            assert len(exps) == basis_size(n, d) == len(set(exps))
            assert [sum(e) for e in exps] == sorted(sum(e) for e in exps)
    assert monomial_exponents(2, 1) == [(0, 0), (1, 0), (0, 1)]


def test_chop_and_almost_equal():
    x = SPACE.vars("x")
    p = x[0] + 1e-14 * x[1]
    assert p.chop() == x[0].chop()
    assert p.almost_equal(x[0], tol=1e-12)
    assert not p.almost_equal(x[0] + 1e-6, tol=1e-12)


def test_linear_constructor_and_join_split():
    p = Polynomial.linear(SPACE, [1.0, -2.0], const=0.5, block="u")
    z = SPACE.join(x=[7, 7], u=[1, 1])
    assert p.eval(z) == -0.5
    parts = SPACE.split(z)
    assert np.array_equal(parts["x"], [7, 7]) and np.array_equal(parts["u"], [1, 1])
    with pytest.raises(SpaceMismatch):
        SPACE.join(x=[1, 2, 3])


def test_space_rejects_bad_input():
    with pytest.raises(ValueError):
        VariableSpace([("x", 1), ("x", 2)])
    with pytest.raises(SpaceMismatch):
        Polynomial(SPACE, {(1, 0): 1.0})
    with pytest.raises(ValueError):
        Polynomial(SPACE, {(-1, 0, 0, 0): 1.0})
    with pytest.raises(ValueError):
        PolynomialMap([])
