import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from gsip.momentsos import (ConicStatus, HierarchyOptions, OrderTooSmall, PopInstance, build_moment_relaxation,
                            check_flat_truncation, extract_minimizers, min_order, moment_matrix, psd_rank,
                            solve_pop, with_ball)
from gsip.poly import Polynomial, VariableSpace

from helpers import corpus_pops, grid_min, order_bounds


def box_pop(objective, extra=()):
    space = objective.space
    z = [space.var(b, i) for b, d in space.blocks for i in range(d)]
    return PopInstance(objective, [1 - zi**2 for zi in z] + list(extra))


@st.composite
def box_polynomials(draw, nvars):
    space = VariableSpace([("x", nvars)])
    deg = draw(st.integers(2, 4))
    terms = draw(st.lists(
        st.tuples(st.floats(-3, 3, allow_nan=False).map(lambda c: round(c, 3)),
                  st.lists(st.integers(0, deg), min_size=nvars, max_size=nvars)),
        min_size=1, max_size=6))
    return Polynomial.from_terms(space, [(c, e) for c, e in terms if sum(e) <= deg])


@pytest.mark.parametrize("nvars", [1, 2])
@given(data=st.data())
@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
def test_hierarchy_matches_grid_oracle_on_boxes(nvars, data):
    f = data.draw(box_polynomials(nvars))
    sol = solve_pop(box_pop(f), options=HierarchyOptions(k_max=6))
    assert sol.optimal
    assert abs(sol.bound - grid_min(f)) <= 1e-3


def test_known_univariate_minimum():
    x = VariableSpace([("x", 1)]).var("x", 0)
    f = x**4 - 3 * x**2 + x
    sol = solve_pop(PopInstance(f, [4 - x**2]))
    assert sol.certified
    # minimizer of x^4 - 3x^2 + x near -1.30084
    assert sol.point[0] == pytest.approx(-1.300839, abs=1e-4)
    assert sol.bound == pytest.approx(f.eval(sol.point), abs=1e-6)


def test_motzkin_like_gap_closes_on_compact_set():
    s = VariableSpace([("x", 2)])
    x, y = s.vars("x")
    f = x**4 * y**2 + x**2 * y**4 - 3 * x**2 * y**2 + 1
    sol = solve_pop(box_pop(f), options=HierarchyOptions(k_max=5))
    assert sol.bound == pytest.approx(0.0, abs=1e-4)


def test_equality_constraints_and_extraction():
    s = VariableSpace([("x", 2)])
    x, y = s.vars("x")
    pop = PopInstance(x + y, [], [x**2 + y**2 - 1])
    sol = solve_pop(pop)
    assert sol.flat
    assert sol.bound == pytest.approx(-np.sqrt(2), abs=1e-6)
    assert np.allclose(sol.point, [-np.sqrt(0.5)] * 2, atol=1e-5)


def test_two_global_minimizers_are_both_extracted():
    x = VariableSpace([("x", 1)]).var("x", 0)
    pop = PopInstance((x**2 - 1) ** 2, [4 - x**2])
    sol = solve_pop(pop)
    assert sol.flat
    pts = sorted(float(p[0]) for p in sol.minimizers)
    assert pts == pytest.approx([-1.0, 1.0], abs=1e-4)


def test_infeasible_pop_is_reported():
    x = VariableSpace([("x", 1)]).var("x", 0)
    sol = solve_pop(PopInstance(x, [x - 2, 1 - x]))
    assert sol.infeasible
    assert sol.bound == np.inf


def test_ball_is_added_as_an_inequality():
    x = VariableSpace([("x", 1)]).var("x", 0)
    pop = with_ball(PopInstance(x), 3.0)
    sol = solve_pop(pop)
    assert sol.bound == pytest.approx(-3.0, abs=1e-6)


def test_min_order_and_order_too_small():
    s = VariableSpace([("x", 2)])
    x, y = s.vars("x")
    pop = PopInstance(x**4 + y, [1 - x**2 * y**4])
    assert min_order(pop) == 3
    with pytest.raises(OrderTooSmall):
        build_moment_relaxation(pop, 2)


def test_moment_matrix_of_a_dirac_is_rank_one_and_extracts_the_atom():
    from gsip.poly import monomial_exponents

    pt = np.array([0.3, -0.7])
    y = np.array([np.prod(pt ** np.array(e)) for e in monomial_exponents(2, 4)])
    M = moment_matrix(y, 2, 2)
    assert psd_rank(M) == 1
    assert check_flat_truncation(y, 2, nvars=2, d=1)
    atoms = extract_minimizers(y, 2, 2)
    assert len(atoms) == 1 and np.allclose(atoms[0], pt, atol=1e-8)


def test_two_atom_measure_extracts_both():
    from gsip.poly import monomial_exponents

    pts = [np.array([1.0, 0.5]), np.array([-0.5, 2.0])]
    exps = monomial_exponents(2, 6)
    y = sum(0.5 * np.array([np.prod(p ** np.array(e)) for e in exps]) for p in pts)
    atoms = extract_minimizers(y, 2, 3)
    found = sorted(tuple(np.round(a, 6)) for a in atoms)
    assert found == sorted(tuple(p) for p in pts)


FAST_POPS = list(corpus_pops("fast"))


@pytest.mark.parametrize("label,pop", FAST_POPS, ids=[p[0] for p in FAST_POPS])
def test_bounds_nondecreasing_in_order(label, pop):
    bounds = [b for b in order_bounds(pop) if b is not None]
    for lo, hi in zip(bounds, bounds[1:]):
        assert hi == np.inf if lo == np.inf else hi >= lo - 1e-7 * max(1.0, abs(lo))


@pytest.mark.parametrize("label,pop", FAST_POPS, ids=[p[0] for p in FAST_POPS])
def test_extracted_minimizers_satisfy_constraints(label, pop):
    sol = solve_pop(pop)
    for z in sol.minimizers:
        assert pop.violation(z) <= 1e-5
