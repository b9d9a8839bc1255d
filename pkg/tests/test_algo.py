import numpy as np
import pytest

from gsip.algo import (BranchResult, BranchStatus, EmptinessResult, Mode, ProductTooLarge, SolveOptions,
                       SolveReport, TraceEntry, aggregate, compare_modes, inner_loop, solve, verify_feasibility,
                       verify_local_optimality)
from gsip.cli import corpus
from gsip.core import BranchIndex, Convexity, classify_convexity, enumerate_branches, kkt_subset

from helpers import solved

FAST = [inst.name for inst in corpus.tier_instances("fast")]


@pytest.mark.parametrize("name", FAST)
def test_trace_bounds_are_monotone(name):
    for b in solved(name).branches:
        assert b.monotone(1e-7), (b.label, [t.bound for t in b.trace])


@pytest.mark.parametrize("name", FAST)
def test_converged_branches_are_tight(name):
    prob = corpus.get(name).problem()
    opts = SolveOptions()
    for b in solved(name).branches:
        if not b.converged:
            continue
        assert b.v >= -opts.v_tol
        u = b.u_J[0]
        assert prob.g_at(0, b.x_J, u) >= -1e-6
        if b.certified:
            z = np.concatenate([b.x_J, u])
            assert kkt_subset(prob, 0, b.J[0]).residual(z) <= 1e-6


@pytest.mark.parametrize("name", FAST)
def test_aggregate_picks_the_best_certified_source(name):
    rep = solved(name)
    values = [b.f_J for b in rep.branches if b.converged]
    if rep.emptiness is not None and rep.emptiness.status == "optimal":
        values.append(rep.emptiness.f_bar)
    assert rep.f_star == min(values)
    for b in rep.branches:
        if b.converged and b.certified:
            assert rep.f_star <= b.f_J + 1e-7


@pytest.mark.parametrize("name", FAST)
def test_convex_parameter_constraints_converge_without_cuts(name):
    prob = corpus.get(name).problem()
    if classify_convexity(prob, 0) is not Convexity.CONVEX:
        pytest.skip("not convex in u")
    for b in solved(name).branches:
        if b.converged and b.certified:
            assert b.iterations == 0


def test_inner_loop_on_a_single_branch():
    prob = corpus.get("glibp6").problem()
    J = enumerate_branches(prob.A)[0]
    res = inner_loop(prob, 0, J)
    assert res.status is BranchStatus.CONVERGED and res.iterations == 0
    assert res.f_J == pytest.approx(-0.5, abs=1e-6)
    assert res.x_J == pytest.approx([-0.5], abs=1e-5)
    assert res.u_J[0] == pytest.approx([-1.25], abs=1e-5)


def test_local_verdict_for_the_active_branch():
    prob = corpus.get("glibp6").problem()
    rep = solved("glibp6")
    verdicts = {v.branch: v for v in verify_local_optimality(prob, rep)}
    assert verdicts["{1}"].verdict == "i"
    assert verdicts["{1}"].active_set == [1]


def test_verify_feasibility_signs():
    w2 = corpus.get("watson2").problem()
    assert abs(verify_feasibility(w2, [-0.75, -0.5 * (np.sqrt(5) - 1)])) <= 1e-6
    assert verify_feasibility(w2, [0.0, 0.0]) < 0
    g3 = corpus.get("glibp3").problem()
    assert verify_feasibility(g3, [-3.0, -4.0]) == np.inf
    with pytest.raises(ValueError):
        verify_feasibility(g3, [0.0])


def test_modes_are_nested_at_the_first_iteration():
    prob = corpus.get("wangguo").problem()
    table = compare_modes(prob, SolveOptions(cut_policy="none", local_check=False))
    assert [r.mode for r in table.rows] == [m.value for m in Mode]
    first = {}
    for mode in Mode:
        rep = solve(prob, SolveOptions(mode=mode, cut_policy="none", local_check=False))
        bounds = [b.trace[0].bound for b in rep.branches if b.trace]
        first[mode] = min(bounds)
    assert first[Mode.FE_PLAIN] <= first[Mode.FE_CONSERVATIVE] + 1e-6
    assert first[Mode.FE_CONSERVATIVE] <= first[Mode.KKT] + 1e-6
    assert all(abs(r.f_star - table.rows[0].f_star) <= 1e-4 for r in table.rows)


def test_parallel_branches_give_identical_reports():
    a = solve(corpus.get("glibp16").problem(), SolveOptions(jobs=1))
    b = solve(corpus.get("glibp16").problem(), SolveOptions(jobs=3))
    assert a.f_star == b.f_star and a.winner == b.winner and a.iterations == b.iterations
    assert [r.label for r in a.branches] == [r.label for r in b.branches]


def _branch(J, status, f, bound=None, certified=True, x=(0.0,)):
    res = BranchResult((BranchIndex(J),), status, f, np.array(x), {0: np.zeros(1)}, certified=certified)
    res.trace = [TraceEntry(f if bound is None else bound, 0.0)]
    return res


def test_aggregate_ties_go_to_the_first_branch():
    prob = corpus.get("glibp6").problem()
    rep = SolveReport("t", Mode.KKT, EmptinessResult("infeasible"),
                      [_branch((0,), BranchStatus.CONVERGED, -1.0), _branch((1,), BranchStatus.CONVERGED, -1.0)],
                      np.nan, None)
    aggregate(prob, rep, SolveOptions())
    assert rep.winner == "{1}" and rep.certified


def test_max_iter_branch_keeps_certification_only_when_dominated():
    prob = corpus.get("glibp6").problem()
    good = _branch((0,), BranchStatus.CONVERGED, -1.0)
    above = _branch((1,), BranchStatus.MAX_ITER, np.inf, bound=-0.5, certified=False)
    below = _branch((1,), BranchStatus.MAX_ITER, np.inf, bound=-2.0, certified=False)
    rep = aggregate(prob, SolveReport("t", Mode.KKT, None, [good, above], np.nan, None), SolveOptions())
    assert rep.certified and rep.f_star == -1.0
    rep = aggregate(prob, SolveReport("t", Mode.KKT, None, [good, below], np.nan, None), SolveOptions())
    assert not rep.certified and rep.f_star == -1.0


def test_all_infeasible_branches_give_an_infeasible_report():
    prob = corpus.get("glibp6").problem()
    rep = SolveReport("t", Mode.KKT, EmptinessResult("infeasible"),
                      [_branch((0,), BranchStatus.INFEASIBLE, np.inf)], np.nan, None)
    aggregate(prob, rep, SolveOptions())
    assert rep.status == "infeasible" and rep.f_star == np.inf


def test_product_guard():
    with pytest.raises(ProductTooLarge):
        solve(corpus.get("design_centering").problem(), SolveOptions(product_cap=4))


def test_options_validation():
    with pytest.raises(ValueError):
        SolveOptions(v_tol=0.0)
    with pytest.raises(ValueError):
        SolveOptions(max_inner_iter=0)
    with pytest.raises(ValueError):
        SolveOptions(cut_policy="random")
    assert SolveOptions(mode="kkt").mode is Mode.KKT
