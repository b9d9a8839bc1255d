"""Disjunctive KKT drivers: the emptiness branch, per-branch exchange loops and aggregation."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from itertools import product
from typing import Callable

import numpy as np

from ..core import (BranchIndex, alternative_rays, Convexity, CutSet, ExtensionUnavailable, GsipProblem,
                    alternatives_feasible, classify_convexity, cut_inequalities, emptiness_branch_pop,
                    enumerate_branches, feasible_extension, initial_cuts, kkt_subset, linear_in_u,
                    polyhedron_feasible, value_function, vertex_cuts)
from ..core.reform import host_constraints
from ..momentsos import PopInstance, solve_pop
from ..poly import Polynomial, VariableSpace
from .options import (BranchResult, BranchStatus, EmptinessResult, Mode, SolveOptions, SolveReport,
                      TraceEntry)

log = logging.getLogger(__name__)

TIE_TOL = 1e-6


class ProductTooLarge(ValueError):
    pass


def _tie(a: float, b: float) -> bool:
    return abs(a - b) <= TIE_TOL * max(1.0, abs(a), abs(b))


# ---------------------------------------------------------------------------
# emptiness branch

def solve_emptiness(problem: GsipProblem, options: SolveOptions) -> EmptinessResult:
    """``min f`` over the x in X whose parameter set is empty."""
    t0 = time.perf_counter()
    if problem.is_sip:
        if alternatives_feasible(problem.A, problem.b_constant()) is None:
            return EmptinessResult("infeasible", time=time.perf_counter() - t0)
        ineq, eq = host_constraints(problem, problem.xspace)
        sol = solve_pop(PopInstance(problem.f, ineq, eq, name=f"{problem.name}:host"),
                        options=options.hierarchy())
        if sol.infeasible:
            return EmptinessResult("infeasible", time=time.perf_counter() - t0)
        if not sol.optimal:
            return EmptinessResult("numerical", -np.inf, certified=False, bound=-np.inf,
                                   time=time.perf_counter() - t0)
        return EmptinessResult("optimal", sol.bound if sol.certified else problem.f.eval(sol.point), sol.point,
                               None, sol.certified, sol.bound, time.perf_counter() - t0)

    rays = alternative_rays(problem.A)
    if rays is None:
        return _emptiness_pop(problem, options, t0)
    if not rays:
        # A^T y = 0, y >= 0 forces y = 0, so U(x) is never empty
        return EmptinessResult("infeasible", time=time.perf_counter() - t0)
    return _emptiness_rays(problem, rays, options, t0)


def _emptiness_pop(problem: GsipProblem, options: SolveOptions, t0: float) -> EmptinessResult:
    pop = emptiness_branch_pop(problem)
    sol = solve_pop(pop, options=options.hierarchy())
    dt = time.perf_counter() - t0
    if sol.infeasible:
        return EmptinessResult("infeasible", time=dt)
    if not sol.optimal or sol.point is None:
        return EmptinessResult("numerical", -np.inf, certified=False, bound=-np.inf, time=dt)
    parts = pop.space.split(sol.point)
    x, y = parts["x"], parts["y"]
    # an uncertified point still counts only if U(x) is provably empty there
    if not sol.certified and (polyhedron_feasible(problem.A, problem.b_values(x)) is not None
                         or problem.X_violation(x) > 1e-6):
        return EmptinessResult("inconclusive", np.inf, None, None, False, sol.bound, dt)
    fval = sol.bound if sol.certified else problem.f.eval(x)
    return EmptinessResult("optimal", fval, x, y, sol.certified, sol.bound, dt)


def _emptiness_rays(problem: GsipProblem, rays, options: SolveOptions, t0: float) -> EmptinessResult:
    """Split the emptiness region over the extreme rays r of {y >= 0, A^T y = 0}.

    U(x) is empty iff b(x)^T r > 0 for some r. Each piece is relaxed to its closure
    b(x)^T r >= 0, which gives a valid lower bound; a minimizer strictly inside the
    piece is a genuine emptiness point.
    """
    ineq, eq = host_constraints(problem, problem.xspace)
    lower, best, certified = np.inf, None, True
    for r in rays:
        h = Polynomial.constant(problem.xspace, 0.0)
        for j in np.flatnonzero(r):
            h = h + problem.b[j].scale(float(r[j]))
        h = h.chop(1e-14)
        if h.degree == 0:
            if h.constant_term() <= 0:
                continue
        sol = solve_pop(PopInstance(problem.f, ineq + [h], eq, name=f"{problem.name}:emptiness"),
                        options=options.hierarchy())
        if sol.infeasible:
            continue
        if not sol.optimal or sol.point is None:
            lower, certified = -np.inf, False
            continue
        lower = min(lower, sol.bound)
        x = sol.point
        slack = h.eval(x)
        if slack <= 1e-7 or problem.X_violation(x) > 1e-6:
            continue
        if polyhedron_feasible(problem.A, problem.b_values(x)) is not None:
            continue
        fval = sol.bound if sol.certified else float(problem.f.eval(x))
        if best is None or fval < best[0]:
            best = (fval, x, r / slack, sol.certified)
    dt = time.perf_counter() - t0
    if best is None and lower == np.inf:
        return EmptinessResult("infeasible", time=dt)
    if best is not None and best[0] <= lower + 1e-6 * max(1.0, abs(lower)):
        return EmptinessResult("optimal", best[0], best[1], best[2], certified and best[3], lower, dt)
    # the infimum sits on the boundary of the emptiness region (or is not resolved): bound only
    status = "boundary" if certified else "numerical"
    return EmptinessResult(status, np.inf, None, None, False, lower, dt)


# ---------------------------------------------------------------------------
# exchange loop shared by every mode

def _exchange(problem: GsipProblem, J: tuple, space: VariableSpace,
              build: Callable[[dict[int, list]], PopInstance | None], blocks: dict[int, str],
              check: list[int], cuts: dict[int, list], options: SolveOptions) -> BranchResult:
    t0 = time.perf_counter()
    trace: list[TraceEntry] = []
    res = BranchResult(J, BranchStatus.NUMERICAL)
    for k in range(options.max_inner_iter + 1):
        pop = build(cuts)
        if pop is None:
            res.status = BranchStatus.INFEASIBLE
            break
        sol = solve_pop(pop, options=options.hierarchy())
        res.order = sol.order
        if sol.infeasible:
            res.status = BranchStatus.INFEASIBLE
            res.iterations = k
            break
        if not sol.optimal or sol.point is None:
            res.status = BranchStatus.NUMERICAL
            res.iterations = k
            res.message = f"relaxation status {sol.status.value} at order {sol.order}"
            break
        z = sol.point
        parts = space.split(z)
        x = parts["x"]
        vfs = {i: value_function(problem, i, x, options.value_hierarchy(), options.ball_radius)
               for i in check}
        vmin = min(vf.v for vf in vfs.values())
        # the feasible sets shrink as cuts are added, so an earlier bound stays valid
        bound = max(float(sol.bound), trace[-1].bound) if trace else float(sol.bound)
        trace.append(TraceEntry(bound, float(vmin), [float(t) for t in x], sol.flat))
        res.iterations = k
        res.x_J = x
        res.u_J = {i: parts[b] for i, b in blocks.items()}
        res.minimizers = [space.split(m)["x"] for m in sol.minimizers]
        res.v = float(vmin)
        violated = [i for i in check if vfs[i].v < -options.v_tol]
        if not violated:
            res.status = BranchStatus.CONVERGED
            res.f_J = float(sol.bound) if sol.certified else float(problem.f.eval(x))
            res.certified = sol.certified and all(vf.certified for vf in vfs.values())
            if problem.X_violation(x) > 1e-5:
                res.certified = False
                res.message = "host-set violation at the extracted point"
            break
        if k == options.max_inner_iter:
            res.status = BranchStatus.MAX_ITER
            res.certified = False
            break
        stop = None
        for i in violated:
            vf = vfs[i]
            if vf.u is None:
                stop = BranchStatus.UNBOUNDED_VF
                break
            try:
                q = feasible_extension(problem, x, vf.u)
            except ExtensionUnavailable as exc:
                stop = BranchStatus.EXTENSION_MISSING
                res.message = str(exc)
                break
            cuts.setdefault(i, []).append(q)
        if stop is not None:
            res.status = stop
            res.certified = False
            break
    res.trace = trace
    res.cuts = {i: CutSet(list(c), source="exchange") for i, c in cuts.items()}
    res.time = time.perf_counter() - t0
    return res


# ---------------------------------------------------------------------------
# disjunctive KKT branches

def _rename(g: Polynomial, n: int, p: int, block: str, space: VariableSpace) -> Polynomial:
    if block == "u":
        return g.embed(space)
    local = VariableSpace([("x", n), (block, p)])
    return Polynomial(local, g.terms).embed(space)


def _kkt_space(problem: GsipProblem, kkt: list[int]) -> tuple[VariableSpace, dict[int, str]]:
    if len(kkt) == 1:
        return problem.xuspace, {kkt[0]: "u"}
    blocks = {i: f"u{i + 1}" for i in kkt}
    return VariableSpace([("x", problem.n)] + [(blocks[i], problem.p) for i in kkt]), blocks


def branch_builder(problem: GsipProblem, branch: dict[int, BranchIndex], vertex: dict[int, CutSet]):
    """Closure building the branch POP for the KKT indices in ``branch`` plus vertex cuts."""
    kkt = sorted(branch)
    space, blocks = _kkt_space(problem, kkt)
    ineq0, eq0 = host_constraints(problem, space)
    killed = False
    for i in kkt:
        g = _rename(problem.g[i], problem.n, problem.p, blocks[i], space)
        system = kkt_subset(problem, i, branch[i], g=g, block=blocks[i])
        killed = killed or system.killed
        ineq0 += system.inequalities
        eq0 += system.equalities
        ineq0.append(g)
    for i, cs in vertex.items():
        ineq0 += cut_inequalities(problem, i, cs.cuts, space)
    name = f"{problem.name}:J" + "".join(str(branch[i]) for i in kkt)
    objective = problem.f.embed(space)

    def build(cuts):
        if killed:
            return None
        ineq = list(ineq0)
        for i, qs in cuts.items():
            ineq += cut_inequalities(problem, i, qs, space)
        return PopInstance(objective, ineq, eq0, name=name)

    return space, blocks, build


def inner_loop(problem: GsipProblem, i: int, J: BranchIndex, phi0=(), options: SolveOptions | None = None
               ) -> BranchResult:
    """Exchange loop on the branch problem of constraint ``i`` and row subset ``J``."""
    options = options or SolveOptions()
    space, blocks, build = branch_builder(problem, {i: J}, {})
    cuts = {i: list(phi0.cuts if isinstance(phi0, CutSet) else phi0)}
    return _exchange(problem, (J,), space, build, blocks, [i], cuts, options)


def _run_all(tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(t) for t in tasks]
        return [f.result() for f in futures]


def aggregate(problem: GsipProblem, report: SolveReport, options: SolveOptions) -> SolveReport:
    """Step 3: best value over the emptiness branch and the converged branches, with certification."""
    cands = []
    em = report.emptiness
    if em is not None and em.status == "optimal" and em.x_bar is not None:
        cands.append(("emptiness", em.f_bar, em.x_bar, {}, em.certified))
    for b in report.branches:
        if b.converged and b.x_J is not None:
            cands.append((b.label, b.f_J, b.x_J, b.u_J, b.certified))
    if not cands:
        all_infeasible = all(b.status is BranchStatus.INFEASIBLE for b in report.branches) and (
            em is None or em.status == "infeasible")
        report.status = "infeasible" if all_infeasible else "numerical"
        report.f_star = np.inf if all_infeasible else np.nan
        report.certified = all_infeasible
        return report
    best = min(c[1] for c in cands)
    winner = next(c for c in cands if _tie(c[1], best) or c[1] <= best)
    report.winner, report.f_star, report.x_star, report.u_star = winner[0], float(winner[1]), winner[2], winner[3]
    fstar = report.f_star

    def covered(bound):
        return bound >= fstar - TIE_TOL * max(1.0, abs(fstar))

    ok = winner[4]
    if em is not None and em.status != "infeasible" and not (em.status == "optimal" and em.certified):
        ok = ok and covered(em.bound)
    for b in report.branches:
        if b.status is BranchStatus.INFEASIBLE:
            continue
        if b.converged and b.certified:
            continue
        ok = ok and covered(b.bound)
    report.certified = bool(ok)
    report.status = "ok"
    return report


def _feasibility(problem: GsipProblem, x, options: SolveOptions) -> float:
    vals = [value_function(problem, i, x, options.value_hierarchy(), options.ball_radius).v
            for i in range(problem.s)]
    return float(min(vals))


def _cut_set(problem: GsipProblem, emptiness_feasible: bool, options: SolveOptions) -> CutSet:
    if options.cut_policy == "none":
        return CutSet([], source="none")
    if options.cut_policy == "vertices":
        return vertex_cuts(problem)
    return initial_cuts(problem, emptiness_feasible)


def solve_gsip(problem: GsipProblem, options: SolveOptions | None = None) -> SolveReport:
    """Algorithm for a single robust constraint: emptiness branch, branch loops, aggregation."""
    options = options or SolveOptions()
    if problem.s != 1:
        raise ValueError("solve_gsip handles one robust constraint; use solve_gsip_multi")
    if options.mode is not Mode.KKT:
        from .modes import solve_fe
        return solve_fe(problem, options)
    t0 = time.perf_counter()
    em = solve_emptiness(problem, options)
    phi0 = _cut_set(problem, em.status == "optimal", options)
    branches = enumerate_branches(problem.A)
    tasks = [lambda J=J: inner_loop(problem, 0, J, phi0, options) for J in branches]
    results = _run_all(tasks, options.jobs)
    report = SolveReport(problem.name, options.mode, em, results, np.nan, None, n_branches=len(branches),
                         cut_source=phi0.source, heuristic_cuts=phi0.heuristic)
    aggregate(problem, report, options)
    if report.x_star is not None:
        report.feasibility = _feasibility(problem, report.x_star, options)
        if options.local_check:
            from .verify import verify_local_optimality
            report.local = verify_local_optimality(problem, report)
    report.time = time.perf_counter() - t0
    return report


def split_indices(problem: GsipProblem) -> tuple[list[int], list[int]]:
    """KKT indices (convex or unknown in u) and vertex-cut indices (concave or linear in u)."""
    kkt, vert = [], []
    vertices_known = (problem.vertices is not None or problem.phi0 is not None
                      or problem.structure.value in ("box", "simplex") or problem.is_sip)
    for i in range(problem.s):
        c = classify_convexity(problem, i)
        if vertices_known and (c is Convexity.CONCAVE or (linear_in_u(problem, i)
                                                           and problem.convexity[i] is None)):
            vert.append(i)
        else:
            kkt.append(i)
    return kkt, vert


def solve_gsip_multi(problem: GsipProblem, options: SolveOptions | None = None) -> SolveReport:
    """Multiple robust constraints: KKT branching over convex/unknown indices, vertex cuts for the rest."""
    options = options or SolveOptions()
    if problem.s == 1:
        return solve_gsip(problem, options)
    t0 = time.perf_counter()
    kkt, vert = split_indices(problem)
    em = solve_emptiness(problem, options)
    vcuts = vertex_cuts(problem) if vert else CutSet([])
    vertex = {i: vcuts for i in vert}
    notes = [f"kkt indices {[i + 1 for i in kkt]}, vertex-cut indices {[i + 1 for i in vert]}"]
    if not kkt:
        space = problem.xspace
        ineq, eq = host_constraints(problem, space)
        for i in vert:
            ineq += cut_inequalities(problem, i, vcuts.cuts, space)
        pop = PopInstance(problem.f, ineq, eq, name=f"{problem.name}:vertices")
        res = _exchange(problem, (), space, lambda cuts: pop.with_constraints(
            [h for i, qs in cuts.items() for h in cut_inequalities(problem, i, qs, space)]),
            {}, list(range(problem.s)), {}, options)
        results = [res]
        nb = 1
    else:
        fam = enumerate_branches(problem.A)
        total = len(fam) ** len(kkt)
        if total > options.product_cap:
            raise ProductTooLarge(f"{total} product branches exceed the cap {options.product_cap}")
        combos = [dict(zip(kkt, combo)) for combo in product(fam, repeat=len(kkt))]

        def run(branch):
            space, blocks, build = branch_builder(problem, branch, vertex)
            cuts = {i: [] for i in kkt}
            J = tuple(branch[i] for i in kkt)
            return _exchange(problem, J, space, build, blocks, list(range(problem.s)), cuts, options)

        results = _run_all([lambda b=b: run(b) for b in combos], options.jobs)
        nb = total
    report = SolveReport(problem.name, options.mode, em, results, np.nan, None, n_branches=nb,
                         cut_source=vcuts.source if vert else "none", heuristic_cuts=vcuts.heuristic,
                         notes=notes)
    aggregate(problem, report, options)
    if report.x_star is not None:
        report.feasibility = _feasibility(problem, report.x_star, options)
    report.time = time.perf_counter() - t0
    return report


def solve(problem: GsipProblem, options: SolveOptions | None = None) -> SolveReport:
    """Dispatch on the number of robust constraints and the mode."""
    options = options or SolveOptions()
    # a problem may carry its own compactifying ball when X is unbounded
    if options.ball_radius is None and problem.options.get("ball_radius"):
        options = replace(options, ball_radius=float(problem.options["ball_radius"]))
    if problem.s == 1 or options.mode is not Mode.KKT:
        return solve_gsip(problem, options)
    return solve_gsip_multi(problem, options)
