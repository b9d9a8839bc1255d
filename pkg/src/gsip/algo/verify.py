"""Feasibility and local-optimality checks for computed solutions."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from ..core import GsipProblem, value_function
from ..momentsos import HierarchyOptions
from .options import BranchStatus, LocalVerdict, SolveReport

ACTIVE_TOL = 1e-6


def verify_feasibility(problem: GsipProblem, x, options: HierarchyOptions | None = None,
                       ball_radius: float | None = None) -> float:
    """``min_i v_i(x)``; negative means some robust constraint is violated."""
    x = np.asarray(x, float).ravel()
    if x.size != problem.n:
        raise ValueError(f"point has length {x.size}, expected n = {problem.n}")
    return float(min(value_function(problem, i, x, options, ball_radius).v for i in range(problem.s)))


def worst_parameters(problem: GsipProblem, x, options: HierarchyOptions | None = None) -> list:
    x = np.asarray(x, float).ravel()
    return [value_function(problem, i, x, options) for i in range(problem.s)]


def slater_direction(A: np.ndarray) -> bool:
    """Whether some ``u`` has ``Au > 0`` componentwise."""
    m, p = A.shape
    # max t  s.t.  A u >= t e,  -1 <= u <= 1,  t <= 1
    c = np.zeros(p + 1)
    c[-1] = -1.0
    Aub = np.hstack([-A, np.ones((m, 1))])
    res = linprog(c, A_ub=Aub, b_ub=np.zeros(m), bounds=[(-1, 1)] * p + [(None, 1)], method="highs")
    return bool(res.status == 0 and -res.fun > 1e-9)


def active_set(problem: GsipProblem, x, u, tol: float = ACTIVE_TOL) -> list[int]:
    r = problem.A @ np.asarray(u, float) - problem.b_values(x)
    return [j for j in range(problem.m) if abs(r[j]) <= tol]


def verify_local_optimality(problem: GsipProblem, report: SolveReport) -> list[LocalVerdict]:
    """Active-set sufficient conditions for converged single-constraint branches."""
    out = []
    if problem.s != 1:
        return out
    slater = slater_direction(problem.A)
    converged = {b.J[0].J: b for b in report.branches if b.status is BranchStatus.CONVERGED and len(b.J) == 1}
    for b in report.branches:
        if b.status is not BranchStatus.CONVERGED or len(b.J) != 1 or 0 not in b.u_J:
            continue
        J = set(b.J[0].J)
        act = active_set(problem, b.x_J, b.u_J[0])
        verdict = "unknown"
        if J >= set(act):
            verdict = "i"
        else:
            subs = [c for key, c in converged.items() if set(key) <= set(act)]
            if subs and all(b.f_J <= c.f_J + 1e-7 * max(1.0, abs(c.f_J)) for c in subs):
                verdict = "ii"
        out.append(LocalVerdict(b.label, verdict, [j + 1 for j in act], slater))
    return out
