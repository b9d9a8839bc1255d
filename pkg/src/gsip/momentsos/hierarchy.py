"""Moment-SOS hierarchy driver."""

from __future__ import annotations

import logging
from math import comb
from dataclasses import dataclass, field

import numpy as np

from ..poly import Polynomial
from .conic import ConicSettings, ConicStatus, solve_conic
from .extract import DEFAULT_FLAT_TOL, ExtractionError, extract_minimizers, flat_order, merge_points
from .relaxation import PopInstance, build_moment_relaxation, flat_gap, min_order

log = logging.getLogger(__name__)

EXTRACT_TOL = 1e-5
DEFAULT_K_MAX = 4


@dataclass
class HierarchyOptions:
    k_max: int = DEFAULT_K_MAX
    flat_tol: float = DEFAULT_FLAT_TOL
    extract_tol: float = EXTRACT_TOL
    ball_radius: float | None = None
    max_moments: int = 40000
    max_matrix: int = 84
    conic: ConicSettings = field(default_factory=ConicSettings)


@dataclass
class MomentSolution:
    status: ConicStatus
    bound: float
    order: int
    y: np.ndarray | None = None
    flat: bool = False
    minimizers: list[np.ndarray] = field(default_factory=list)
    estimate: np.ndarray | None = None
    bounds: list[float] = field(default_factory=list)
    monotone: bool = True
    tight: bool = False
    candidate: np.ndarray | None = None

    @property
    def certified(self) -> bool:
        """Flat truncation, or a verified feasible point attaining the bound."""
        return self.flat or self.tight

    @property
    def optimal(self) -> bool:
        return self.status is ConicStatus.OPTIMAL

    @property
    def infeasible(self) -> bool:
        return self.status is ConicStatus.INFEASIBLE

    @property
    def point(self) -> np.ndarray | None:
        """First extracted minimizer, else a locally refined feasible point, else the first-moment estimate."""
        if self.minimizers:
            return self.minimizers[0]
        if self.candidate is not None:
            return self.candidate
        return self.estimate


def with_ball(pop: PopInstance, radius: float) -> PopInstance:
    space = pop.space
    ball = Polynomial.constant(space, radius**2)
    for i in range(space.dim):
        e = [0] * space.dim
        e[i] = 2
        ball = ball - Polynomial(space, {tuple(e): 1.0})
    return pop.with_constraints(inequalities=[ball])


def polish(pop: PopInstance, z: np.ndarray, maxiter: int = 200) -> np.ndarray:
    """Local SLSQP refinement of an approximate minimizer of ``pop``."""
    from scipy.optimize import minimize

    cons = [{"type": "ineq", "fun": h.eval, "jac": h.gradient()} for h in pop.inequalities if h.degree > 0]
    cons += [{"type": "eq", "fun": h.eval, "jac": h.gradient()} for h in pop.equalities if h.degree > 0]
    grad = pop.objective.gradient()
    try:
        res = minimize(pop.objective.eval, z, jac=grad, constraints=cons, method="SLSQP",
                       options={"maxiter": maxiter, "ftol": 1e-12})
    except (ValueError, np.linalg.LinAlgError):
        return z
    if res.x is None or not np.all(np.isfinite(res.x)):
        return z
    return res.x if pop.violation(res.x) <= pop.violation(z) or pop.violation(res.x) <= 1e-9 else z


def _verified(pop: PopInstance, points, bound: float, tol: float) -> list[np.ndarray]:
    good = []
    for z in points:
        if pop.violation(z) > tol * 1e-2:
            z = polish(pop, z)
        if pop.violation(z) > tol:
            continue
        if pop.objective.eval(z) - bound > tol * max(1.0, abs(bound)):
            continue
        good.append(z)
    return good


def solve_at_order(pop: PopInstance, k: int, options: HierarchyOptions):
    program = build_moment_relaxation(pop, k)
    result = solve_conic(program, options.conic)
    return program, result


def solve_pop(pop: PopInstance, k_start: int | None = None, k_max: int | None = None,
              options: HierarchyOptions | None = None) -> MomentSolution:
    """Run the hierarchy from ``k_start`` until flat truncation holds or ``k_max``."""
    options = options or HierarchyOptions()
    if options.ball_radius is not None:
        pop = with_ball(pop, options.ball_radius)
    k0 = min_order(pop)
    k_start = k0 if k_start is None else max(k_start, k0)
    k_max = max(k_start, options.k_max if k_max is None else k_max)
    d = flat_gap(pop)
    n = pop.nvars
    bounds: list[float] = []
    last: MomentSolution | None = None
    for k in range(k_start, k_max + 1):
        if k > k_start and (comb(n + 2 * k, 2 * k) > options.max_moments
                            or comb(n + k, k) > options.max_matrix):
            log.debug("order %d exceeds the size limits for %d variables", k, n)
            break
        program, res = solve_at_order(pop, k, options)
        if res.status is ConicStatus.INFEASIBLE:
            return MomentSolution(ConicStatus.INFEASIBLE, np.inf, k, bounds=bounds + [np.inf])
        if res.status is ConicStatus.UNBOUNDED:
            last = MomentSolution(ConicStatus.UNBOUNDED, -np.inf, k, bounds=bounds + [-np.inf])
            continue
        if res.status is ConicStatus.NUMERICAL or res.y is None:
            if last is None:
                last = MomentSolution(ConicStatus.NUMERICAL, -np.inf, k, bounds=list(bounds))
            continue
        y = res.y / res.y[0] if res.y[0] > 0 else res.y
        bound = float(program.c @ y)
        bounds.append(bound)
        estimate = y[1:1 + n].copy()
        sol = MomentSolution(ConicStatus.OPTIMAL, bound, k, y, False, [], estimate, list(bounds))
        t = flat_order(y, n, k, d, max(k0, d), options.flat_tol, program.index)
        if t is not None:
            try:
                pts = extract_minimizers(y, n, t, rel_tol=options.flat_tol, index=program.index)
            except ExtractionError as exc:
                log.debug("extraction failed at order %d: %s", k, exc)
                pts = []
            pts = _verified(pop, merge_points(pts), bound, options.extract_tol)
            if pts:
                sol.flat = True
                sol.minimizers = pts
        sol.monotone = all(b2 >= b1 - 1e-6 * max(1.0, abs(b1)) for b1, b2 in zip(bounds, bounds[1:]))
        if not sol.flat:
            cand = polish(pop, estimate)
            if pop.violation(cand) <= options.extract_tol:
                sol.candidate = cand
                if pop.objective.eval(cand) - bound <= options.extract_tol * max(1.0, abs(bound)):
                    sol.tight = True
                    sol.minimizers = [cand]
        last = sol
        if sol.certified:
            return sol
    if last is None:
        return MomentSolution(ConicStatus.NUMERICAL, -np.inf, k_start)
    return last


def solve_pop_simple(pop: PopInstance, **kw) -> MomentSolution:
    return solve_pop(pop, options=HierarchyOptions(**kw))
