"""Evaluation of the value function ``v(x) = min { g(x,u) : Au >= b(x) }``."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from math import comb

import numpy as np
from scipy.optimize import linprog, minimize

from ..numlin import nullspace, numeric_rank
from ..momentsos import HierarchyOptions, PopInstance, solve_pop
from ..poly import Polynomial, VariableSpace
from .problem import GsipProblem

log = logging.getLogger(__name__)

DEFAULT_BALL = 1e4
MEMBERSHIP_TOL = 1e-8


class VfStatus(str, Enum):
    FINITE = "finite"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL = "numerical"


@dataclass
class ValueResult:
    status: VfStatus
    v: float
    u: np.ndarray | None = None
    lower: float = -np.inf
    certified: bool = False
    ball_active: bool = False
    minimizers: list[np.ndarray] = field(default_factory=list)
    method: str = ""

    @property
    def feasible(self) -> bool:
        return self.status is VfStatus.INFEASIBLE or (self.status is VfStatus.FINITE and self.v >= 0)


def polyhedron_feasible(A: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """A point of ``{u : Au >= b}`` or None when it is empty."""
    p = A.shape[1]
    res = linprog(np.zeros(p), A_ub=-A, b_ub=-b, bounds=[(None, None)] * p, method="highs")
    if res.status == 2:
        return None
    if res.status != 0:
        raise RuntimeError(f"LP feasibility check failed: {res.message}")
    return res.x


def alternatives_feasible(A: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """A certificate ``y >= 0, A^T y = 0, b^T y = 1`` of emptiness, or None."""
    m = A.shape[0]
    Aeq = np.vstack([A.T, b[None, :]])
    beq = np.concatenate([np.zeros(A.shape[1]), [1.0]])
    res = linprog(np.zeros(m), A_eq=Aeq, b_eq=beq, bounds=[(0, None)] * m, method="highs")
    if res.status == 2:
        return None
    if res.status != 0:
        raise RuntimeError(f"LP certificate check failed: {res.message}")
    return res.x


def alternative_rays(A: np.ndarray, max_subsets: int = 20000, tol: float = 1e-10) -> list[np.ndarray] | None:
    """Extreme rays of the cone ``{y >= 0 : A^T y = 0}``, normalized to unit sum.

    ``{Au >= b}`` is empty exactly when ``b^T r > 0`` for one of these rays.
    Returns None when the support enumeration would exceed ``max_subsets``.
    """
    m, p = A.shape
    r = numeric_rank(A)
    sizes = range(1, min(m, r + 1) + 1)
    if sum(comb(m, k) for k in sizes) > max_subsets:
        return None
    rays: list[np.ndarray] = []
    for k in sizes:
        for S in combinations(range(m), k):
            N = nullspace(A[list(S)].T)
            if N.shape[1] != 1:
                continue
            v = N[:, 0]
            if np.all(v < -tol):
                v = -v
            if not np.all(v > tol):
                continue
            y = np.zeros(m)
            y[list(S)] = v / v.sum()
            if not any(np.allclose(y, q, atol=1e-9) for q in rays):
                rays.append(y)
    return rays


def polyhedron_bounded(A: np.ndarray, b: np.ndarray) -> bool:
    """Whether a nonempty ``{u : Au >= b}`` is bounded (no nonzero ``d`` with ``Ad >= 0``)."""
    p = A.shape[1]
    for k in range(p):
        for sgn in (1.0, -1.0):
            c = np.zeros(p)
            c[k] = -sgn
            res = linprog(c, A_ub=-A, b_ub=np.zeros(A.shape[0]), bounds=[(-1, 1)] * p, method="highs")
            if res.status == 0 and -res.fun > 1e-9:
                return False
    return True


def _local_polish(gu: Polynomial, A, bx, u0, radius=None) -> tuple[np.ndarray, float]:
    grad = gu.gradient()
    cons = [{"type": "ineq", "fun": lambda u: A @ u - bx, "jac": lambda u: A}]
    if radius is not None:
        cons.append({"type": "ineq", "fun": lambda u: radius**2 - u @ u, "jac": lambda u: -2 * u})
    try:
        res = minimize(gu.eval, u0, jac=lambda u: grad(u), constraints=cons, method="SLSQP",
                       options={"ftol": 1e-14, "maxiter": 200})
        u = np.asarray(res.x)
    except (ValueError, np.linalg.LinAlgError):
        return u0, gu.eval(u0)
    if np.min(A @ u - bx, initial=np.inf) < -MEMBERSHIP_TOL or not np.all(np.isfinite(u)):
        return u0, gu.eval(u0)
    val = gu.eval(u)
    if val <= gu.eval(u0):
        return u, val
    return u0, gu.eval(u0)


def _refine_active(gu: Polynomial, A, bx, u, tol: float = 1e-5, steps: int = 20) -> np.ndarray:
    """Newton steps on the stationarity system with the nearly active rows held as equalities."""
    act = np.flatnonzero(A @ u - bx <= tol)
    grad = gu.gradient()
    H = [[h for h in row] for row in gu.hessian("u")]
    p, k = len(u), len(act)
    Aa, ba = A[act], bx[act]
    z = np.concatenate([u, np.zeros(k)])
    for _ in range(steps):
        uu = z[:p]
        F = np.concatenate([grad(uu) - Aa.T @ z[p:], Aa @ uu - ba])
        if np.max(np.abs(F), initial=0.0) <= 1e-13:
            break
        Hm = np.array([[h.eval(uu) for h in row] for row in H])
        K = np.block([[Hm, -Aa.T], [Aa, np.zeros((k, k))]])
        try:
            z = z - np.linalg.lstsq(K, F, rcond=None)[0]
        except np.linalg.LinAlgError:
            return u
    u2 = z[:p]
    if not np.all(np.isfinite(u2)) or np.min(A @ u2 - bx, initial=np.inf) < -MEMBERSHIP_TOL:
        return u
    if np.linalg.norm(u2 - u) > 1e-3 * max(1.0, np.linalg.norm(u)) or gu.eval(u2) > gu.eval(u) + 1e-8 * max(1.0, abs(gu.eval(u))):
        return u
    return u2


def _project_into(A, bx, u):
    """Nudge ``u`` into ``{Au >= b}`` by a least-change LP step when slightly outside."""
    if np.min(A @ u - bx, initial=np.inf) >= -MEMBERSHIP_TOL:
        return u
    p = A.shape[1]
    # min ||d||_1 s.t. A(u + d) >= b
    c = np.ones(2 * p)
    Aub = -np.hstack([A, -A])
    bub = -(bx - A @ u)
    res = linprog(c, A_ub=Aub, b_ub=bub, bounds=[(0, None)] * (2 * p), method="highs")
    if res.status != 0:
        return u
    return u + res.x[:p] - res.x[p:]


def value_function(problem: GsipProblem, i: int, x, options: HierarchyOptions | None = None,
                   ball_radius: float | None = None, g: Polynomial | None = None) -> ValueResult:
    """``min_u g_i(x,u)`` over ``U(x)``; ``+inf`` when ``U(x)`` is empty."""
    x = np.asarray(x, float).ravel()
    g = problem.g[i] if g is None else g
    A = problem.A
    bx = problem.b_values(x)
    if polyhedron_feasible(A, bx) is None:
        return ValueResult(VfStatus.INFEASIBLE, np.inf, lower=np.inf, certified=True, method="lp")
    gu = g.substitute_values({"x": x})
    uspace: VariableSpace = gu.space
    p = problem.p
    R = ball_radius or DEFAULT_BALL

    if gu.degree <= 1:
        c = np.array([gu.coefficient(tuple(int(k == j) for k in range(p))) for j in range(p)])
        c0 = gu.constant_term()
        res = linprog(c, A_ub=-A, b_ub=-bx, bounds=[(None, None)] * p, method="highs")
        if res.status == 0:
            u = _project_into(A, bx, np.asarray(res.x))
            v = float(gu.eval(u))
            return ValueResult(VfStatus.FINITE, v, u, lower=float(res.fun + c0), certified=True,
                               minimizers=[u], method="lp")
        if res.status == 3:
            boxed = linprog(c, A_ub=-A, b_ub=-bx, bounds=[(-R, R)] * p, method="highs")
            u = np.asarray(boxed.x) if boxed.status == 0 else None
            return ValueResult(VfStatus.UNBOUNDED, -np.inf, u, lower=-np.inf, certified=True,
                               ball_active=True, method="lp")
        return ValueResult(VfStatus.NUMERICAL, np.nan, method="lp")

    bounded = polyhedron_bounded(A, bx)
    rows = []
    for j in range(problem.m):
        row = Polynomial.constant(uspace, -bx[j])
        for k in range(p):
            if A[j, k] != 0.0:
                row = row + uspace.var("u", k).scale(A[j, k])
        rows.append(row)
    if not bounded:
        ball = Polynomial.constant(uspace, 1.0)
        for k in range(p):
            ball = ball - (uspace.var("u", k) ** 2).scale(1.0 / R**2)
        rows.append(ball)
    pop = PopInstance(gu, rows, (), name=f"{problem.name}:v{i + 1}")
    sol = solve_pop(pop, options=options)
    if sol.infeasible:
        return ValueResult(VfStatus.INFEASIBLE, np.inf, lower=np.inf, certified=False, method="sdp")
    if not sol.optimal:
        # fall back to local search from a feasible start
        u0 = polyhedron_feasible(A, bx)
        u, v = _local_polish(gu, A, bx, u0, None if bounded else R)
        return ValueResult(VfStatus.NUMERICAL, v, u, method="local")

    starts = list(sol.minimizers) or ([sol.estimate] if sol.estimate is not None else [])
    cands = []
    for u0 in starts:
        u0 = _project_into(A, bx, np.asarray(u0, float))
        u, v = _local_polish(gu, A, bx, u0, None if bounded else R)
        u = _refine_active(gu, A, bx, u)
        cands.append((float(gu.eval(u)), tuple(u), u))
    if not cands:
        u0 = polyhedron_feasible(A, bx)
        u, v = _local_polish(gu, A, bx, u0, None if bounded else R)
        cands.append((v, tuple(u), u))
    cands.sort(key=lambda t: (t[0], t[1]))
    v, _, u = cands[0]
    certified = sol.flat or v - sol.bound <= 1e-6 * max(1.0, abs(v))
    ball_active = (not bounded) and float(np.linalg.norm(u)) >= 0.99 * R
    status = VfStatus.FINITE
    if ball_active and v < 0:
        status = VfStatus.UNBOUNDED
        v = -np.inf
    return ValueResult(status, float(v), u, lower=float(sol.bound), certified=certified,
                       ball_active=ball_active, minimizers=[c[2] for c in cands], method="sdp")
