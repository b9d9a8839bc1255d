"""Reformulations of a GSIP into polynomial optimization subproblems.

Covers the row subsets ``J`` with ``rank(A_J) = rank(A)``, the closed-form
multipliers ``lambda_J = (A_J A_J^T)^{-1} A_J grad_u g``, the KKT subset
systems built from them, and the POPs solved by the drivers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ..numlin import RankDeficient, gram_solve, numeric_rank
from ..poly import Polynomial, PolynomialMap, VariableSpace
from ..momentsos import PopInstance
from .problem import GsipProblem

COEFF_CHOP = 1e-12


class DegenerateMatrix(ValueError):
    """``A = 0``: ``U(x)`` is either all of R^p or empty, independent of u."""


@dataclass(frozen=True, order=True)
class BranchIndex:
    J: tuple[int, ...]

    def __str__(self) -> str:
        return "{" + ",".join(str(j + 1) for j in self.J) + "}"

    @property
    def label(self) -> str:
        return str(self)


@dataclass
class Plme:
    branch: BranchIndex
    lam: PolynomialMap


@dataclass
class KktSubsetSystem:
    branch: BranchIndex
    stationarity: list[Polynomial] = field(default_factory=list)
    complementarity: list[Polynomial] = field(default_factory=list)
    sign: list[Polynomial] = field(default_factory=list)
    membership: list[Polynomial] = field(default_factory=list)
    killed: bool = False

    @property
    def equalities(self) -> list[Polynomial]:
        return [h for h in self.stationarity + self.complementarity if not h.is_zero()]

    @property
    def inequalities(self) -> list[Polynomial]:
        # constant sign rows are either vacuous (>= 0) or make the branch empty
        return [h for h in self.sign if h.degree > 0] + self.membership

    def residual(self, z) -> float:
        worst = 0.0
        for h in self.equalities:
            worst = max(worst, abs(h.eval(z)))
        for h in self.sign + self.membership:
            worst = max(worst, -h.eval(z))
        return worst


def enumerate_branches(A, rel_tol: float = 1e-8) -> list[BranchIndex]:
    """All size-``r`` row subsets ``J`` of ``A`` with ``rank(A_J) = r = rank(A)``."""
    A = np.atleast_2d(np.asarray(A, float))
    r = numeric_rank(A, rel_tol)
    if r == 0:
        raise DegenerateMatrix("A = 0: U(x) does not depend on u")
    return [BranchIndex(J) for J in combinations(range(A.shape[0]), r)
            if numeric_rank(A[list(J)], rel_tol) == r]


def _embed_x(problem: GsipProblem, h: Polynomial, space: VariableSpace | None = None) -> Polynomial:
    return h.embed(space or problem.xuspace)


def membership(problem: GsipProblem, space: VariableSpace | None = None, block: str = "u") -> list[Polynomial]:
    """``a_j^T u - b_j(x)`` for every row ``j``."""
    space = space or problem.xuspace
    u = space.vars(block)
    out = []
    for j in range(problem.m):
        row = Polynomial.constant(space, 0.0)
        for k in range(problem.p):
            if problem.A[j, k] != 0.0:
                row = row + u[k].scale(problem.A[j, k])
        out.append(row - problem.b[j].embed(space))
    return out


def plme(problem: GsipProblem, i: int, J: BranchIndex, g: Polynomial | None = None,
         block: str = "u") -> Plme:
    g = problem.g[i] if g is None else g
    try:
        G = gram_solve(problem.A[list(J.J)])
    except RankDeficient as exc:
        raise AssertionError(f"branch {J} is not in the branch family") from exc
    grad = g.gradient(block)
    lam = []
    for row in G:
        comp = Polynomial.constant(g.space, 0.0)
        for k, c in enumerate(row):
            if c != 0.0:
                comp = comp + grad[k].scale(c)
        lam.append(comp.chop(COEFF_CHOP))
    return Plme(J, PolynomialMap(lam))


def kkt_subset(problem: GsipProblem, i: int, J: BranchIndex, g: Polynomial | None = None,
               block: str = "u") -> KktSubsetSystem:
    g = problem.g[i] if g is None else g
    space = g.space
    lam = plme(problem, i, J, g, block).lam
    AJ = problem.A[list(J.J)]
    r = len(J.J)
    grad = g.gradient(block)
    stationarity = []
    if r < problem.p:
        for k in range(problem.p):
            h = grad[k]
            for jj in range(r):
                if AJ[jj, k] != 0.0:
                    h = h - lam[jj].scale(AJ[jj, k])
            stationarity.append(h.chop(COEFF_CHOP))
    rows = membership(problem, space, block)
    complementarity = [(rows[j] * lam[jj]).chop(COEFF_CHOP) for jj, j in enumerate(J.J)]
    sign = list(lam)
    killed = any(h.degree == 0 and h.constant_term() < 0 for h in sign)
    killed = killed or any(h.degree == 0 and abs(h.constant_term()) > COEFF_CHOP for h in stationarity)
    return KktSubsetSystem(J, stationarity, complementarity, sign, rows, killed)


def emptiness_branch_pop(problem: GsipProblem) -> PopInstance:
    """POP over ``(x, y)``: min f s.t. x in X, y >= 0, A^T y = 0, b(x)^T y = 1."""
    space = VariableSpace([("x", problem.n), ("y", problem.m)])
    y = space.vars("y")
    ineq = [h.embed(space) for h in problem.X_ineq] + list(y)
    eq = [h.embed(space) for h in problem.X_eq]
    for k in range(problem.p):
        row = Polynomial.constant(space, 0.0)
        for j in range(problem.m):
            if problem.A[j, k] != 0.0:
                row = row + y[j].scale(problem.A[j, k])
        eq.append(row)
    by = Polynomial.constant(space, -1.0)
    for j in range(problem.m):
        by = by + problem.b[j].embed(space) * y[j]
    eq.append(by)
    return PopInstance(problem.f.embed(space), ineq, eq, name=f"{problem.name}:emptiness")


def normalized(h: Polynomial) -> Polynomial:
    """``h`` scaled so its largest coefficient has magnitude 1."""
    big = max((abs(c) for _, c in h.items()), default=0.0)
    return h if big == 0.0 else h.scale(1.0 / big)


def cut_polynomial(problem: GsipProblem, g: Polynomial, q: PolynomialMap, block: str = "u") -> Polynomial:
    """``g(x, q(x))`` as a polynomial in x."""
    return g.substitute(block, q)


def cut_inequalities(problem: GsipProblem, i: int, cuts, space: VariableSpace | None = None) -> list[Polynomial]:
    space = space or problem.xuspace
    out = []
    for q in cuts:
        h = normalized(cut_polynomial(problem, problem.g[i], q).chop(COEFF_CHOP))
        if h.degree == 0:
            if h.constant_term() >= 0:
                continue
        out.append(h.embed(space))
    return out


def host_constraints(problem: GsipProblem, space: VariableSpace | None = None):
    space = space or problem.xuspace
    return ([h.embed(space) for h in problem.X_ineq], [h.embed(space) for h in problem.X_eq])


def conservative_pop(problem: GsipProblem, i: int, cuts=()) -> PopInstance:
    """min f over (x, u) with x in X, u in U(x), g_i(x,u) >= 0 and the cut inequalities."""
    space = problem.xuspace
    ineq, eq = host_constraints(problem, space)
    ineq += membership(problem, space)
    ineq.append(problem.g[i])
    ineq += cut_inequalities(problem, i, cuts, space)
    return PopInstance(problem.f.embed(space), ineq, eq, name=f"{problem.name}:conservative")


def plain_pop(problem: GsipProblem, i: int, cuts=()) -> PopInstance:
    """min f over x in X with only the cut inequalities."""
    space = problem.xspace
    ineq, eq = host_constraints(problem, space)
    ineq += cut_inequalities(problem, i, cuts, space)
    return PopInstance(problem.f, ineq, eq, name=f"{problem.name}:plain")


def branch_pop(problem: GsipProblem, i: int, J: BranchIndex, cuts=(),
               system: KktSubsetSystem | None = None) -> PopInstance:
    """min f over (x, u) with x in X, u in K_J(x), g_i(x,u) >= 0 and the cut inequalities."""
    space = problem.xuspace
    system = system or kkt_subset(problem, i, J)
    ineq, eq = host_constraints(problem, space)
    ineq += system.inequalities
    eq += system.equalities
    ineq.append(problem.g[i])
    ineq += cut_inequalities(problem, i, cuts, space)
    return PopInstance(problem.f.embed(space), ineq, eq, name=f"{problem.name}:J{J}")


def kkt_multipliers(problem: GsipProblem, i: int, x, u, tol: float = 1e-6) -> np.ndarray | None:
    """Multipliers ``lambda >= 0`` with ``grad_u g_i = A^T lambda`` supported on the rows active
    at ``(x, u)``, found by an LP; None when ``u`` is not a KKT point of ``min g_i`` over ``U(x)``."""
    from scipy.optimize import linprog

    x = np.asarray(x, float).ravel()
    u = np.asarray(u, float).ravel()
    slack = problem.A @ u - problem.b_values(x)
    if np.min(slack, initial=np.inf) < -tol:
        return None
    grad = problem.g[i].gradient("u")(np.concatenate([x, u]))
    active = [j for j in range(problem.m) if slack[j] <= tol]
    if not active:
        return np.zeros(problem.m) if np.max(np.abs(grad)) <= tol else None
    AT = problem.A[active].T
    # min ||A_act^T lam - grad||_1 over lam >= 0
    k, p = len(active), problem.p
    c = np.concatenate([np.zeros(k), np.ones(2 * p)])
    Aeq = np.hstack([AT, -np.eye(p), np.eye(p)])
    res = linprog(c, A_eq=Aeq, b_eq=grad, bounds=[(0, None)] * (k + 2 * p), method="highs")
    if res.status != 0 or res.fun > tol * max(1.0, float(np.max(np.abs(grad)))):
        return None
    lam = np.zeros(problem.m)
    lam[active] = res.x[:k]
    return lam


def kkt_branches(problem: GsipProblem, i: int, x, u, tol: float = 1e-6) -> list[BranchIndex]:
    """The branches ``J`` whose KKT subset system holds at ``(x, u)`` up to ``tol``."""
    z = np.concatenate([np.asarray(x, float).ravel(), np.asarray(u, float).ravel()])
    return [J for J in enumerate_branches(problem.A) if kkt_subset(problem, i, J).residual(z) <= tol]
