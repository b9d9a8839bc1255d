"""Feasible extensions, initial cut sets and convexity classification."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from ..numlin import numeric_rank, sym_eig
from ..poly import Polynomial, PolynomialMap
from .problem import Convexity, GsipProblem, Structure
from .reform import enumerate_branches
from .valuefn import MEMBERSHIP_TOL, polyhedron_feasible


class ExtensionUnavailable(RuntimeError):
    pass


@dataclass
class CutSet:
    cuts: list[PolynomialMap] = field(default_factory=list)
    heuristic: bool = False
    source: str = "none"

    def __len__(self) -> int:
        return len(self.cuts)

    def __iter__(self):
        return iter(self.cuts)


def feasible_extension(problem: GsipProblem, x_hat, u_hat) -> PolynomialMap:
    """A polynomial map ``q`` with ``q(x_hat) = u_hat`` and ``q(x) in U(x)``."""
    x_hat = np.asarray(x_hat, float).ravel()
    u_hat = np.asarray(u_hat, float).ravel()
    if problem.extension_hook is not None:
        return problem.extension_hook(problem, x_hat, u_hat)
    xs = problem.xspace
    if problem.structure is Structure.BOX:
        comps = []
        for k in range(problem.p):
            lo, hi = problem.lower[k], problem.upper[k]
            lv, wv = lo.eval(x_hat), hi.eval(x_hat)
            den = wv - lv
            alpha = 0.0 if abs(den) <= 1e-12 else (wv - u_hat[k]) / den
            comps.append(lo.scale(alpha) + hi.scale(1.0 - alpha))
        return PolynomialMap(comps)
    if problem.structure is Structure.SIMPLEX:
        lo, w = problem.lower, problem.simplex_upper
        lsum = Polynomial.constant(xs, 0.0)
        for comp in lo:
            lsum = lsum + comp
        slack = w - lsum
        den = slack.eval(x_hat)
        comps = []
        for k in range(problem.p):
            beta = 0.0 if abs(den) <= 1e-12 else (u_hat[k] - lo[k].eval(x_hat)) / den
            comps.append(lo[k] + slack.scale(beta))
        return PolynomialMap(comps)
    if problem.is_sip:
        return PolynomialMap.constant(xs, u_hat)
    if "homothety" in problem.options:
        return homothetic_extension(problem, x_hat, u_hat)
    raise ExtensionUnavailable(
        f"{problem.name}: no feasible extension for a generic U(x); supply an extension hook")


def homothetic_extension(problem: GsipProblem, x_hat, u_hat) -> PolynomialMap:
    """Extension for ``U(x) = c(x) + t(x) * P`` with a fixed polytope ``P``.

    ``options["homothety"]`` names the x-indices of the center ``c`` and of the
    scale ``t``; ``q(x) = c(x) + t(x) * (u_hat - c(x_hat)) / t(x_hat)`` stays in
    ``U(x)`` whenever ``t(x) >= 0``.
    """
    spec = problem.options["homothety"]
    x = problem.xspace.vars("x")
    center = [x[k] for k in spec["center"]]
    scale = x[spec["scale"]]
    t_hat = float(scale.eval(x_hat))
    if t_hat <= 1e-12:
        raise ExtensionUnavailable(f"{problem.name}: homothety scale vanishes at the iterate")
    z = (np.asarray(u_hat, float) - np.array([c.eval(x_hat) for c in center])) / t_hat
    return PolynomialMap([center[k] + scale.scale(float(z[k])) for k in range(problem.p)])


def box_vertices(problem: GsipProblem) -> list[PolynomialMap]:
    bounds = [(problem.lower[k], problem.upper[k]) for k in range(problem.p)]
    return [PolynomialMap(list(choice)) for choice in product(*bounds)]


def simplex_vertices(problem: GsipProblem) -> list[PolynomialMap]:
    lo = list(problem.lower)
    lsum = Polynomial.constant(problem.xspace, 0.0)
    for comp in lo:
        lsum = lsum + comp
    slack = problem.simplex_upper - lsum
    out = [PolynomialMap(lo)]
    for k in range(problem.p):
        comps = list(lo)
        comps[k] = comps[k] + slack
        out.append(PolynomialMap(comps))
    return out


def sample_host_points(problem: GsipProblem, count: int = 200, box: float = 2.0, tries: int = 20000,
                       seed: int = 0) -> list[np.ndarray]:
    """Rejection samples of ``x in X`` with ``U(x)`` nonempty."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(tries):
        if len(out) >= count:
            break
        x = rng.uniform(-box, box, problem.n)
        if not all(h.eval(x) >= 0 for h in problem.X_ineq):
            continue
        if problem.X_eq:
            continue
        if polyhedron_feasible(problem.A, problem.b_values(x)) is None:
            continue
        out.append(x)
    return out


def basic_solutions(problem: GsipProblem, samples: int = 200, seed: int = 0) -> CutSet:
    """Basic solutions ``A_J^{-1} b_J(x)`` that stay in ``U(x)``."""
    if numeric_rank(problem.A) < problem.p:
        return CutSet([], heuristic=True, source="basic-solutions")
    xs = problem.xspace
    cands = []
    for J in enumerate_branches(problem.A):
        inv = np.linalg.inv(problem.A[list(J.J)])
        comps = []
        for k in range(problem.p):
            c = Polynomial.constant(xs, 0.0)
            for jj, j in enumerate(J.J):
                if inv[k, jj] != 0.0:
                    c = c + problem.b[j].scale(inv[k, jj])
            comps.append(c.chop(1e-12))
        cands.append(PolynomialMap(comps))
    if problem.is_sip:
        bx = problem.b_constant()
        keep = [q for q in cands
                if np.min(problem.A @ q(np.zeros(problem.n)) - bx) >= -MEMBERSHIP_TOL]
        return CutSet(keep, heuristic=False, source="basic-solutions")
    pts = sample_host_points(problem, samples, seed=seed)
    keep = [q for q in cands
            if all(np.min(problem.A @ q(x) - problem.b_values(x)) >= -MEMBERSHIP_TOL for x in pts)]
    return CutSet(keep, heuristic=True, source="basic-solutions")


def initial_cuts(problem: GsipProblem, emptiness_feasible: bool = False) -> CutSet:
    """The starting cut set: user supplied, box or simplex vertices, or sampled basic solutions."""
    if emptiness_feasible:
        return CutSet([], source="emptiness")
    if problem.phi0 is not None:
        return CutSet(list(problem.phi0), source="user")
    if problem.structure is Structure.BOX:
        return CutSet(box_vertices(problem), source="box-vertices")
    if problem.structure is Structure.SIMPLEX:
        return CutSet(simplex_vertices(problem), source="simplex-vertices")
    return basic_solutions(problem)


def vertex_cuts(problem: GsipProblem) -> CutSet:
    """Vertex maps of ``U(x)`` for concave constraints (user vertices take precedence)."""
    if problem.vertices is not None:
        return CutSet(list(problem.vertices), source="user")
    if problem.phi0 is not None:
        return CutSet(list(problem.phi0), source="user")
    if problem.structure is Structure.BOX:
        return CutSet(box_vertices(problem), source="box-vertices")
    if problem.structure is Structure.SIMPLEX:
        return CutSet(simplex_vertices(problem), source="simplex-vertices")
    return basic_solutions(problem)


def linear_in_u(problem: GsipProblem, i: int) -> bool:
    return problem.g[i].degree_in("u") <= 1


def classify_convexity(problem: GsipProblem, i: int) -> Convexity:
    """User annotation first; else the sign of a constant u-Hessian; else unknown."""
    if problem.convexity[i] is not None:
        return problem.convexity[i]
    g = problem.g[i]
    if g.degree_in("u") <= 1:
        return Convexity.CONVEX
    H = g.hessian("u")
    if any(h.degree > 0 for row in H for h in row):
        return Convexity.UNKNOWN
    M = np.array([[h.constant_term() for h in row] for row in H])
    w, _ = sym_eig((M + M.T) / 2)
    scale = max(1.0, float(np.max(np.abs(w))))
    if w[0] >= -1e-12 * scale:
        return Convexity.CONVEX
    if w[-1] <= 1e-12 * scale:
        return Convexity.CONCAVE
    return Convexity.UNKNOWN
