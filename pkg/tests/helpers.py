"""Shared oracles and corpus walkers for the test suite."""

from __future__ import annotations

from math import comb

import numpy as np

from gsip.cli import corpus
from gsip.core import branch_pop, enumerate_branches
from gsip.momentsos import ConicStatus, build_moment_relaxation, min_order, solve_conic
from gsip.momentsos.hierarchy import HierarchyOptions


def grid_min(poly, lo=-1.0, hi=1.0, step=1e-3):
    """Minimum of a 1- or 2-variable polynomial over a box on a uniform grid."""
    d = poly.space.dim
    lo, hi = np.broadcast_to(lo, d), np.broadcast_to(hi, d)
    axes = [np.linspace(a, b, max(2, int(np.ceil((b - a) / step)) + 1)) for a, b in zip(lo, hi)]
    grids = np.meshgrid(*axes, indexing="ij")
    total = np.zeros_like(grids[0])
    for e, c in poly.items():
        term = np.full_like(grids[0], c)
        for g, k in zip(grids, e):
            if k:
                term = term * g**k
        total += term
    return float(total.min())


def order_bounds(pop, extra=1, max_matrix=HierarchyOptions().max_matrix):
    """Relaxation bounds at consecutive orders starting from the minimal one."""
    k0 = min_order(pop)
    out = []
    for k in range(k0, k0 + extra + 1):
        if k > k0 and comb(pop.nvars + k, k) > max_matrix:
            break
        res = solve_conic(build_moment_relaxation(pop, k))
        if res.status is ConicStatus.INFEASIBLE:
            out.append(np.inf)
        elif res.status is ConicStatus.OPTIMAL:
            out.append(float(build_moment_relaxation(pop, k).c @ (res.y / res.y[0])))
        else:
            out.append(None)
    return out


def corpus_pops(tier="fast"):
    """(label, POP) for every branch problem of the instances in ``tier`` (uncut)."""
    for inst in corpus.tier_instances(tier):
        if inst.tier != tier:
            continue
        prob = inst.problem()
        if prob.s != 1:
            continue
        fam = enumerate_branches(prob.A)
        if len(fam) > 8:
            continue
        for J in fam:
            yield f"{inst.name}:{J}", branch_pop(prob, 0, J)


_REPORTS: dict = {}


def solved(name, **kw):
    """Solve a corpus instance once per test session and options set."""
    from gsip.algo import SolveOptions, solve

    key = (name, tuple(sorted(kw.items())))
    if key not in _REPORTS:
        _REPORTS[key] = solve(corpus.get(name).problem(), SolveOptions(**kw))
    return _REPORTS[key]
