"""Conic solver boundary.

A :class:`~gsip.momentsos.relaxation.ConicProgram` goes in, a status plus the
moment vector comes out. The default backend is Clarabel (interior point,
PSD triangle cones); any callable with the same signature can be swapped in
through :func:`set_backend` or the ``GSIP_CONIC_BACKEND`` environment variable
(``module:function``).
"""

from __future__ import annotations

import importlib
import logging
import os
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy import sparse

from .relaxation import ConicProgram

log = logging.getLogger(__name__)


class ConicStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL = "numerical-failure"


@dataclass
class ConicResult:
    status: ConicStatus
    y: np.ndarray | None
    primal_objective: float
    dual_objective: float
    iterations: int = 0
    solve_time: float = 0.0
    raw_status: str = ""

    @property
    def bound(self) -> float:
        return self.dual_objective


@dataclass
class ConicSettings:
    tol_gap_abs: float = 1e-9
    tol_gap_rel: float = 1e-9
    tol_feas: float = 1e-9
    max_iter: int = 400
    verbose: bool = False


def _svec_scale(n: int) -> np.ndarray:
    rows, cols = np.tril_indices(n)
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    return np.where(rows == cols, 1.0, np.sqrt(2.0))


def clarabel_backend(program: ConicProgram, settings: ConicSettings) -> ConicResult:
    import clarabel

    L = program.nmoments
    A_parts = [program.E]
    b_parts = [program.e]
    cones = [clarabel.ZeroConeT(program.E.shape[0])]
    for blk in program.blocks:
        scale = sparse.diags(_svec_scale(blk.size))
        A_parts.append(-(scale @ blk.vech))
        b_parts.append(np.zeros(blk.vech.shape[0]))
        if blk.size == 1:
            cones.append(clarabel.NonnegativeConeT(1))
        else:
            cones.append(clarabel.PSDTriangleConeT(blk.size))
    A = sparse.vstack(A_parts, format="csc")
    b = np.concatenate(b_parts)
    P = sparse.csc_matrix((L, L))

    s = clarabel.DefaultSettings()
    s.verbose = settings.verbose
    s.tol_gap_abs = settings.tol_gap_abs
    s.tol_gap_rel = settings.tol_gap_rel
    s.tol_feas = settings.tol_feas
    s.max_iter = settings.max_iter
    s.presolve_enable = False
    solver = clarabel.DefaultSolver(P, program.c, A, b, cones, s)
    sol = solver.solve()
    raw = str(sol.status).split(".")[-1]
    y = np.asarray(sol.x) if sol.x is not None else None
    status = {
        "Solved": ConicStatus.OPTIMAL,
        "PrimalInfeasible": ConicStatus.INFEASIBLE,
        "AlmostPrimalInfeasible": ConicStatus.INFEASIBLE,
        "DualInfeasible": ConicStatus.UNBOUNDED,
        "AlmostDualInfeasible": ConicStatus.UNBOUNDED,
    }.get(raw, ConicStatus.NUMERICAL)
    # reduced-accuracy and stalled solves are kept only when the iterate checks out
    if status is ConicStatus.NUMERICAL and y is not None and _acceptable(program, y, sol):
        status = ConicStatus.OPTIMAL
    return ConicResult(status, y, float(sol.obj_val), float(sol.obj_val_dual),
                       int(sol.iterations), float(sol.solve_time), raw)


def _acceptable(program: ConicProgram, y: np.ndarray, sol) -> bool:
    # stalled solves are kept when the iterate is still a near-feasible, near-optimal point
    eq = np.max(np.abs(program.E @ y - program.e), initial=0.0)
    worst = 0.0
    for blk in program.blocks:
        M = blk.matrix(y)
        lam = np.linalg.eigvalsh(M)[0]
        worst = min(worst, lam / (1.0 + np.max(np.abs(M))))
    gap = abs(sol.obj_val - sol.obj_val_dual) / (1.0 + abs(sol.obj_val))
    return eq <= 1e-6 and worst >= -1e-6 and gap <= 1e-5


Backend = Callable[[ConicProgram, ConicSettings], ConicResult]
_backend: Backend | None = None


def set_backend(fn: Backend | None) -> None:
    global _backend
    _backend = fn


def get_backend() -> Backend:
    if _backend is not None:
        return _backend
    spec = os.environ.get("GSIP_CONIC_BACKEND")
    if spec:
        mod, _, name = spec.partition(":")
        return getattr(importlib.import_module(mod), name or "solve")
    return clarabel_backend


def solve_conic(program: ConicProgram, settings: ConicSettings | None = None) -> ConicResult:
    result = get_backend()(program, settings or ConicSettings())
    log.debug("conic solve: %s (%s) obj=%.9g it=%d", result.status.value, result.raw_status,
              result.primal_objective, result.iterations)
    return result


def residuals(program: ConicProgram, y: np.ndarray) -> dict[str, float]:
    """Equality residual and smallest scaled PSD eigenvalue of every block."""
    out = {"equality": float(np.max(np.abs(program.E @ y - program.e), initial=0.0))}
    for blk in program.blocks:
        M = blk.matrix(y)
        out[blk.name] = float(np.linalg.eigvalsh(M)[0] / (1.0 + np.linalg.norm(M)))
    return out
