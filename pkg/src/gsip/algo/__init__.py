"""Solver drivers for polynomial GSIPs."""

from .driver import (ProductTooLarge, aggregate, branch_builder, inner_loop, solve, solve_emptiness, solve_gsip,
                     solve_gsip_multi, split_indices)
from .modes import ModeComparison, ModeRow, compare_modes, solve_fe
from .options import (BranchResult, BranchStatus, EmptinessResult, LocalVerdict, Mode, SolveOptions, SolveReport,
                      TraceEntry)
from .verify import active_set, slater_direction, verify_feasibility, verify_local_optimality, worst_parameters

__all__ = [name for name in dir() if not name.startswith("_")]
