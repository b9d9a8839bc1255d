"""Moment-SOS relaxations for polynomial optimization."""

from .conic import ConicResult, ConicSettings, ConicStatus, residuals, set_backend, solve_conic
from .extract import check_flat_truncation, extract_minimizers, moment_matrix, psd_rank
from .hierarchy import HierarchyOptions, MomentSolution, solve_pop, with_ball
from .relaxation import (ConicProgram, OrderTooSmall, PopInstance, PsdBlock,
                         build_moment_relaxation, flat_gap, min_order)

__all__ = [
    "ConicProgram", "ConicResult", "ConicSettings", "ConicStatus", "HierarchyOptions",
    "MomentSolution", "OrderTooSmall", "PopInstance", "PsdBlock", "build_moment_relaxation",
    "check_flat_truncation", "extract_minimizers", "flat_gap", "min_order", "moment_matrix",
    "psd_rank", "residuals", "set_backend", "solve_conic", "solve_pop", "with_ball",
]
