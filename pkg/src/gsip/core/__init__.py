"""GSIP problem model and reformulation machinery."""

from .cuts import (CutSet, ExtensionUnavailable, basic_solutions, box_vertices, classify_convexity,
                   feasible_extension, initial_cuts, linear_in_u, simplex_vertices, vertex_cuts)
from .problem import Convexity, GsipProblem, ProblemError, Structure, box_problem_rows
from .reform import (BranchIndex, DegenerateMatrix, KktSubsetSystem, Plme, branch_pop, conservative_pop,
                     cut_inequalities, cut_polynomial, emptiness_branch_pop, enumerate_branches, kkt_branches,
                     kkt_multipliers, kkt_subset,
                     membership, plain_pop, plme)
from .valuefn import (ValueResult, VfStatus, alternative_rays, alternatives_feasible, polyhedron_bounded, polyhedron_feasible,
                      value_function)

__all__ = [name for name in dir() if not name.startswith("_")]
