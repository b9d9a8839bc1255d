"""Problem files, the benchmark corpus and the ``gsip`` command line."""

from .corpus import BY_NAME, INSTANCES, TIERS, Expected, Instance, get, tier_instances
from .problem_file import (FORMAT, ProblemFileError, emit_problem, parse_problem, problem_from_dict,
                           problem_to_dict, same_problem)
