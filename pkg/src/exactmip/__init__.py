"""Exact rational mixed-integer programming with safe float-based bounding."""

from .bounding import bound_shift, exact_lp_bound, project_and_shift, select_bounding_method
from .certificate import check_certificate, emit_certificate
from .cli import shifted_geomean
from .exact_lp import interior_point, solve_exact_lp
from .fp_lp import solve_fp_lp
from .heuristics import check_solution, repair
from .model import (RationalMIP, Solution, approximate, build_model, check_solution_exact,
                    parse_mps, write_mps)
from .presolve import postsolve, presolve
from .tree import Config, SolveResult, solve, solve_oracle

__all__ = [
    "Config", "RationalMIP", "Solution", "SolveResult", "approximate", "bound_shift",
    "build_model", "check_certificate", "check_solution", "check_solution_exact",
    "emit_certificate", "exact_lp_bound", "interior_point", "parse_mps", "postsolve",
    "presolve", "project_and_shift", "repair", "select_bounding_method", "shifted_geomean",
    "solve", "solve_exact_lp", "solve_fp_lp", "solve_oracle", "write_mps",
]
