"""Numerical toolkit for toric quasi-Einstein metrics on CP^2 # -CP^2 and CP^2 # 2(-CP^2)."""

__version__ = "0.1.0"

from .cp2b2 import clw_exclusion_check, solve_constraints, vertex_boundary_report
from .families import FamilySolution, koiso_cao_solve, lpp_solve, page_solve
from .report import ResidualReport
from .verify import run_all_checks

__all__ = [
    "FamilySolution",
    "ResidualReport",
    "clw_exclusion_check",
    "koiso_cao_solve",
    "lpp_solve",
    "page_solve",
    "run_all_checks",
    "solve_constraints",
    "vertex_boundary_report",
]
