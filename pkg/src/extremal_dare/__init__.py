"""Extremal Hermitian solutions of the discrete-time algebraic Riccati equation.

Fixed-point iteration, its accelerated form AFPI(r), the two dual equations
and a Newton baseline, with a driver that returns every extremal solution
whose hypotheses hold.
"""
from .afpi import AfpiReport, afpi_run, binary_f, compose_fr, verify_flow, verify_semigroup
from .builtin import BuiltinExample, builtin_example
from .core import (DareProblem, closed_loop, identity_residuals, nres, riccati_apply,
                   riccati_apply_classic)
from .driver import ExtremalSolutions, ordering_gap, solve_all, verify_solution
from .duals import build_first_kind, build_second_kind, verify_duality
from .errors import DareError
from .iterations import (IterationOptions, IterationReport, Termination, fpi_dual2_run,
                         fpi_run, newton_run, rate_estimate, stein_initial)
from .io import dump_problem, history_csv, load_problem, parse_problem, summary_dict
from .linalg import solve_stein, spectrum
from .structure import StructureReport, analyze, default_stabilizing_feedback

__version__ = "0.1.0"

__all__ = [
    "AfpiReport", "BuiltinExample", "DareError", "DareProblem", "ExtremalSolutions",
    "IterationOptions", "IterationReport", "StructureReport", "Termination",
    "afpi_run", "analyze", "binary_f", "build_first_kind", "build_second_kind",
    "builtin_example", "closed_loop", "compose_fr", "default_stabilizing_feedback",
    "dump_problem", "fpi_dual2_run", "fpi_run", "history_csv", "identity_residuals",
    "load_problem", "newton_run", "nres", "ordering_gap", "parse_problem", "rate_estimate",
    "riccati_apply", "riccati_apply_classic", "solve_all", "solve_stein", "spectrum",
    "stein_initial", "summary_dict", "verify_duality", "verify_flow", "verify_semigroup",
    "verify_solution",
]
