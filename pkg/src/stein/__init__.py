"""Stein equation solutions, zero-bias transforms and the zero-bias coupling"""

from src.stein.coupling import CouplingReport, coupling_delta_second_moment
from src.stein.catalog import TEST_FUNCTIONS, named_function
from src.stein.solver import (
    SteinBoundReport,
    SteinSolution,
    finite_difference,
    gaussian_expectation,
    stein_bound_report,
    stein_solution,
)
from src.stein.zero_bias import (
    zero_bias_density,
    zero_bias_identity_residual,
    zero_bias_second_moment,
)

__all__ = [
    "CouplingReport",
    "TEST_FUNCTIONS",
    "SteinBoundReport",
    "SteinSolution",
    "coupling_delta_second_moment",
    "finite_difference",
    "gaussian_expectation",
    "named_function",
    "stein_bound_report",
    "stein_solution",
    "zero_bias_density",
    "zero_bias_identity_residual",
    "zero_bias_second_moment",
]
