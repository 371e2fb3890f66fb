"""Analytic summand families, cumulant summaries and Gaussian minorization"""

from src.distributions.families import (
    DistributionSpec,
    gaussian_mixture,
    make_family,
    parse_family_token,
)
from src.distributions.functionals import (
    CumulantSummary,
    cumulant_summary,
    cycle_specs,
    expected_regime,
    fisher_information,
)
from src.distributions.minorization import (
    MinorizationParams,
    common_minorization,
    minorization_params,
)

__all__ = [
    "DistributionSpec",
    "gaussian_mixture",
    "make_family",
    "parse_family_token",
    "CumulantSummary",
    "cumulant_summary",
    "cycle_specs",
    "expected_regime",
    "fisher_information",
    "MinorizationParams",
    "common_minorization",
    "minorization_params",
]
