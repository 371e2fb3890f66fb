"""Edgeworth corrections to the Gaussian density and their measured error"""

from src.edgeworth.expansion import (
    EdgeworthTerms,
    ExpansionError,
    edgeworth_density,
    edgeworth_terms,
    expansion_error,
    expansion_error_table,
    hermite,
)

__all__ = [
    "EdgeworthTerms",
    "ExpansionError",
    "edgeworth_density",
    "edgeworth_terms",
    "expansion_error",
    "expansion_error_table",
    "hermite",
]
