"""Checkers for minorant propagation, tail lower bounds, the truncation function and the KL decomposition"""

from src.verification.decomposition import (
    CSV_COLUMNS,
    DEFAULT_U,
    DecompositionReport,
    decompose_symmetric_kl,
)
from src.verification.minorant import (
    MinorantCheck,
    RescaleSuggestion,
    TailBoundCheck,
    TailBoundParams,
    minorant_log_bound,
    minorant_propagation_check,
    minorant_tail_params,
    tail_bound_check,
    tail_bound_params,
)
from src.verification.truncation import (
    TruncationFunction,
    build_truncation_function,
    calibrate_envelope,
    envelope,
)

__all__ = [
    "CSV_COLUMNS",
    "DEFAULT_U",
    "DecompositionReport",
    "MinorantCheck",
    "RescaleSuggestion",
    "TailBoundCheck",
    "TailBoundParams",
    "TruncationFunction",
    "build_truncation_function",
    "calibrate_envelope",
    "decompose_symmetric_kl",
    "envelope",
    "minorant_log_bound",
    "minorant_propagation_check",
    "minorant_tail_params",
    "tail_bound_check",
    "tail_bound_params",
]
