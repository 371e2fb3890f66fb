"""Sample-size sweeps, convergence-rate fits and report emission"""

from src.ratelab.figures import create_rate_chart, create_rate_shape_chart, fits_table
from src.ratelab.rate_fit import MODELS, RateFit, chosen_fit, fit_rate
from src.ratelab.reports import REPORT_FORMATS, bundle, emit_report, load_report
from src.ratelab.sweep import (
    SWEEP_COLUMNS,
    SweepRow,
    rows_frame,
    run_sweep,
    sweep_invariants,
    sweep_row,
    tail_variance,
)

__all__ = [
    "MODELS",
    "REPORT_FORMATS",
    "RateFit",
    "SWEEP_COLUMNS",
    "SweepRow",
    "bundle",
    "chosen_fit",
    "create_rate_chart",
    "create_rate_shape_chart",
    "emit_report",
    "fit_rate",
    "fits_table",
    "load_report",
    "rows_frame",
    "run_sweep",
    "sweep_invariants",
    "sweep_row",
    "tail_variance",
]
