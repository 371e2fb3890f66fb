"""
Rate Fitting
Log-domain least squares of a sweep metric against the three decay classes and a free power
"""

import math
from dataclasses import asdict, dataclass, replace
from typing import Dict, List, Mapping, Sequence, Union

import numpy as np
from loguru import logger

from src.errors import InsufficientDataError, InvalidParameterError

MIN_POINTS = 4
SELECTION_TOLERANCE = 0.02
# absolute floor so exact fits (rss ~ 0) still admit the fixed-shape models
RSS_FLOOR = 1e-12

SHAPES = {
    "log_over_sqrt": lambda n: np.log(n) / np.sqrt(n),
    "inv_sqrt": lambda n: 1.0 / np.sqrt(n),
    "inv": lambda n: 1.0 / n,
}
# power-law exponent of each fixed shape, ignoring the logarithm
NOMINAL_ALPHA = {"log_over_sqrt": 0.5, "inv_sqrt": 0.5, "inv": 1.0}
MODELS = tuple(SHAPES) + ("power",)


@dataclass(frozen=True)
class RateFit:
    """
    metric(n) ~ constant * shape(n)

    alpha is fitted for the power model and the nominal exponent of the shape otherwise.
    """

    model: str
    constant: float
    alpha: float
    rss: float
    chosen: bool = False

    def predict(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        if self.model == "power":
            return self.constant * n ** -self.alpha
        return self.constant * SHAPES[self.model](n)

    def to_dict(self) -> Dict:
        return asdict(self)


def _column(rows: Sequence[Union[Mapping, object]], metric: str):
    ns, values = [], []
    for row in rows:
        record = row if isinstance(row, Mapping) else row.to_dict()
        if metric not in record:
            raise InvalidParameterError("metric", f"rows have no field '{metric}'")
        if record.get("status", "ok") != "ok":
            continue
        value = record[metric]
        # ln n vanishes at n = 1
        if record["n"] > 1 and value is not None and math.isfinite(value) and value > 0:
            ns.append(float(record["n"]))
            values.append(float(value))
    return np.array(ns), np.array(values)


def fit_rate(rows: Sequence[Union[Mapping, object]], metric: str = "d") -> List[RateFit]:
    """
    Fit every rate model to one metric column

    Fixed-shape models fit only ln(constant), as the mean log residual; the power
    model fits (ln constant, -alpha) with a degree-one polynomial in ln n. The
    chosen model is the fixed-shape model with the lowest rss among those within
    2% of the overall minimum, or the power model when none is.

    Args:
        rows: SweepRow objects or dicts; failed and non-positive rows are skipped
        metric: column to fit, e.g. "d" or "sup_edgeworth_error"

    Returns:
        One RateFit per model in MODELS order, exactly one flagged chosen

    Raises:
        InsufficientDataError: fewer than four usable rows
    """
    n, y = _column(rows, metric)
    if n.size < MIN_POINTS:
        raise InsufficientDataError(
            f"fitting '{metric}' needs at least {MIN_POINTS} positive rows, got {n.size}"
        )
    log_n, log_y = np.log(n), np.log(y)

    fits = []
    for model, shape in SHAPES.items():
        offset = log_y - np.log(shape(n))
        log_c = float(np.mean(offset))
        residual = offset - log_c
        rss = float(np.dot(residual, residual))
        fits.append(RateFit(model, math.exp(log_c), NOMINAL_ALPHA[model], rss))
    slope, intercept = np.polyfit(log_n, log_y, 1)
    residual = log_y - (intercept + slope * log_n)
    rss = float(np.dot(residual, residual))
    fits.append(RateFit("power", math.exp(intercept), float(-slope), rss))

    best = min(fit.rss for fit in fits)
    limit = (1.0 + SELECTION_TOLERANCE) * best + RSS_FLOOR
    fixed = [fit for fit in fits[:-1] if fit.rss <= limit]
    winner = min(fixed, key=lambda fit: fit.rss) if fixed else fits[-1]
    fits = [replace(fit, chosen=fit is winner) for fit in fits]
    logger.info(
        f"Computed rate fits for '{metric}' on {n.size} rows: {winner.model} chosen, "
        f"power alpha={fits[-1].alpha:.4f}"
    )
    return fits


def chosen_fit(fits: Sequence[RateFit]) -> RateFit:
    return next(fit for fit in fits if fit.chosen)
