"""
Tests for rate-model fitting and selection
"""

import math

import numpy as np
import pytest

from src.config import dyadic_range
from src.errors import InsufficientDataError, InvalidParameterError
from src.ratelab import MODELS, chosen_fit, fit_rate

NS = dyadic_range(8, 512)


def rows_from(fn, ns=NS, metric="d"):
    return [{"n": n, metric: fn(n), "status": "ok"} for n in ns]


def test_inverse_rate_is_recognized():
    fits = fit_rate(rows_from(lambda n: 5.0 / n))
    assert [fit.model for fit in fits] == list(MODELS)
    assert sum(fit.chosen for fit in fits) == 1
    chosen = chosen_fit(fits)
    assert chosen.model == "inv"
    assert chosen.constant == pytest.approx(5.0)
    assert abs(fits[-1].alpha - 1.0) < 0.01


def test_log_over_sqrt_rate_is_recognized():
    fits = fit_rate(rows_from(lambda n: 3.0 * math.log(n) / math.sqrt(n)))
    assert chosen_fit(fits).model == "log_over_sqrt"
    assert chosen_fit(fits).constant == pytest.approx(3.0)


def test_inverse_sqrt_rate_is_recognized():
    fits = fit_rate(rows_from(lambda n: 0.7 / math.sqrt(n)))
    assert chosen_fit(fits).model == "inv_sqrt"


def test_other_powers_fall_back_to_the_free_fit():
    fits = fit_rate(rows_from(lambda n: 2.0 * n ** -0.75))
    chosen = chosen_fit(fits)
    assert chosen.model == "power"
    assert chosen.alpha == pytest.approx(0.75)
    assert chosen.predict(64) == pytest.approx(2.0 * 64 ** -0.75)


def test_noisy_ties_pick_the_best_fixed_shape():
    # noise orthogonal to ln n on a narrow range lets every fixed shape qualify
    noise = [0.1, -0.1, -0.1, 0.1, 0.1, -0.1, -0.1, 0.1]
    rows = [{"n": 100 + i, "d": (100 + i) ** -0.75 * math.exp(e)} for i, e in enumerate(noise)]
    fits = fit_rate(rows)
    chosen = chosen_fit(fits)
    fixed = fits[:-1]
    limit = 1.02 * min(fit.rss for fit in fits) + 1e-12
    assert all(fit.rss <= limit for fit in fixed)
    assert chosen.rss == min(fit.rss for fit in fixed)


def test_fits_are_deterministic():
    rows = rows_from(lambda n: 1.3 / n * (1.0 + 0.1 * math.sin(n)))
    assert fit_rate(rows) == fit_rate(rows)


def test_failed_and_nonpositive_rows_are_skipped():
    rows = rows_from(lambda n: 5.0 / n)
    rows.append({"n": 1024, "d": float("nan"), "status": "failed"})
    rows.append({"n": 2048, "d": 0.0, "status": "ok"})
    fits = fit_rate(rows)
    assert chosen_fit(fits).model == "inv"


def test_too_few_rows():
    with pytest.raises(InsufficientDataError):
        fit_rate(rows_from(lambda n: 1.0 / n, ns=[8, 16, 32]))


def test_unknown_metric():
    with pytest.raises(InvalidParameterError):
        fit_rate(rows_from(lambda n: 1.0 / n), metric="e_delta_sq")


def test_other_metric_columns():
    rows = rows_from(lambda n: 0.2 / n ** 1.5, metric="sup_edgeworth_error")
    fits = fit_rate(rows, metric="sup_edgeworth_error")
    assert np.isclose(fits[-1].alpha, 1.5)
