"""
Tests for minorant propagation and the tail lower bound
"""

import math

import numpy as np
import pytest

from src.distributions import minorization_params
from src.errors import InvalidParameterError, NotMinorizableError
from src.grid import default_grid, gaussian_on
from src.verification import (
    TailBoundParams,
    minorant_log_bound,
    minorant_propagation_check,
    minorant_tail_params,
    tail_bound_check,
    tail_bound_params,
)

L1_GAUSSIAN = 1.0 / math.sqrt(2.0 * math.pi)
M_GAUSSIAN = 8.0 * math.sqrt(2.0 / math.pi)  # E|G|^5


class TestPropagation:
    def test_gaussian_bound_is_phi(self):
        x = np.linspace(-5.0, 5.0, 11)
        for n in (1, 3, 10):
            expected = -0.5 * x * x - 0.5 * math.log(2.0 * math.pi)
            assert np.allclose(minorant_log_bound(x, L1_GAUSSIAN, 1.0, n), expected)

    @pytest.mark.parametrize("n", [1, 2, 4, 8])
    def test_gaussian_summands_meet_the_bound(self, gaussian, n):
        result = minorant_propagation_check(L1_GAUSSIAN, 1.0, [gaussian], n)
        assert result.holds
        assert abs(result.min_margin) < 1e-6
        if n >= 2:
            assert result.induction_slack >= -1e-8

    @pytest.mark.parametrize("n", [2, 4])
    def test_laplace_summands(self, laplace, n):
        params = minorization_params(laplace)
        result = minorant_propagation_check(params.l1, params.l2, [laplace], n)
        assert result.holds
        assert result.min_log_ratio >= -1e-9

    def test_compact_support_is_rejected(self, uniform):
        with pytest.raises(NotMinorizableError):
            minorant_propagation_check(0.1, 1.0, [uniform], 4)

    def test_too_generous_minorant_is_rejected(self, gaussian):
        with pytest.raises(NotMinorizableError):
            minorant_propagation_check(0.5, 1.0, [gaussian], 2)


class TestTailBound:
    def test_gaussian_parameters(self):
        params = tail_bound_params(1.0, M_GAUSSIAN, 1.0, 1.0, L1_GAUSSIAN, 1.0)
        assert params.k1 == pytest.approx(L1_GAUSSIAN / 2.0, abs=1e-12)
        assert params.k2 == pytest.approx(2.0, abs=1e-12)
        assert params.s == 1.0
        assert params.v == 1.0
        assert params.a == pytest.approx(1.0 / M_GAUSSIAN ** 0.4, abs=1e-12)
        assert not params.a_exceeds_one
        assert not params.constraint_holds

    def test_rescale_reaches_target(self):
        params = tail_bound_params(1.0, M_GAUSSIAN, 1.0, 1.0, L1_GAUSSIAN, 1.0)
        rescale = params.rescale
        assert rescale is not None
        assert rescale.a == 8.0
        assert 1.0 / rescale.M ** 0.4 == pytest.approx(8.0)
        assert rescale.M == pytest.approx(rescale.c ** 5 * M_GAUSSIAN)
        assert rescale.J == pytest.approx(1.0 / rescale.c ** 2)

    def test_satisfied_constraint_has_no_rescale(self):
        params = tail_bound_params(1.0, 8.0 ** -2.5, 1.0, 1.0, L1_GAUSSIAN, 1.0)
        assert params.a == pytest.approx(8.0)
        assert params.constraint_value == pytest.approx(8.0 / 7.0 * 1.5)
        assert params.constraint_holds
        assert params.rescale is None

    @pytest.mark.parametrize("delta1", [0.0, -0.1, 1.5])
    def test_delta1_range(self, delta1):
        with pytest.raises(InvalidParameterError):
            tail_bound_params(1.0, M_GAUSSIAN, 1.0, delta1, L1_GAUSSIAN, 1.0)

    def test_small_delta1_is_accepted(self):
        params = tail_bound_params(1.0, M_GAUSSIAN, 1.0, 0.25, L1_GAUSSIAN, 1.0)
        assert params.a == pytest.approx(0.25 / M_GAUSSIAN ** 0.4, abs=1e-12)

    def test_minorant_tail_params(self):
        params = minorant_tail_params(L1_GAUSSIAN, 1.0, a0=2.0, v0=0.5)
        assert params.k1 == L1_GAUSSIAN
        assert params.k2 == pytest.approx(2.0)
        assert params.to_dict()["constraint_value"] == pytest.approx(3.0)

    def test_invalid_constants(self):
        with pytest.raises(InvalidParameterError):
            TailBoundParams(a=0.0, k1=1.0, k2=1.0, s=1.0, v=1.0)

    def test_gaussian_density_satisfies_bound(self):
        params = tail_bound_params(1.0, 8.0 ** -2.5, 1.0, 1.0, L1_GAUSSIAN, 1.0)
        result = tail_bound_check(gaussian_on(default_grid(16)), params, 16)
        assert result.holds
        assert result.min_margin > 0
        assert result.points_checked > 0
        assert result.unresolved == 0

    def test_tail_check_needs_two_summands(self):
        params = minorant_tail_params(L1_GAUSSIAN, 1.0, a0=2.0, v0=1.0)
        with pytest.raises(InvalidParameterError):
            tail_bound_check(gaussian_on(default_grid(1)), params, 1)
