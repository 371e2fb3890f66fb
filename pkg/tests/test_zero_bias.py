"""
Tests for the zero-bias transform and the zero-bias coupling
"""

import math

import numpy as np
import pytest
from scipy import stats

from src.distributions import make_family
from src.errors import InfiniteFisherInformationError, NonzeroMeanError
from src.grid import discretize_on
from src.stein import (
    coupling_delta_second_moment,
    zero_bias_density,
    zero_bias_identity_residual,
    zero_bias_second_moment,
)

IDENTITY_FUNCTIONS = {
    "x2": (lambda x: x * x, lambda x: 2.0 * x),
    "x3": (lambda x: x ** 3, lambda x: 3.0 * x * x),
    "sin": (np.sin, np.cos),
}


class TestZeroBias:
    def test_uniform_transform_is_a_parabola(self, uniform):
        density = zero_bias_density(uniform)
        x = density.x
        expected = np.where(np.abs(x) <= math.sqrt(3.0), (3.0 - x * x) / (4.0 * math.sqrt(3.0)), 0.0)
        assert np.abs(density.values - expected).max() < 1e-8

    def test_gaussian_is_a_fixed_point(self, gaussian):
        density = zero_bias_density(gaussian)
        assert np.abs(density.values - stats.norm.pdf(density.x)).max() < 1e-8
        assert density.raw_mass == pytest.approx(1.0, abs=1e-8)

    def test_transform_of_a_grid_density(self, gaussian, grid16):
        density = zero_bias_density(discretize_on(gaussian, grid16))
        assert np.abs(density.values - stats.norm.pdf(density.x)).max() < 1e-6

    @pytest.mark.parametrize("name", sorted(IDENTITY_FUNCTIONS))
    def test_identity_residual(self, name, laplace, uniform, skewed_mixture):
        f, f_prime = IDENTITY_FUNCTIONS[name]
        for spec in (laplace, uniform, skewed_mixture):
            assert zero_bias_identity_residual(spec, f, f_prime) < 1e-6

    def test_second_moment(self, laplace, skewed_mixture):
        assert zero_bias_second_moment(laplace) == pytest.approx(2.0)
        assert zero_bias_second_moment(skewed_mixture) == pytest.approx(2.625 / 3.0)
        # the Laplace grid is widened past its exponential tail
        for spec, expected in ((laplace, 2.0), (skewed_mixture, 2.625 / 3.0)):
            density = zero_bias_density(spec)
            second = float(np.sum(density.x ** 2 * density.values) * density.step)
            assert second == pytest.approx(expected, abs=1e-6)

    @pytest.mark.parametrize("variance", [0.25, 4.0])
    def test_scaled_gaussian_is_a_fixed_point(self, variance):
        density = zero_bias_density(make_family("gaussian", [0.0, variance]))
        expected = stats.norm.pdf(density.x, scale=math.sqrt(variance))
        assert np.abs(density.values - expected).max() < 1e-8
        assert density.mass == pytest.approx(1.0, abs=1e-8)

    def test_nonzero_mean_rejected(self):
        shifted = make_family("gaussian", [1.0, 1.0])
        with pytest.raises(NonzeroMeanError):
            zero_bias_density(shifted)
        with pytest.raises(NonzeroMeanError):
            zero_bias_second_moment(shifted)


class TestCoupling:
    @pytest.mark.parametrize("n", [1, 4, 64, 512])
    def test_gaussian_second_moment(self, gaussian, n):
        report = coupling_delta_second_moment([gaussian], n)
        assert report.e_delta_sq == pytest.approx(2.0 / n, abs=1e-10)
        assert math.fsum(report.weights) == pytest.approx(1.0)

    @pytest.mark.parametrize("n", [4, 16, 64, 256, 512])
    def test_bound_chain(self, gaussian, laplace, skewed_mixture, n):
        for specs in ([gaussian], [laplace], [skewed_mixture], [laplace, skewed_mixture]):
            report = coupling_delta_second_moment(specs, n)
            report.check_chain()
            assert report.bound * n == pytest.approx(report.gamma)

    def test_platykurtic_summands_skip_the_kurtosis_link(self, laplace, skewed_mixture):
        # E X^4 = 2.625 < 3
        assert not coupling_delta_second_moment([skewed_mixture], 8).kurtosis_link_applies
        assert coupling_delta_second_moment([laplace], 8).kurtosis_link_applies

    def test_infinite_fisher_information(self, uniform):
        with pytest.raises(InfiniteFisherInformationError):
            coupling_delta_second_moment([uniform], 8)

    def test_nonzero_mean(self):
        with pytest.raises(NonzeroMeanError):
            coupling_delta_second_moment([make_family("gaussian", [0.5, 1.0])], 8)
