"""
Tests for summand families, functionals and Gaussian minorants
"""

import math

import numpy as np
import pytest

from src.distributions import (
    common_minorization,
    cumulant_summary,
    cycle_specs,
    expected_regime,
    fisher_information,
    make_family,
    minorization_params,
    parse_family_token,
)
from src.errors import (
    InfiniteFisherInformationError,
    InvalidParameterError,
    NotMinorizableError,
)


class TestFamilies:
    def test_token_parsing_and_aliases(self):
        spec = parse_family_token("laplace:1")
        assert spec.family == "laplace"
        assert spec.params == (1.0,)
        assert parse_family_token("normal:0,1").family == "gaussian"
        assert parse_family_token("mixture:.5,-1,1,.5,1,1").family == "gaussian_mixture"

    @pytest.mark.parametrize(
        "token",
        [
            "laplace",
            "uniform:1,0",
            "cauchy:1",
            "gaussian:0,-1",
            "mixture:.5,0,1,.4,0,1",
            "laplace:x",
        ],
    )
    def test_invalid_tokens_rejected(self, token):
        with pytest.raises(InvalidParameterError):
            parse_family_token(token)

    def test_skewed_mixture_moments(self, skewed_mixture):
        assert skewed_mixture.mean == pytest.approx(0.0, abs=1e-15)
        assert skewed_mixture.variance == pytest.approx(1.0, abs=1e-14)
        assert skewed_mixture.raw_moment(3) == pytest.approx(0.75, abs=1e-14)
        assert skewed_mixture.raw_moment(4) == pytest.approx(2.625, abs=1e-14)

    def test_unit_variance_families(self, gaussian, uniform, laplace, logistic):
        for spec in (gaussian, uniform, laplace, logistic):
            assert spec.variance == pytest.approx(1.0, rel=1e-12)

    def test_scaled_law(self, laplace, skewed_mixture):
        assert laplace.scaled(2.0).variance == pytest.approx(4.0, rel=1e-12)
        scaled = skewed_mixture.scaled(0.5)
        assert scaled.raw_moment(3) == pytest.approx(0.75 / 8.0, rel=1e-12)
        with pytest.raises(InvalidParameterError):
            laplace.scaled(0.0)

    def test_characteristic_function_at_zero(
        self, gaussian, uniform, laplace, logistic, skewed_mixture
    ):
        for spec in (gaussian, uniform, laplace, logistic, skewed_mixture):
            assert abs(spec.characteristic_function(np.array([0.0]))[0] - 1.0) < 1e-12

    def test_absolute_moments(self, gaussian, laplace):
        expected = 8.0 * math.sqrt(2.0 / math.pi)
        assert gaussian.absolute_moment(5) == pytest.approx(expected, rel=1e-12)
        assert laplace.absolute_moment(4) == pytest.approx(laplace.raw_moment(4), rel=1e-12)
        with pytest.raises(InvalidParameterError):
            gaussian.absolute_moment(0.0)

    def test_partial_expectation(self, gaussian, laplace, uniform):
        phi0 = 1.0 / math.sqrt(2 * math.pi)
        assert float(gaussian.partial_expectation(0.0)) == pytest.approx(phi0)
        # E[X 1{X > x}] tends to E X = 0 as x -> -inf
        for spec in (gaussian, laplace, uniform):
            assert float(spec.partial_expectation(-40.0)) == pytest.approx(0.0, abs=1e-12)

    def test_exponential_moment_threshold(self, gaussian, laplace, uniform):
        assert gaussian.exponential_moment_threshold() == pytest.approx(2.0)
        assert math.isinf(laplace.exponential_moment_threshold())
        assert uniform.exponential_moment_threshold() == 0.0


class TestFunctionals:
    def test_fisher_information_closed_forms(self, laplace):
        assert fisher_information(make_family("gaussian", [0.0, 2.0])) == pytest.approx(0.5)
        assert fisher_information(laplace) == pytest.approx(2.0)

    def test_fisher_information_of_degenerate_mixture(self):
        mixture = make_family("mixture", [0.5, 0.0, 1.0, 0.5, 0.0, 1.0])
        assert fisher_information(mixture) == pytest.approx(1.0, rel=1e-8)

    def test_uniform_has_infinite_fisher_information(self, uniform):
        with pytest.raises(InfiniteFisherInformationError):
            fisher_information(uniform)

    def test_cramer_rao(self, gaussian, laplace, logistic, skewed_mixture):
        for spec in (gaussian, laplace, logistic, skewed_mixture):
            assert spec.variance * fisher_information(spec) >= 1.0 - 1e-9

    def test_cumulant_summary_of_gaussians(self, gaussian):
        summary = cumulant_summary(cycle_specs([gaussian], 8))
        assert summary.B_n == pytest.approx(8.0)
        assert summary.sum_gamma3 == 0.0
        assert summary.sum_gamma4 == pytest.approx(0.0, abs=1e-14)
        assert summary.J == pytest.approx(1.0)
        assert all(v >= -1e-12 for v in summary.invariant_slacks().values())

    def test_cumulant_summary_marks_infinite_J(self, uniform, laplace):
        summary = cumulant_summary([uniform, laplace])
        assert not summary.finite_J

    def test_cycle_specs(self, gaussian, laplace):
        cycled = cycle_specs([gaussian, laplace], 5)
        assert cycled == [gaussian, laplace, gaussian, laplace, gaussian]
        with pytest.raises(InvalidParameterError):
            cycle_specs([], 3)

    def test_expected_regime(self, gaussian, laplace):
        assert expected_regime([gaussian]) == "inv"
        assert expected_regime([laplace]) == "inv_sqrt"
        assert expected_regime([laplace, make_family("laplace", [1.0])]) == "log_over_sqrt"


class TestMinorization:
    def test_gaussian_minorant_is_its_density(self, gaussian):
        params = minorization_params(gaussian)
        assert params.l1 == pytest.approx(1.0 / math.sqrt(2 * math.pi))
        assert params.l2 == pytest.approx(1.0)
        assert params.l3 == pytest.approx(1.0)

    def test_minorant_lies_below_density(self, laplace, logistic, skewed_mixture):
        x = np.linspace(-30.0, 30.0, 6001)
        for spec in (laplace, logistic, skewed_mixture):
            params = minorization_params(spec)
            log_bound = math.log(params.l1) - 0.5 * params.l2 * x * x
            assert np.all(spec.logpdf(x) >= log_bound - 1e-12)

    def test_uniform_has_no_minorant(self, uniform):
        assert minorization_params(uniform) is None
        with pytest.raises(NotMinorizableError):
            common_minorization([uniform])

    def test_partial_cover(self, uniform, laplace):
        params = common_minorization([laplace, uniform], delta1=0.5)
        assert params.A_n_fraction == pytest.approx(0.5)
        assert params.satisfies_assumption
        assert params.delta1_exceeds_quarter
