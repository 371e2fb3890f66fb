"""
Tests for entropies, divergences and the information identities
"""

import math

import pytest

from src.errors import AbsoluteContinuityError, ContractViolation, InvalidParameterError
from src.grid import default_grid, discretize_on, gaussian_on, normalized_sum_density
from src.information import (
    DivergenceReport,
    awgn_mutual_information,
    awgn_symmetric_divergence,
    entropy,
    entropy_gap,
    entropy_jump,
    fisher_divergence_bound,
    kl,
    symmetric_kl,
    total_variation_l1,
)


def test_gaussian_entropy(grid16):
    expected = 0.5 * math.log(2 * math.pi * math.e)
    assert entropy(gaussian_on(grid16)) == pytest.approx(expected, abs=1e-10)


def test_kl_of_shifted_gaussians(grid16):
    p = gaussian_on(grid16)
    q = gaussian_on(grid16, mean=1.0)
    assert kl(p, p) == pytest.approx(0.0, abs=1e-14)
    assert kl(p, q) == pytest.approx(0.5, abs=1e-8)


def test_symmetric_kl_of_scaled_gaussians(grid16):
    p = gaussian_on(grid16)
    q = gaussian_on(grid16, variance=2.0)
    report = symmetric_kl(p, q)
    assert report.kl_pq == pytest.approx(0.5 * (0.5 - 1.0 + math.log(2.0)), abs=1e-8)
    assert report.d == pytest.approx(0.25, abs=1e-8)
    report.check_chain()


def test_l1_distance_bounds(grid16):
    p = gaussian_on(grid16, mean=-8.0, variance=0.1)
    q = gaussian_on(grid16, mean=8.0, variance=0.1)
    assert total_variation_l1(p, p) == 0.0
    assert total_variation_l1(p, q) == pytest.approx(2.0, abs=1e-9)


def test_absolute_continuity_violation(uniform, grid16):
    with pytest.raises(AbsoluteContinuityError) as info:
        symmetric_kl(discretize_on(uniform, grid16), gaussian_on(grid16))
    lo, hi = info.value.x_range
    assert lo < -math.sqrt(3.0) and hi > math.sqrt(3.0)


def test_pinsker_chain_for_standardized_sums(laplace, skewed_mixture):
    for specs in ([laplace], [skewed_mixture], [laplace, skewed_mixture]):
        grid = default_grid(8)
        report = symmetric_kl(normalized_sum_density(specs, 8, grid), gaussian_on(grid))
        assert min(report.chain_slacks().values()) >= -1e-9
        assert report.pinsker_slack >= -1e-9


def test_broken_chain_raises():
    report = DivergenceReport(1.0, 1.0, 0.1, 0.1, 0.2, 1.0, -0.4, 0.0)
    with pytest.raises(ContractViolation) as info:
        report.check_chain()
    assert info.value.exit_code == 3


def test_laplace_kl_to_its_gaussian_counterpart(laplace):
    report = fisher_divergence_bound(laplace)
    assert report.D == pytest.approx(0.5 * math.log(math.pi * math.e) - 1.0, abs=5e-5)
    assert report.slack >= -1e-9


def test_fisher_bound_for_finite_J_families(gaussian, laplace, logistic, skewed_mixture):
    for spec in (gaussian, laplace, logistic, skewed_mixture):
        assert fisher_divergence_bound(spec).slack >= -1e-9


def test_entropy_gap_is_nonnegative(laplace, uniform, grid16):
    for spec in (laplace, uniform):
        assert entropy_gap(discretize_on(spec, grid16)) >= -1e-9


@pytest.mark.parametrize("snr", [0.5, 1.0, 2.0, 10.0])
def test_awgn_divergence_equals_snr(snr):
    assert abs(awgn_symmetric_divergence(snr, 1.0) - snr) < 1e-12
    assert awgn_symmetric_divergence(2.0 * snr, 2.0) == pytest.approx(snr, abs=1e-12)
    assert awgn_mutual_information(snr, 1.0) == pytest.approx(0.5 * math.log1p(snr))


def test_awgn_rejects_zero_noise():
    with pytest.raises(InvalidParameterError):
        awgn_symmetric_divergence(1.0, 0.0)


def test_entropy_jump(gaussian, laplace, uniform):
    assert abs(entropy_jump(gaussian, gaussian)) < 1e-8
    for pair in ((laplace, laplace), (uniform, uniform), (gaussian, laplace)):
        assert entropy_jump(*pair) >= -1e-8
    # (U1 + U2)/sqrt(2) is the triangle law with entropy ln(sqrt 6) + 1/2
    expected = math.log(math.sqrt(6.0)) + 0.5 - math.log(2.0 * math.sqrt(3.0))
    assert entropy_jump(uniform, uniform) == pytest.approx(expected, abs=5e-3)


def test_entropy_jump_needs_equal_variances(gaussian, laplace):
    with pytest.raises(InvalidParameterError):
        entropy_jump(gaussian, laplace.scaled(2.0))
