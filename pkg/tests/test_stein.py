"""
Tests for the Stein equation solver and its norm bounds
"""

import numpy as np
import pytest

from src.errors import InvalidParameterError, StableRangeError, UnboundedDerivativeError
from src.grid import GridFunction, default_grid
from src.stein import gaussian_expectation, named_function, stein_bound_report, stein_solution


@pytest.fixture(scope="module")
def grid():
    return default_grid(1)


def test_gaussian_expectations(grid):
    assert gaussian_expectation(named_function("sin", grid)) == pytest.approx(0.0, abs=1e-12)
    assert gaussian_expectation(named_function("x2", grid)) == pytest.approx(1.0, abs=1e-10)
    assert gaussian_expectation(named_function("const", grid)) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("name", ["sin", "tanh", "xexp"])
def test_smooth_functions_satisfy_bounds(name, grid):
    g = named_function(name, grid)
    solution = stein_solution(g)
    solution.check_residual()
    report = stein_bound_report(g, solution)
    assert report.holds()
    report.check()
    assert report.f2_curve_excess is not None
    assert report.f3_curve_excess is not None


def test_linear_g_has_constant_solution(grid):
    solution = stein_solution(named_function("x", grid))
    inside = np.abs(solution.x) <= 8.0
    assert np.abs(solution.f[inside] + 1.0).max() < 1e-8


def test_quadratic_g_has_linear_solution(grid):
    solution = stein_solution(named_function("x2", grid))
    inside = np.abs(solution.x) <= 8.0
    assert np.abs(solution.f[inside] + solution.x[inside]).max() < 1e-8
    assert solution.g_mean_gaussian == pytest.approx(1.0, abs=1e-10)


def test_growing_derivative_is_rejected(grid):
    with pytest.raises(UnboundedDerivativeError):
        stein_bound_report(named_function("x2", grid))


def test_kinked_g_skips_third_derivative_curve(grid):
    report = stein_bound_report(named_function("clip", grid))
    assert report.f3_curve_excess is None
    assert report.g_prime_sup == pytest.approx(1.0)


def test_unknown_test_function(grid):
    with pytest.raises(InvalidParameterError):
        named_function("cos", grid)


def test_grid_beyond_stable_range():
    with pytest.raises(StableRangeError):
        stein_solution(named_function("sin", default_grid(1, L=31.0)))


def test_solution_frame_and_dict(grid):
    solution = stein_solution(named_function("tanh", grid))
    assert list(solution.to_frame().columns) == ["x", "g", "f", "f1", "f2", "f3"]
    assert set(solution.to_dict()) == {"g", "g_mean_gaussian", "residual", "sup_norms"}


def test_solution_ignores_constant_shifts_of_g(grid):
    g = named_function("tanh", grid)
    shifted = GridFunction(
        g.lo, g.step, g.values + 3.0, g.derivative, g.second_derivative, name="tanh+3"
    )
    base, moved = stein_solution(g), stein_solution(shifted)
    inside = np.abs(base.x) <= 8.0
    assert moved.g_mean_gaussian == pytest.approx(base.g_mean_gaussian + 3.0, abs=1e-9)
    assert np.abs(moved.f[inside] - base.f[inside]).max() < 1e-10
