"""
Shared fixtures: summand families, grids and the skewed-mixture sweep
"""

import math

import pytest
from loguru import logger

from src.config import RunConfig, dyadic_range
from src.distributions.families import gaussian_mixture, make_family
from src.grid.grid_density import default_grid
from src.ratelab.sweep import run_sweep

SQRT3 = math.sqrt(3.0)


@pytest.fixture(autouse=True)
def quiet_logs():
    logger.remove()
    yield


@pytest.fixture
def gaussian():
    return make_family("gaussian", [0.0, 1.0])


@pytest.fixture
def uniform():
    return make_family("uniform", [-SQRT3, SQRT3])


@pytest.fixture
def laplace():
    # unit variance
    return make_family("laplace", [1.0 / math.sqrt(2.0)])


@pytest.fixture
def logistic():
    return make_family("logistic", [math.sqrt(3.0) / math.pi])


@pytest.fixture
def skewed_mixture():
    """Mean 0, variance 1, E X^3 = 0.75, E X^4 = 2.625"""
    return gaussian_mixture([0.25, 0.75], [1.5, -0.5], [0.25, 0.25])


@pytest.fixture
def grid16():
    return default_grid(16)


@pytest.fixture(scope="session")
def skewed_sweep():
    """Rows of the default sweep, computed once for the rate tests"""
    config = RunConfig()
    rows = run_sweep(config.specs(), dyadic_range(8, 512), config)
    return rows
