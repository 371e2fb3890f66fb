"""Grid densities and the convolution engine for standardized sums"""

from src.grid.convolution import convolve_pair, fft_convolve, normalized_sum_density
from src.grid.grid_density import (
    DEFAULT_STEP,
    GridDensity,
    GridFunction,
    GridSpec,
    covering_grid,
    default_grid,
    discretize,
    discretize_on,
    gaussian_on,
    trapezoid_weights,
)

__all__ = [
    "convolve_pair",
    "fft_convolve",
    "normalized_sum_density",
    "DEFAULT_STEP",
    "GridDensity",
    "GridFunction",
    "GridSpec",
    "covering_grid",
    "default_grid",
    "discretize",
    "discretize_on",
    "gaussian_on",
    "trapezoid_weights",
]
