"""
Test Function Catalog
Named test functions with analytic first and second derivatives for the Stein solver
"""

from typing import Callable, Dict, Optional, Tuple

import numpy as np

from src.errors import InvalidParameterError
from src.grid.grid_density import GridFunction, GridSpec

Func = Callable[[np.ndarray], np.ndarray]


def _sech2(x):
    return 1.0 / np.cosh(x) ** 2


TEST_FUNCTIONS: Dict[str, Tuple[Func, Func, Optional[Func]]] = {
    "sin": (np.sin, np.cos, lambda x: -np.sin(x)),
    "tanh": (np.tanh, _sech2, lambda x: -2.0 * np.tanh(x) * _sech2(x)),
    "xexp": (
        lambda x: x * np.exp(-x * x),
        lambda x: (1.0 - 2.0 * x * x) * np.exp(-x * x),
        lambda x: (4.0 * x ** 3 - 6.0 * x) * np.exp(-x * x),
    ),
    # kinks at +-1: no classical second derivative
    "clip": (lambda x: np.clip(x, -1.0, 1.0), lambda x: (np.abs(x) < 1.0).astype(float), None),
    "x": (lambda x: x, np.ones_like, np.zeros_like),
    "x2": (lambda x: x * x, lambda x: 2.0 * x, lambda x: np.full_like(x, 2.0)),
    "const": (np.ones_like, np.zeros_like, np.zeros_like),
}


def named_function(name: str, grid: GridSpec) -> GridFunction:
    """Sample a named test function and its derivatives on the grid"""
    if name not in TEST_FUNCTIONS:
        raise InvalidParameterError("g", f"unknown test function '{name}', expected one of {sorted(TEST_FUNCTIONS)}")
    g, g1, g2 = TEST_FUNCTIONS[name]
    return GridFunction.from_callable(g, grid, g1, g2, name=name)
