"""
Stein Solver
Solution of f'(w) - w f(w) = g(w) - E g(G) on the working grid, with norm-bound checks
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline
from scipy.special import erfcx, ndtr

from src.errors import ContractViolation, StableRangeError, UnboundedDerivativeError
from src.grid.grid_density import GridFunction

STABLE_RANGE = 30.0
BOUNDARY_POINTS = 3
RESIDUAL_TOLERANCE = 1e-6
# tail extrapolation error grows like exp(w^2/2) towards the grid edge
COMPARISON_REACH = 8.0

SQRT_2PI = math.sqrt(2.0 * math.pi)
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(3)


def _phi(x):
    return np.exp(-0.5 * np.square(x)) / SQRT_2PI


def _mills(x):
    """(1 - Phi(x)) / phi(x) without underflow"""
    return math.sqrt(math.pi / 2.0) * erfcx(np.asarray(x) / math.sqrt(2.0))


def _upper_tail(c: float, value: float, slope: float, curvature: float) -> float:
    """Integral over (c, inf) of the quadratic Taylor extension at c against phi"""
    m = float(_mills(c))
    return float(_phi(c)) * (
        value * m + slope * (1.0 - c * m) + 0.5 * curvature * ((1.0 + c * c) * m - c)
    )


def _phi_weighted_pieces(x: np.ndarray, values: np.ndarray) -> Tuple[float, np.ndarray, float]:
    """
    Integrals of spline(values) * phi over each grid interval and over both tails

    Interval pieces use 3-point Gauss-Legendre on the cubic spline; tails extend the
    spline quadratically.
    """
    spline = CubicSpline(x, values)
    h = x[1] - x[0]
    nodes = x[:-1, None] + 0.5 * h * (1.0 + _GL_NODES)
    pieces = 0.5 * h * (spline(nodes) * _phi(nodes)) @ _GL_WEIGHTS
    lo, hi = float(x[0]), float(x[-1])
    # reflect t -> -t so the lower tail reuses the upper-tail closed form
    left = _upper_tail(-lo, float(values[0]), -float(spline(lo, 1)), float(spline(lo, 2)))
    right = _upper_tail(hi, float(values[-1]), float(spline(hi, 1)), float(spline(hi, 2)))
    return left, pieces, right


def finite_difference(values: np.ndarray, step: float) -> np.ndarray:
    """Fourth-order derivative samples, one-sided at the two points next to each edge"""
    v = np.asarray(values, dtype=float)
    d = np.empty_like(v)
    d[2:-2] = (v[:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) / (12.0 * step)
    d[0] = (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12.0 * step)
    d[1] = (-3 * v[0] - 10 * v[1] + 18 * v[2] - 6 * v[3] + v[4]) / (12.0 * step)
    d[-1] = (25 * v[-1] - 48 * v[-2] + 36 * v[-3] - 16 * v[-4] + 3 * v[-5]) / (12.0 * step)
    d[-2] = (3 * v[-1] + 10 * v[-2] - 18 * v[-3] + 6 * v[-4] - v[-5]) / (12.0 * step)
    return d


def gaussian_expectation(g: GridFunction) -> float:
    """E g(G) for standard normal G, quadratically extrapolating g beyond the grid"""
    left, pieces, right = _phi_weighted_pieces(g.x, g.values)
    return math.fsum([left, *pieces, right])


@dataclass(frozen=True, eq=False)
class SteinSolution:
    """Solution f_g of the Stein equation with finite-difference derivatives"""

    g: GridFunction
    g_mean_gaussian: float
    f: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray
    residual: float

    @property
    def x(self) -> np.ndarray:
        return self.g.x

    @property
    def interior(self) -> slice:
        return slice(BOUNDARY_POINTS, -BOUNDARY_POINTS)

    def sup_norms(self) -> Dict[str, float]:
        core = self.interior
        return {
            "f": float(np.abs(self.f[core]).max()),
            "f1": float(np.abs(self.f1[core]).max()),
            "f2": float(np.abs(self.f2[core]).max()),
            "f3": float(np.abs(self.f3[core]).max()),
        }

    def check_residual(self, tol: float = RESIDUAL_TOLERANCE) -> None:
        """Raise ContractViolation when the ODE residual reaches tol (smooth g only)"""
        if not self.residual < tol:
            raise ContractViolation("stein residual", tol - self.residual, self.g.name)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"x": self.x, "g": self.g.values, "f": self.f, "f1": self.f1, "f2": self.f2, "f3": self.f3}
        )

    def to_dict(self) -> dict:
        return {
            "g": self.g.name,
            "g_mean_gaussian": self.g_mean_gaussian,
            "residual": self.residual,
            "sup_norms": self.sup_norms(),
        }


def stein_solution(g: GridFunction) -> SteinSolution:
    """
    Solve f'(w) - w f(w) = g(w) - E g(G)

    f(w) = int_{-inf}^w h(t) phi(t) dt / phi(w) with h = g - E g(G). The lower integral
    is used for w <= 0 and the equivalent upper integral for w > 0, so neither side
    divides by an underflowed phi.

    Raises:
        StableRangeError: the grid reaches beyond |w| = 30
    """
    x = g.x
    if max(abs(g.lo), abs(g.hi)) > STABLE_RANGE:
        raise StableRangeError(
            f"grid [{g.lo:g}, {g.hi:g}] leaves the stable range |w| <= {STABLE_RANGE:g}"
        )
    mean = gaussian_expectation(g)
    centered = g.values - mean

    left, pieces, right = _phi_weighted_pieces(x, centered)
    below = left + np.concatenate(([0.0], np.cumsum(pieces)))
    above = right + np.concatenate((np.cumsum(pieces[::-1])[::-1], [0.0]))
    f = np.where(x <= 0.0, below, -above) / _phi(x)

    f1 = finite_difference(f, g.step)
    f2 = finite_difference(f1, g.step)
    f3 = finite_difference(f2, g.step)
    core = slice(BOUNDARY_POINTS, -BOUNDARY_POINTS)
    residual = float(np.abs(f1 - x * f - centered)[core].max())
    logger.debug(f"Solved Stein equation for {g.name or 'g'}: residual {residual:.2e}")
    return SteinSolution(g, mean, f, f1, f2, f3, residual)


@dataclass(frozen=True)
class SteinBoundReport:
    """Measured sup-norms of f, f', f'' against 2|g'|, sqrt(2/pi)|g'| and 2|g'|"""

    name: str
    g_prime_sup: float
    f_sup: float
    f1_sup: float
    f2_sup: float
    f2_curve_excess: Optional[float] = None
    f3_curve_excess: Optional[float] = None

    @property
    def bounds(self) -> Dict[str, Tuple[float, float]]:
        d = self.g_prime_sup
        return {
            "f": (self.f_sup, 2.0 * d),
            "f1": (self.f1_sup, math.sqrt(2.0 / math.pi) * d),
            "f2": (self.f2_sup, 2.0 * d),
        }

    def slacks(self) -> Dict[str, float]:
        slacks = {key: bound - measured for key, (measured, bound) in self.bounds.items()}
        if self.f2_curve_excess is not None:
            slacks["f2_curve"] = -self.f2_curve_excess
        if self.f3_curve_excess is not None:
            slacks["f3_curve"] = -self.f3_curve_excess
        return slacks

    def holds(self, tol: float = RESIDUAL_TOLERANCE) -> bool:
        return all(s >= -tol for s in self.slacks().values())

    def check(self, tol: float = RESIDUAL_TOLERANCE) -> None:
        for key, slack in self.slacks().items():
            if slack < -tol:
                raise ContractViolation(f"stein bound {key}", slack, self.name)

    def to_dict(self) -> dict:
        return {
            "g": self.name,
            "g_prime_sup": self.g_prime_sup,
            "bounds": {k: {"measured": m, "bound": b} for k, (m, b) in self.bounds.items()},
            "f2_curve_excess": self.f2_curve_excess,
            "f3_curve_excess": self.f3_curve_excess,
        }


def _reject_unbounded(g_prime: np.ndarray, name: str) -> None:
    magnitude = np.abs(g_prime)
    peak = magnitude.max()
    edge = max(8, len(magnitude) // 100)
    # each run is ordered towards its grid edge
    for run in (magnitude[:edge][::-1], magnitude[-edge:]):
        if run[-1] >= peak * (1 - 1e-12) and np.all(np.diff(run) > 0):
            raise UnboundedDerivativeError(
                f"|{name or 'g'}'| peaks at the grid edge and is still growing there"
            )


def _second_derivative_curve(x: np.ndarray, h1: np.ndarray, step: float) -> np.ndarray:
    """|h'| + |A int_{-inf}^x h' Phi + B int_x^inf h' (1 - Phi)|, the pointwise f'' bound"""
    cdf, sf = ndtr(x), ndtr(-x)
    lower = cumulative_simpson(h1 * cdf, dx=step, initial=0.0)
    upper = cumulative_simpson((h1 * sf)[::-1], dx=step, initial=0.0)[::-1]
    # constant extension of h' beyond the grid
    lower += h1[0] * (x[0] * cdf[0] + _phi(x[0]))
    upper += h1[-1] * (_phi(x[-1]) - x[-1] * sf[-1])
    a = (1.0 + x * x) * _mills(x) - x
    b = (1.0 + x * x) * _mills(-x) + x
    return np.abs(h1) + np.abs(a * lower + b * upper)


def stein_bound_report(g: GridFunction, solution: Optional[SteinSolution] = None) -> SteinBoundReport:
    """
    Compare the solution's sup-norms with the classical bounds driven by |g'|

    When g carries analytic derivative samples, the pointwise f'' curve is compared
    as well, and with second-derivative samples the f''' curve
    2 (sqrt(2/pi) + |x|) |g'| + |g''|. Curves are compared on |x| <= 8.

    Raises:
        UnboundedDerivativeError: |g'| grows without bound towards a grid edge
    """
    g_prime = g.derivative if g.derivative is not None else finite_difference(g.values, g.step)
    _reject_unbounded(g_prime, g.name)
    solution = solution or stein_solution(g)
    core = solution.interior
    g_prime_sup = float(np.abs(g_prime[core]).max())
    norms = solution.sup_norms()

    x = g.x
    window = np.zeros(len(x), dtype=bool)
    window[core] = True
    window &= np.abs(x) <= COMPARISON_REACH
    f2_excess = f3_excess = None
    if g.derivative is not None:
        curve = _second_derivative_curve(x, g.derivative, g.step)
        f2_excess = float((np.abs(solution.f2) - curve)[window].max())
    if g.second_derivative is not None:
        g_second_sup = float(np.abs(g.second_derivative[core]).max())
        curve = 2.0 * (math.sqrt(2.0 / math.pi) + np.abs(x)) * g_prime_sup + g_second_sup
        f3_excess = float((np.abs(solution.f3) - curve)[window].max())

    report = SteinBoundReport(
        name=g.name,
        g_prime_sup=g_prime_sup,
        f_sup=norms["f"],
        f1_sup=norms["f1"],
        f2_sup=norms["f2"],
        f2_curve_excess=f2_excess,
        f3_curve_excess=f3_excess,
    )
    logger.info(f"Computed Stein bounds for {g.name or 'g'}: |g'| = {g_prime_sup:.4g}")
    return report
