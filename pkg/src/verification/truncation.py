"""
Envelope and Truncation Function
The local envelope r(x) of |p_n - phi| and the truncated log-density h1 built from it
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from src.distributions.families import DistributionSpec
from src.errors import InvalidParameterError, SampleSizeTooSmallError
from src.grid.convolution import normalized_sum_density
from src.grid.grid_density import GridDensity, GridFunction, GridSpec, default_grid

ENVELOPE_FLOOR = 1e-6
ENVELOPE_MARGIN = 1e-9
U_RANGE = (1.0, math.sqrt(2.0))
GAP_SAMPLES = 2001

SQRT_2PI = math.sqrt(2.0 * math.pi)


def _phi(x):
    return np.exp(-0.5 * np.square(x)) / SQRT_2PI


def envelope(x, C: float, n: int) -> np.ndarray:
    """r(x) = C/n + C (x^4 + 1) phi(x) / sqrt(n)"""
    x = np.asarray(x, dtype=float)
    return C / n + C * (x ** 4 + 1.0) * _phi(x) / math.sqrt(n)


def calibrate_envelope(
    specs: Sequence[DistributionSpec],
    n: int,
    grid: Optional[GridSpec] = None,
    density: Optional[GridDensity] = None,
    method: str = "spectral",
) -> float:
    """
    Smallest C with |p_n - phi| <= r(x) on the whole grid

    The envelope is linear in C, so C is the largest ratio |p_n - phi| / r_1(x)
    (r_1 the envelope at C = 1), widened by a relative margin and floored at 1e-6.
    """
    if density is None:
        density = normalized_sum_density(specs, n, grid or default_grid(n), method=method)
    x = density.x
    ratio = np.abs(density.values - _phi(x)) / envelope(x, 1.0, n)
    C = max(float(ratio.max()) * (1.0 + ENVELOPE_MARGIN), ENVELOPE_FLOOR)
    logger.debug(f"Calibrated envelope n={n}: C={C:.6g} (peak ratio at x={x[ratio.argmax()]:.3f})")
    return C


def _log_gap(x, C: float, n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """ln(phi - r) with its first two derivatives"""
    x = np.asarray(x, dtype=float)
    a = C / math.sqrt(n)
    phi = _phi(x)
    damp = 1.0 - a * (x ** 4 + 1.0)
    q = phi * damp - C / n
    q1 = -x * phi * damp - 4.0 * a * x ** 3 * phi
    q2 = phi * ((x * x - 1.0) * damp + 8.0 * a * x ** 4 - 12.0 * a * x * x)
    slope = q1 / q
    return np.log(q), slope, q2 / q - slope * slope


def _smoothstep(t: np.ndarray):
    """S(t) = 3t^2 - 2t^3 with its integral from 0 and its derivative"""
    t2 = t * t
    return t2 * (3.0 - 2.0 * t), t2 * t * (1.0 - 0.5 * t), 6.0 * t * (1.0 - t)


def _bump(t: np.ndarray):
    """B(t) = t (1 - t)^2 with its integral from 0 and its derivative"""
    u = 1.0 - t
    return t * u * u, t * t * (0.5 - 2.0 * t / 3.0 + 0.25 * t * t), u * (1.0 - 3.0 * t)


@dataclass(frozen=True)
class _Ramp:
    """
    Outer part of h1 on s = |x| - x_u >= 0

    Over join_width the slope moves from d0 (with derivative c0) to +budget, stays at
    +budget for straight_width, then bends to zero over landing_width, where the value
    reaches 0. Value, slope and curvature are continuous throughout.
    """

    h0: float
    d0: float
    c0: float
    budget: float
    join_width: float
    straight_width: float
    landing_width: float

    @property
    def length(self) -> float:
        return self.join_width + self.straight_width + self.landing_width

    @property
    def join_rise(self) -> float:
        w1 = self.join_width
        return 0.5 * w1 * (self.d0 + self.budget) + self.c0 * w1 * w1 / 12.0

    def __call__(self, s: np.ndarray):
        b, w1, w2 = self.budget, self.join_width, self.landing_width
        value = np.zeros_like(s)
        slope = np.zeros_like(s)
        curvature = np.zeros_like(s)

        join = s < w1
        t = s[join] / w1
        step, area, bend = _smoothstep(t)
        hump, hump_area, hump_bend = _bump(t)
        rise = b - self.d0
        value[join] = self.h0 + w1 * (self.d0 * t + rise * area + self.c0 * w1 * hump_area)
        slope[join] = self.d0 + rise * step + self.c0 * w1 * hump
        curvature[join] = rise * bend / w1 + self.c0 * hump_bend

        h_join = self.h0 + self.join_rise
        straight = (s >= w1) & (s < w1 + self.straight_width)
        value[straight] = h_join + b * (s[straight] - w1)
        slope[straight] = b

        landing = (s >= w1 + self.straight_width) & (s < self.length)
        t = (s[landing] - w1 - self.straight_width) / w2
        step, area, bend = _smoothstep(t)
        value[landing] = h_join + b * self.straight_width + b * w2 * (t - area)
        slope[landing] = b * (1.0 - step)
        curvature[landing] = -b * bend / w2
        return np.minimum(value, 0.0), slope, curvature


def _fit_ramp(h0: float, d0: float, c0: float, budget: float, curvature_budget: float) -> _Ramp:
    """
    Ramp from (h0, d0, c0) up to zero

    The bends get the widths that keep |h1''| near curvature_budget. The join is also
    capped so that the c0 bump keeps the slope within [-budget, budget]. When the rise
    -h0 is too short for both bends, they shrink by a common factor and the straight
    part vanishes.
    """
    join = 1.5 * (budget - d0) / curvature_budget
    # B peaks at 4/27; its slope excursion is c0 * join * B
    if c0 < 0 and budget + d0 > 0:
        join = min(join, 27.0 * (budget + d0) / (4.0 * -c0))
    elif c0 > 0:
        join = min(join, 3.0 * (budget - d0) / c0)
    landing = 1.5 * budget / curvature_budget

    rise = -h0
    linear = 0.5 * join * (d0 + budget) + 0.5 * budget * landing
    quadratic = c0 * join * join / 12.0
    if linear + quadratic > rise:
        # smallest positive root of quadratic * k^2 + linear * k = rise
        shrink = 2.0 * rise / (linear + math.sqrt(linear * linear + 4.0 * quadratic * rise))
        join, landing = join * shrink, landing * shrink
        straight = 0.0
    else:
        straight = (rise - linear - quadratic) / budget
    return _Ramp(h0, d0, c0, budget, join, straight, landing)


def _evaluate(x, x_u: float, ramp: _Ramp, C: float, n: int):
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    value = np.zeros_like(ax)
    slope = np.zeros_like(ax)
    curvature = np.zeros_like(ax)

    inner = ax <= x_u
    if inner.any():
        value[inner], slope[inner], curvature[inner] = _log_gap(ax[inner], C, n)
    outer = ~inner
    if outer.any():
        value[outer], slope[outer], curvature[outer] = ramp(ax[outer] - x_u)
    # even function: odd first derivative
    return value, np.where(x < 0, -slope, slope), curvature


@dataclass(frozen=True, eq=False)
class TruncationFunction:
    """
    Even C^2 function h1: ln(phi - r) on |x| <= x_u, then a ramp of slope (ln n)^2 up
    to zero with short bends at both ends, and zero beyond
    """

    u: float
    n: int
    C: float
    x_u: float
    ramp: _Ramp
    feasibility_margin: float  # min over B(u) of (phi - r) - 1/n
    function: GridFunction

    @property
    def slope_budget(self) -> float:
        return math.log(self.n) ** 2

    @property
    def blend_width(self) -> float:
        return self.ramp.length

    @property
    def support_end(self) -> float:
        return self.x_u + self.ramp.length

    def evaluate(self, x) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """h1, h1' and h1'' at arbitrary points"""
        return _evaluate(x, self.x_u, self.ramp, self.C, self.n)

    def properties(self) -> Dict[str, bool]:
        """Structural checks of h1 on its own grid"""
        f = self.function
        x = f.x
        ln_n = math.log(self.n)
        outside = np.abs(x) > self.x_u
        beyond = np.abs(x) >= self.support_end
        mirrored = np.allclose(f.values, f.values[::-1], rtol=0.0, atol=1e-12)
        return {
            "even": bool(mirrored and np.isclose(x[0], -x[-1])),
            "slope_within_budget": bool(np.abs(f.derivative).max() <= self.slope_budget + 1e-9),
            "nonpositive": bool(f.values.max() <= 0.0),
            "bounded_by_2ln_n": bool(np.abs(f.values[outside]).max(initial=0.0) <= 2.0 * ln_n),
            "curvature_within_budget": bool(
                np.abs(f.second_derivative[outside]).max(initial=0.0) <= self.n ** 0.25 + 1e-9
            ),
            "vanishes_beyond_support": bool(np.all(f.values[beyond] == 0.0)),
        }


def build_truncation_function(
    u: float,
    n: int,
    C: float,
    grid: Optional[GridSpec] = None,
    require_feasible: bool = True,
) -> TruncationFunction:
    """
    Truncated log-density h1

    Past x_u the log gap is continued by a straight ramp of slope (ln n)^2 that is
    clipped at zero. Short bends join the ramp to the log gap (matching value, slope
    and curvature) and to zero, so |h1'| never exceeds max(|h1'(x_u)|, (ln n)^2)
    and h1 <= 0 everywhere.

    Args:
        u: radius factor in [1, sqrt(2)); B(u) = {|x| <= u sqrt(ln n)}
        n: sample size
        C: envelope constant
        grid: sampling grid (default_grid(n) when omitted)
        require_feasible: demand phi - r >= 1/n on B(u); otherwise phi - r > 0 suffices

    Raises:
        SampleSizeTooSmallError: phi - r falls below the required level on B(u)
    """
    if not U_RANGE[0] <= u < U_RANGE[1]:
        raise InvalidParameterError("u", f"must lie in [1, sqrt(2)), got {u}")
    if not C > 0:
        raise InvalidParameterError("C", f"must be positive, got {C}")
    if n < 2:
        raise InvalidParameterError("n", f"must be at least 2, got {n}")

    ln_n = math.log(n)
    x_u = u * math.sqrt(ln_n)
    inner = np.linspace(0.0, x_u, GAP_SAMPLES)
    gap = _phi(inner) * (1.0 - C * (inner ** 4 + 1.0) / math.sqrt(n)) - C / n
    margin = float(gap.min()) - 1.0 / n
    if require_feasible and margin < 0:
        raise SampleSizeTooSmallError(
            f"n={n} too small: min of phi - r on |x| <= {x_u:.4f} is {gap.min():.4g} < 1/n"
        )
    if gap.min() <= 0:
        raise SampleSizeTooSmallError(
            f"n={n} too small: phi - r is not positive on |x| <= {x_u:.4f} (C={C:.4g})"
        )

    h0, d0, c0 = (float(v) for v in _log_gap(x_u, C, n))
    if -d0 > ln_n ** 2:
        logger.warning(f"n={n}: log gap slope {d0:.4g} at x_u exceeds the budget (ln n)^2")
    ramp = _fit_ramp(h0, d0, c0, ln_n ** 2, n ** 0.25)

    grid = grid or default_grid(n)
    value, slope, curvature = _evaluate(grid.x, x_u, ramp, C, n)
    function = GridFunction(grid.lo, grid.step, value, slope, curvature, name=f"h1_n{n}")
    result = TruncationFunction(u, n, C, x_u, ramp, margin, function)
    logger.info(f"Initialized h1 for n={n}, u={u:.4f}: x_u={x_u:.4f}, ramp length {ramp.length:.4f}")
    return result
