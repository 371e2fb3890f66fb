"""
Convolution Engine
Densities of sums of independent summands by zero-padded FFT convolution
"""

import math
from dataclasses import replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.integrate import trapezoid

from src.distributions.families import DistributionSpec
from src.distributions.functionals import cycle_specs
from src.errors import InvalidParameterError, OverflowDomainError, StepMismatchError
from src.grid.grid_density import (
    MASS_TOLERANCE,
    GridDensity,
    GridSpec,
    covering_grid,
    default_grid,
    discretize_on,
)

METHODS = ("spectral", "direct")
TILT_SAFETY = 0.9


def _next_power_of_two(size: int) -> int:
    return 1 << max(size - 1, 1).bit_length()


def fft_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full linear convolution of two sample arrays, padded to a power of two"""
    occupied = len(a) + len(b) - 1
    size = _next_power_of_two(max(occupied, 2 * max(len(a), len(b))))
    spectrum = np.fft.rfft(a, size) * np.fft.rfft(b, size)
    return np.fft.irfft(spectrum, size)[:occupied]


def _overlap_trapezoid(p: GridDensity, q: GridDensity) -> np.ndarray:
    """
    int p(t) q(x - t) dt at every output node, by the trapezoid rule over the overlap
    of the nonzero runs of p and q

    A known support adds the fractional cells between the outermost nodes and the
    exact ends of the overlap, so jumps off the grid cost no accuracy.
    """
    a, b, h = p.values, q.values, p.step
    full = fft_convolve(a, b)
    nonzero_a, nonzero_b = np.flatnonzero(a), np.flatnonzero(b)
    if not len(nonzero_a) or not len(nonzero_b):
        return h * full
    k = np.arange(len(full))
    first = np.maximum(nonzero_a[0], k - nonzero_b[-1])
    last = np.minimum(nonzero_a[-1], k - nonzero_b[0])
    overlapping = first <= last
    first = np.clip(first, 0, len(a) - 1)
    last = np.clip(last, 0, len(a) - 1)
    at_first = a[first] * b[np.clip(k - first, 0, len(b) - 1)]
    at_last = a[last] * b[np.clip(k - last, 0, len(b) - 1)]

    a_lo, a_hi = p.support or (-math.inf, math.inf)
    b_lo, b_hi = q.support or (-math.inf, math.inf)
    x = p.lo + q.lo + h * k
    start = np.maximum(a_lo, x - b_hi)
    end = np.minimum(a_hi, x - b_lo)
    frac_lo = np.where(np.isfinite(start), np.clip((p.lo + h * first - start) / h, 0.0, 1.0), 0.0)
    frac_hi = np.where(np.isfinite(end), np.clip((end - p.lo - h * last) / h, 0.0, 1.0), 0.0)
    correction = (0.5 - frac_lo) * at_first + (0.5 - frac_hi) * at_last
    return h * (full - np.where(overlapping, correction, 0.0))


def _clip_ripple(values: np.ndarray, step: float) -> Tuple[np.ndarray, float]:
    negative = values < 0
    clipped = float(trapezoid(np.where(negative, -values, 0.0), dx=step))
    return np.where(negative, 0.0, values), clipped


def _crop(density: GridDensity, domain: GridSpec, target_mass: float) -> GridDensity:
    offset = (domain.lo - density.lo) / density.step
    start = int(round(offset))
    if abs(offset - start) > 1e-6:
        raise StepMismatchError(f"domain [{domain.lo}, {domain.hi}] is not aligned with the grid")
    stop = start + domain.count
    inside_lo, inside_hi = max(start, 0), min(stop, density.count)
    kept = np.zeros(domain.count)
    kept[inside_lo - start:inside_hi - start] = density.values[inside_lo:inside_hi]
    outside = density.mass - float(trapezoid(kept, dx=density.step))
    if outside > MASS_TOLERANCE * max(target_mass, 1.0):
        raise OverflowDomainError(
            f"mass {outside:.3e} falls outside the working domain [{domain.lo}, {domain.hi}]"
        )
    cropped = replace(density, lo=domain.lo, values=kept)
    return cropped.renormalized(target_mass) if cropped.mass > 0 else cropped


def convolve_pair(
    p: GridDensity, q: GridDensity, domain: Optional[GridSpec] = None
) -> GridDensity:
    """
    Density of the sum of independent variables with laws p and q

    Args:
        p, q: densities on grids with equal step
        domain: optional working grid to crop the result to; cropping more than
            the mass tolerance raises OverflowDomainError

    Returns:
        GridDensity spanning [p.lo + q.lo, p.hi + q.hi] (or the domain)
    """
    if not math.isclose(p.step, q.step, rel_tol=1e-12):
        raise StepMismatchError(f"step mismatch: {p.step} vs {q.step}")

    # canonical operand order keeps the result bit-identical under swapping
    a, b = sorted((p, q), key=lambda d: (d.lo, d.count, d.values.tobytes()))
    raw = _overlap_trapezoid(a, b)
    support = None
    if a.support is not None and b.support is not None:
        support = (a.support[0] + b.support[0], a.support[1] + b.support[1])
        x = a.lo + b.lo + a.step * np.arange(len(raw))
        raw = np.where((x >= support[0] - 1e-12) & (x <= support[1] + 1e-12), raw, 0.0)
    values, clipped = _clip_ripple(raw, a.step)
    target = p.mass * q.mass
    result = GridDensity(
        a.lo + b.lo,
        a.step,
        values,
        full_support=p.full_support or q.full_support,
        clipped_mass=clipped,
        support=support,
    ).renormalized(target)
    if clipped > 0:
        logger.debug(f"Clipped {clipped:.2e} of negative ripple in convolution")
    if domain is not None:
        result = _crop(result, domain, target)
    return result


def _grouped(specs: Sequence[DistributionSpec]) -> List[Tuple[DistributionSpec, int]]:
    counts: Dict[DistributionSpec, int] = {}
    for spec in specs:
        counts[spec] = counts.get(spec, 0) + 1
    return list(counts.items())


def _power(values: np.ndarray, count: int) -> np.ndarray:
    """values**count by repeated squaring"""
    result = None
    base = values
    while count:
        if count & 1:
            result = base if result is None else result * base
        count >>= 1
        if count:
            base = base * base
    return result


def _tilted_density(
    groups: List[Tuple[DistributionSpec, int]],
    scale: float,
    grid: GridSpec,
    size: int,
    theta: float,
) -> Tuple[np.ndarray, float]:
    """
    Density of the exponentially tilted sum on the grid, and log E exp(theta W)

    The tilted transform is E exp((theta + it) W) / E exp(theta W); theta = 0 gives
    the plain characteristic function.
    """
    t = 2 * np.pi * np.arange(size // 2 + 1) / (size * grid.step)
    transform = np.ones(t.shape, dtype=complex)
    log_mgf = 0.0
    for spec, count in groups:
        at_theta = float(spec.mgf(theta / scale).real)
        ratio = spec.mgf((theta + 1j * t) / scale) / at_theta
        transform = transform * _power(ratio, count)
        log_mgf += count * math.log(at_theta)
    shifted = transform * np.exp(-1j * t * grid.lo)
    lattice = np.fft.irfft(np.conj(shifted), size)[: grid.count]
    return lattice / grid.step, log_mgf


def _spectral_sum(
    groups: List[Tuple[DistributionSpec, int]], scale: float, grid: GridSpec
) -> np.ndarray:
    size = _next_power_of_two(2 * grid.count)
    reach = math.ceil(max(abs(grid.lo), abs(grid.hi)))
    limit = min(spec.tilt_limit for spec, _ in groups) * scale * TILT_SAFETY
    top = reach if not math.isfinite(limit) else min(reach, math.floor(limit))
    x = grid.x

    best = np.zeros(grid.count)
    best_error = np.full(grid.count, np.inf)
    for theta in range(-top, top + 1):
        tilted, log_mgf = _tilted_density(groups, scale, grid, size, float(theta))
        # round-off of the tilted lattice is relative to its peak; undoing the tilt
        # scales it by exp(log_mgf - theta x), so keep the tilt with the smallest bound
        log_error = math.log(np.abs(tilted).max()) + log_mgf - theta * x
        use = log_error < best_error
        with np.errstate(over="ignore", invalid="ignore"):
            untilted = tilted * np.exp(np.where(use, log_mgf - theta * x, 0.0))
        best = np.where(use, untilted, best)
        best_error = np.where(use, log_error, best_error)
    logger.debug(f"Spectral sum used {2 * top + 1} tilts on {grid.count} points")
    return best


def _support_mask(
    groups: List[Tuple[DistributionSpec, int]], scale: float, grid: GridSpec
) -> Optional[np.ndarray]:
    """Grid points inside the support of a compact-support sum; None for full support"""
    if any(spec.full_support for spec, _ in groups):
        return None
    lo = math.fsum(count * spec.support[0] for spec, count in groups) / scale
    hi = math.fsum(count * spec.support[1] for spec, count in groups) / scale
    x = grid.x
    return (x >= lo - 1e-12) & (x <= hi + 1e-12)


def _direct_sum(
    groups: List[Tuple[DistributionSpec, int]], scale: float, grid: GridSpec
) -> GridDensity:
    total: Optional[GridDensity] = None
    for spec, count in groups:
        base = discretize_on(spec.scaled(1.0 / scale), grid)
        group: Optional[GridDensity] = None
        while count:
            if count & 1:
                group = base if group is None else convolve_pair(group, base, grid)
            count >>= 1
            if count:
                base = convolve_pair(base, base, grid)
        total = group if total is None else convolve_pair(total, group, grid)
    return total


def normalized_sum_density(
    specs: Sequence[DistributionSpec],
    n: int,
    grid: Optional[GridSpec] = None,
    method: str = "spectral",
    scale: Optional[float] = None,
) -> GridDensity:
    """
    Density p_n of W_n = (X_1 + ... + X_n) / scale on the working grid

    Args:
        specs: summand list, cycled to length n
        n: number of summands
        grid: working grid (default_grid(n) when omitted, widened to the law's tail at n = 1)
        method: "spectral" multiplies analytic transforms on the FFT lattice,
            "direct" convolves discretized summands pairwise
        scale: normalization, sqrt(B_n) by default

    Returns:
        GridDensity of W_n
    """
    if method not in METHODS:
        raise InvalidParameterError("method", f"expected one of {METHODS}, got '{method}'")
    summands = cycle_specs(specs, n)
    if scale is None:
        scale = math.sqrt(math.fsum(s.variance for s in summands))
    if not scale > 0:
        raise InvalidParameterError("scale", f"must be positive, got {scale}")
    if grid is None:
        grid = covering_grid([summands[0].scaled(1.0 / scale)]) if n == 1 else default_grid(n)
    groups = _grouped(summands)
    full_support = any(s.full_support for s in summands)
    label = f"W_{n}[" + "+".join(f"{c}x{s.label}" for s, c in groups) + "]"

    if n == 1:
        density = discretize_on(summands[0].scaled(1.0 / scale), grid)
        return replace(density, label=label)

    # transform round-off outside a compact support is not density
    inside = _support_mask(groups, scale, grid)
    if method == "direct":
        density = _direct_sum(groups, scale, grid)
        if inside is not None:
            density = replace(density, values=np.where(inside, density.values, 0.0))
        density = replace(density, full_support=full_support, label=label)
    else:
        raw = _spectral_sum(groups, scale, grid)
        if inside is not None:
            raw = np.where(inside, raw, 0.0)
        values, clipped = _clip_ripple(raw, grid.step)
        density = GridDensity(
            grid.lo,
            grid.step,
            values,
            full_support=full_support,
            clipped_mass=clipped,
            label=label,
        ).renormalized()
        if clipped > 1e-12:
            logger.warning(f"Clipped {clipped:.2e} of negative ripple computing {label}")

    logger.info(f"Computed density of W_{n} on [{grid.lo:g}, {grid.hi:g}] ({method})")
    return density
