"""
Minorant Propagation and Tail Lower Bounds
Gaussian minorants of normalized sums and the double-exponential tail bound they imply
"""

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from loguru import logger

from src.distributions.families import DistributionSpec
from src.distributions.functionals import cycle_specs
from src.distributions.minorization import MinorizationParams
from src.errors import InvalidParameterError, NotMinorizableError
from src.grid.convolution import fft_convolve, normalized_sum_density
from src.grid.grid_density import GridDensity, GridSpec, default_grid

MARGIN_TOLERANCE = 1e-12
INDUCTION_TOLERANCE = 1e-8
# zeros of a full-support density below this fraction of its peak are underflow
UNRESOLVED_FRACTION = 1e-13
MINORANT_SEARCH = np.linspace(-50.0, 50.0, 20001)
RESCALE_TARGET_A = 8.0


def minorant_log_bound(x, l1: float, l2: float, n: int) -> np.ndarray:
    """log of l1 (l1 sqrt(2 pi / l2))^(n-1) exp(-l2 x^2 / 2)"""
    x = np.asarray(x, dtype=float)
    growth = math.log(l1) + 0.5 * math.log(2 * math.pi / l2)
    return math.log(l1) + (n - 1) * growth - 0.5 * l2 * x * x


def _unresolved(values: np.ndarray, log_bound: np.ndarray, full_support: bool) -> np.ndarray:
    if not full_support:
        return np.zeros(values.shape, dtype=bool)
    tiny = UNRESOLVED_FRACTION * values.max()
    with np.errstate(over="ignore"):
        return (values <= 0.0) & (np.exp(log_bound) < tiny)


def _require_minorized(spec: DistributionSpec, l1: float, l2: float) -> None:
    if not spec.full_support:
        raise NotMinorizableError(f"{spec.label} has compact support and no Gaussian minorant")
    gap = spec.logpdf(MINORANT_SEARCH) - (math.log(l1) - 0.5 * l2 * MINORANT_SEARCH ** 2)
    worst = float(gap.min())
    if worst < -1e-9:
        raise NotMinorizableError(
            f"{spec.label} is not minorized by l1={l1:.6g}, l2={l2:.6g} (log gap {worst:.3e})"
        )


class MinorantCheck(NamedTuple):
    holds: bool
    min_margin: float
    min_log_ratio: float
    unresolved: int
    induction_slack: Optional[float]


def _minorant_grid(summands: Sequence[DistributionSpec], n: int) -> GridSpec:
    spread = math.sqrt(math.fsum(s.variance for s in summands) / n)
    base = default_grid(n)
    return default_grid(n, step=base.step, L=max(base.hi, 16.0 * spread))


def _induction_slack(
    specs: Sequence[DistributionSpec],
    n: int,
    l1: float,
    l2: float,
    grid: GridSpec,
    q_n: GridDensity,
    method: str,
) -> float:
    """min of q_n - (density of S_(n-1)/sqrt(n)) * (minorant of X_n/sqrt(n))"""
    head = normalized_sum_density(specs, n - 1, grid, method=method, scale=math.sqrt(n))
    x = grid.x
    last = math.sqrt(n) * l1 * np.exp(-0.5 * l2 * n * x * x)
    full = fft_convolve(head.values, last) * grid.step
    offset = int(round(-grid.lo / grid.step))
    predicted = full[offset:offset + grid.count]
    return float((q_n.values - predicted).min())


def minorant_propagation_check(
    l1: float,
    l2: float,
    specs: Sequence[DistributionSpec],
    n: int,
    grid: Optional[GridSpec] = None,
    method: str = "spectral",
) -> MinorantCheck:
    """
    Check q_n(x) >= l1 (l1 sqrt(2 pi / l2))^(n-1) exp(-l2 x^2 / 2) on the grid

    q_n is the density of (X_1 + ... + X_n) / sqrt(n). For n >= 2 the induction step
    is checked too: q_n dominates the computed q_(n-1) (rescaled) convolved with the
    minorant of the last summand.

    Raises:
        NotMinorizableError: a summand is not bounded below by the minorant
    """
    MinorizationParams(l1=l1, l2=l2)
    summands = cycle_specs(specs, n)
    for spec in set(summands):
        _require_minorized(spec, l1, l2)

    grid = grid or _minorant_grid(summands, n)
    if n == 1:
        # base case: the summand density itself, without grid renormalization
        first = summands[0]
        q_n = GridDensity(grid.lo, grid.step, first.pdf(grid.x), full_support=True, label=first.label)
    else:
        q_n = normalized_sum_density(summands, n, grid, method=method, scale=math.sqrt(n))
    log_bound = minorant_log_bound(grid.x, l1, l2, n)
    skip = _unresolved(q_n.values, log_bound, q_n.full_support)
    values, log_bound = q_n.values[~skip], log_bound[~skip]

    margin = float((values - np.exp(log_bound)).min())
    with np.errstate(divide="ignore"):
        log_ratio = float((np.log(values) - log_bound).min())
    induction = None
    if n >= 2:
        induction = _induction_slack(summands, n, l1, l2, grid, q_n, method)

    holds = margin >= -MARGIN_TOLERANCE
    if induction is not None:
        holds = holds and induction >= -INDUCTION_TOLERANCE
    if skip.any():
        logger.warning(f"Minorant check n={n}: {int(skip.sum())} unresolved grid points excluded")
    logger.info(f"Checked minorant propagation n={n}: margin {margin:.3e}, holds={holds}")
    return MinorantCheck(holds, margin, log_ratio, int(skip.sum()), induction)


@dataclass(frozen=True)
class RescaleSuggestion:
    """Parameters after replacing every X_i by c X_i"""

    c: float
    J: float
    M: float
    l1: float
    l2: float
    a: float


@dataclass(frozen=True)
class TailBoundParams:
    """
    Constants of the lower bound p_n(x) >= k1 exp(-n^s k2 exp(x^2 / (2a))) for |x| > v sqrt(ln n)

    The bound is usable only when a > 1 and (a / (a - 1)) (1/2 + s) < 2.
    """

    a: float
    k1: float
    k2: float
    s: float
    v: float
    rescale: Optional[RescaleSuggestion] = None

    def __post_init__(self):
        for name in ("a", "k1", "k2", "s"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(name, f"must be positive, got {getattr(self, name)}")
        if self.v < 0:
            raise InvalidParameterError("v", f"must be nonnegative, got {self.v}")

    @property
    def a_exceeds_one(self) -> bool:
        return self.a > 1.0

    @property
    def constraint_value(self) -> float:
        return self.a / (self.a - 1.0) * (0.5 + self.s) if self.a_exceeds_one else math.inf

    @property
    def constraint_holds(self) -> bool:
        return self.constraint_value < 2.0

    def log_bound(self, x, n: int) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore"):
            return math.log(self.k1) - n ** self.s * self.k2 * np.exp(x * x / (2.0 * self.a))

    def to_dict(self) -> dict:
        data = asdict(self)
        data.update(
            a_exceeds_one=self.a_exceeds_one,
            constraint_value=self.constraint_value,
            constraint_holds=self.constraint_holds,
        )
        return data


def minorant_tail_params(l1: float, l2: float, a0: float, v0: float) -> TailBoundParams:
    """Tail-bound constants of (X_1 + ... + X_n)/sqrt(n) when every summand has the minorant"""
    l3 = MinorizationParams(l1=l1, l2=l2).l3
    return TailBoundParams(a=a0, k1=l1, k2=l2 + l3, s=1.0, v=v0)


def tail_bound_params(
    J: float, M: float, delta0: float, delta1: float, l1: float, l2: float
) -> TailBoundParams:
    """
    Tail-bound constants of W_n from the minorization and moment constants

    k1 = l1 sqrt(1 / (4J)), s = 1, k2 = l2 + l3, a = delta1 / M^(2/(4+delta0)), v = 1.
    When the constraint fails, a rescale X -> c X reaching a = 8 is attached.
    """
    for name, value in (("J", J), ("M", M), ("delta0", delta0)):
        if not value > 0:
            raise InvalidParameterError(name, f"must be positive, got {value}")
    if not 0 < delta1 <= 1.0:
        raise InvalidParameterError("delta1", f"must lie in (0, 1], got {delta1}")
    if delta1 <= 0.25:
        logger.warning(f"delta1={delta1} is at or below 1/4")
    l3 = MinorizationParams(l1=l1, l2=l2).l3
    power = 2.0 / (4.0 + delta0)
    a = delta1 / M ** power
    params = TailBoundParams(a=a, k1=math.sqrt(1.0 / (4.0 * J)) * l1, k2=l2 + l3, s=1.0, v=1.0)
    if params.constraint_holds:
        return params

    target_M = (delta1 / RESCALE_TARGET_A) ** (1.0 / power)
    c = (target_M / M) ** (1.0 / (4.0 + delta0))
    suggestion = RescaleSuggestion(
        c=c, J=J / (c * c), M=target_M, l1=l1 / c, l2=l2 / (c * c), a=RESCALE_TARGET_A
    )
    logger.warning(
        f"Tail bound constraint fails (a={a:.4g}); "
        f"rescaling by c={c:.4g} reaches a={RESCALE_TARGET_A:g}"
    )
    return TailBoundParams(a=a, k1=params.k1, k2=params.k2, s=1.0, v=1.0, rescale=suggestion)


class TailBoundCheck(NamedTuple):
    holds: bool
    min_margin: float
    tail_statistic: float
    points_checked: int
    unresolved: int


def tail_bound_check(p_n: GridDensity, params: TailBoundParams, n: int) -> TailBoundCheck:
    """
    Log-domain check of p_n(x) >= k1 exp(-n^s k2 exp(x^2/(2a))) on |x| > v sqrt(ln n)

    Hard zeros give a -inf margin unless they are underflow of a full-support density
    far below the bound's scale. tail_statistic is the smallest
    exp(-x^2/(2a)) ln p_n(x) / n^s over the two outermost resolved points.
    """
    if n < 2:
        raise InvalidParameterError("n", f"tail bound needs n >= 2, got {n}")
    x = p_n.x
    region = np.abs(x) > params.v * math.sqrt(math.log(n))
    if not region.any():
        raise InvalidParameterError("v", "the grid does not reach |x| > v sqrt(ln n)")

    log_bound = params.log_bound(x, n)
    skip = _unresolved(p_n.values, log_bound, p_n.full_support) & region
    checked = region & ~skip
    with np.errstate(divide="ignore", invalid="ignore"):
        log_p = np.log(p_n.values)
        margins = log_p[checked] - log_bound[checked]
    margin = float(margins.min()) if margins.size else math.inf

    resolved = np.flatnonzero(checked & (p_n.values > 0))
    statistic = math.nan
    if resolved.size:
        ends = resolved[[0, -1]]
        weights = np.exp(-x[ends] ** 2 / (2.0 * params.a))
        statistic = float((weights * log_p[ends] / n ** params.s).min())

    result = TailBoundCheck(margin >= 0.0, margin, statistic, int(checked.sum()), int(skip.sum()))
    logger.info(f"Checked tail lower bound n={n}: log margin {margin:.4g}, holds={result.holds}")
    return result
