"""
Gaussian Minorization
Lower bounds p(x) >= l1 exp(-l2 x^2 / 2) for full-support summands
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from loguru import logger
from scipy.optimize import minimize_scalar

from src.distributions.families import DistributionSpec
from src.errors import InvalidParameterError, NotMinorizableError

SEARCH_HALF_WIDTH = 50.0
SEARCH_POINTS = 20001


@dataclass(frozen=True)
class MinorizationParams:
    """Gaussian minorant constants of one summand or of a summand list"""

    l1: float
    l2: float
    delta1: float = 1.0
    A_n_fraction: float = 1.0  # fraction of summands minorized

    def __post_init__(self):
        if not self.l1 > 0:
            raise InvalidParameterError("l1", f"must be positive, got {self.l1}")
        if not self.l2 > 0:
            raise InvalidParameterError("l2", f"must be positive, got {self.l2}")
        if not 0 < self.delta1 <= 1:
            raise InvalidParameterError("delta1", f"must lie in (0, 1], got {self.delta1}")

    @property
    def l3(self) -> float:
        return max(1.0, -math.log(self.l1 * math.sqrt(2 * math.pi / self.l2)))

    @property
    def delta1_exceeds_quarter(self) -> bool:
        return self.delta1 > 0.25

    @property
    def satisfies_assumption(self) -> bool:
        return self.A_n_fraction >= self.delta1

    def bound(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.l1 * np.exp(-0.5 * self.l2 * x * x)


def natural_decay(spec: DistributionSpec) -> Optional[float]:
    """Quadratic decay l2 that dominates the family's tails, None without full support"""
    if not spec.full_support:
        return None
    if spec.family == "laplace":
        return 1.0 / spec.params[0] ** 2
    if spec.family == "logistic":
        return 1.0 / spec.params[0] ** 2
    var_max = max(var for _, _, var in spec.components)
    widest = [mu for _, mu, var in spec.components if var == var_max]
    # an offset widest component needs a strictly faster decay to stay bounded below
    return 1.0 / var_max if all(mu == 0.0 for mu in widest) else 2.0 / var_max


def _tail_limit(spec: DistributionSpec, l2: float) -> float:
    """Limit of log p(x) + l2 x^2 / 2 as |x| grows (inf when it diverges)"""
    if spec.family not in ("gaussian", "gaussian_mixture"):
        return math.inf
    var_max = max(var for _, _, var in spec.components)
    widest = [(w, mu) for w, mu, var in spec.components if var == var_max]
    if math.isclose(l2 * var_max, 1.0, rel_tol=1e-12) and all(mu == 0.0 for _, mu in widest):
        weight = sum(w for w, _ in widest)
        return math.log(weight / math.sqrt(2 * math.pi * var_max))
    return math.inf


def minorization_params(spec: DistributionSpec) -> Optional[MinorizationParams]:
    """
    Largest l1 at the family's natural decay l2

    Returns:
        MinorizationParams, or None for compact-support families
    """
    l2 = natural_decay(spec)
    if l2 is None:
        return None

    if spec.family == "gaussian" and spec.params[0] == 0.0:
        return MinorizationParams(l1=1.0 / math.sqrt(2 * math.pi * spec.params[1]), l2=l2)
    if spec.family == "laplace":
        b = spec.params[0]
        return MinorizationParams(l1=math.exp(-0.5) / (2 * b), l2=l2)
    if spec.family == "logistic":
        return MinorizationParams(l1=1.0 / (4 * spec.params[0]), l2=l2)

    # log-domain search for inf_x p(x) exp(l2 x^2 / 2)
    def objective(x):
        return spec.logpdf(x) + 0.5 * l2 * np.square(x)

    xs = np.linspace(-SEARCH_HALF_WIDTH, SEARCH_HALF_WIDTH, SEARCH_POINTS)
    values = objective(xs)
    i = int(np.argmin(values))
    spacing = xs[1] - xs[0]
    refined = minimize_scalar(
        lambda x: float(objective(x)),
        bounds=(xs[i] - spacing, xs[i] + spacing),
        method="bounded",
        options={"xatol": 1e-12},
    )
    best = min(float(values[i]), float(refined.fun), _tail_limit(spec, l2))
    l1 = math.exp(best) * (1 - 1e-12)
    logger.debug(f"Minorized {spec.label}: l1={l1:.10g}, l2={l2:.10g}")
    return MinorizationParams(l1=l1, l2=l2)


def common_minorization(
    specs: Sequence[DistributionSpec], delta1: float = 1.0
) -> MinorizationParams:
    """
    One (l1, l2) pair valid for every minorizable summand in the list

    A_n_fraction records how many summands are covered; the minorant is the
    smallest l1 and largest l2 over them.
    """
    found = [minorization_params(s) for s in specs]
    usable = [m for m in found if m is not None]
    if not usable:
        raise NotMinorizableError("no summand admits a Gaussian minorant (compact support)")
    fraction = len(usable) / len(found)
    params = MinorizationParams(
        l1=min(m.l1 for m in usable),
        l2=max(m.l2 for m in usable),
        delta1=delta1,
        A_n_fraction=fraction,
    )
    if not params.satisfies_assumption:
        logger.warning(
            f"Only {fraction:.2%} of summands are minorized, below delta1={delta1}"
        )
    return params
