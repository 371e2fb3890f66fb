"""
Summand Functionals
Fisher information, cumulant summaries and rate-regime classification for summand lists
"""

import math
from dataclasses import dataclass
from itertools import islice, cycle
from typing import List, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy import integrate

from src.distributions.families import DistributionSpec
from src.errors import InfiniteFisherInformationError, InvalidParameterError

MEAN_TOLERANCE = 1e-9


@dataclass(frozen=True)
class CumulantSummary:
    """Aggregate moment quantities of a summand list"""

    n: int
    B_n: float
    gamma3: Tuple[float, ...]  # E X_i^3
    gamma4: Tuple[float, ...]  # E X_i^4 - 3 (E X_i^2)^2
    M: float  # sup_i E|X_i|^(4 + delta0)
    delta0: float
    J: float  # sup_i Fisher information, inf if some summand has none
    variances: Tuple[float, ...] = ()

    @property
    def sum_gamma3(self) -> float:
        return math.fsum(self.gamma3)

    @property
    def sum_gamma4(self) -> float:
        return math.fsum(self.gamma4)

    @property
    def finite_J(self) -> bool:
        return math.isfinite(self.J)

    def invariant_slacks(self) -> dict:
        """Slack of the Cramer-Rao and power-mean invariants (both >= 0 when they hold)"""
        max_var = max(self.variances)
        power = (4 + self.delta0) / 2
        return {
            "cramer_rao": self.J - 1.0 / max_var if self.finite_J else math.inf,
            "power_mean": self.M - max(v ** power for v in self.variances),
        }


def cycle_specs(specs: Sequence[DistributionSpec], n: int) -> List[DistributionSpec]:
    """Repeat a finite summand list cyclically to length n"""
    if n < 1:
        raise InvalidParameterError("n", f"must be at least 1, got {n}")
    if not specs:
        raise InvalidParameterError("families", "at least one summand family is required")
    return list(islice(cycle(specs), n))


def fisher_information(spec: DistributionSpec) -> float:
    """
    Fisher information J = integral of p'^2 / p

    Closed forms for the single-parameter families; adaptive quadrature for mixtures.
    """
    if spec.family == "uniform":
        raise InfiniteFisherInformationError(
            f"{spec.label}: infinite Fisher information (density has jump discontinuities)"
        )
    if spec.family == "gaussian":
        return 1.0 / spec.params[1]
    if spec.family == "laplace":
        return 1.0 / spec.params[0] ** 2
    if spec.family == "logistic":
        return 1.0 / (3.0 * spec.params[0] ** 2)

    comps = spec.components
    sigma_max = math.sqrt(max(var for _, _, var in comps))
    means = sorted(mu for _, mu, _ in comps)
    lo, hi = means[0] - 40 * sigma_max, means[-1] + 40 * sigma_max

    def integrand(x: float) -> float:
        s = float(spec.score(x))
        return s * s * float(spec.pdf(x))

    value, abserr = integrate.quad(
        integrand, lo, hi, points=means, limit=400, epsabs=1e-14, epsrel=1e-12
    )
    logger.debug(f"Fisher information of {spec.label}: {value:.12g} (quad error {abserr:.1e})")
    return value


def cumulant_summary(specs: Sequence[DistributionSpec], delta0: float = 1.0) -> CumulantSummary:
    """
    Exact analytic moment summary of a summand list

    Args:
        specs: summands X_1..X_n, one entry per summand
        delta0: moment exponent offset, M = sup E|X_i|^(4 + delta0)

    Returns:
        CumulantSummary
    """
    if not delta0 > 0:
        raise InvalidParameterError("delta0", f"must be positive, got {delta0}")
    if not specs:
        raise InvalidParameterError("families", "at least one summand family is required")

    # identical specs share one evaluation
    cache = {}
    for spec in specs:
        if spec in cache:
            continue
        m2 = spec.raw_moment(2)
        try:
            J = fisher_information(spec)
        except InfiniteFisherInformationError:
            J = math.inf
        if abs(spec.mean) > MEAN_TOLERANCE:
            logger.warning(f"{spec.label} is not centered (mean {spec.mean:.3g})")
        cache[spec] = (
            spec.variance,
            spec.raw_moment(3),
            spec.raw_moment(4) - 3.0 * m2 * m2,
            spec.absolute_moment(4 + delta0),
            J,
        )

    rows = [cache[s] for s in specs]
    return CumulantSummary(
        n=len(specs),
        B_n=math.fsum(r[0] for r in rows),
        gamma3=tuple(r[1] for r in rows),
        gamma4=tuple(r[2] for r in rows),
        M=max(r[3] for r in rows),
        delta0=delta0,
        J=max(r[4] for r in rows),
        variances=tuple(r[0] for r in rows),
    )


def expected_regime(specs: Sequence[DistributionSpec]) -> str:
    """
    Decay class of d(W_n, G) implied by the summand hypotheses

    Returns:
        "inv" when every summand has a finite exponential moment E exp(X^2/beta),
        "inv_sqrt" for equal variances, otherwise "log_over_sqrt"
    """
    if all(math.isfinite(s.exponential_moment_threshold()) for s in specs):
        return "inv"
    variances = np.array([s.variance for s in specs])
    if np.allclose(variances, variances[0], rtol=1e-12, atol=0.0):
        return "inv_sqrt"
    return "log_over_sqrt"
