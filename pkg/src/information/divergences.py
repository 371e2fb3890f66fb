"""
Information Functionals
Entropy, KL divergence in both directions, symmetric KL, L1 distance and related identities
"""

import math
from dataclasses import asdict, dataclass
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np
from loguru import logger
from scipy.integrate import trapezoid
from scipy.special import entr, rel_entr

from src.distributions.families import DistributionSpec
from src.distributions.functionals import MEAN_TOLERANCE, fisher_information
from src.errors import (
    AbsoluteContinuityError,
    ContractViolation,
    InvalidParameterError,
    NonzeroMeanError,
)
from src.grid.convolution import convolve_pair
from src.grid.grid_density import (
    GridDensity,
    GridSpec,
    covering_grid,
    discretize_on,
    gaussian_on,
)

LOG_FLOOR = 1e-300
NEGLIGIBLE_DENSITY = 1e-8
CHAIN_TOLERANCE = 1e-9


@dataclass(frozen=True)
class DivergenceReport:
    """Entropies and divergences of one (p, q) pair, all in nats"""

    h_p: float
    h_q: float
    kl_pq: float
    kl_qp: float
    d: float
    l1: float
    pinsker_slack: float
    tail_mass_dropped: float

    def chain_slacks(self) -> Dict[str, float]:
        half_l1_sq = 0.5 * self.l1 * self.l1
        return {
            "d >= kl_pq": self.d - self.kl_pq,
            "kl_pq >= l1^2/2": self.kl_pq - half_l1_sq,
            "d >= l1^2/2": self.d - half_l1_sq,
        }

    def check_chain(self, tol: float = CHAIN_TOLERANCE) -> None:
        """Raise ContractViolation if the Pinsker/dominance chain fails beyond tol"""
        for name, slack in self.chain_slacks().items():
            if slack < -tol:
                raise ContractViolation(name, slack)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


class FisherBoundReport(NamedTuple):
    D: float
    bound: float
    slack: float


def entropy(p: GridDensity) -> float:
    """Differential entropy -int p ln p with 0 ln 0 = 0"""
    return float(trapezoid(entr(p.values), dx=p.step))


def _kl_terms(p: GridDensity, q: GridDensity) -> Tuple[float, float]:
    p.require_same_grid(q)
    pv, qv = p.values, q.values
    active = pv > LOG_FLOOR
    starved = active & (qv <= LOG_FLOOR)
    violating = starved & (pv > NEGLIGIBLE_DENSITY)
    if np.any(violating):
        x = p.x[violating]
        raise AbsoluteContinuityError((float(x.min()), float(x.max())))

    w = p.weights()
    kept = active & ~starved
    terms = np.zeros_like(pv)
    terms[kept] = rel_entr(pv[kept], qv[kept])
    dropped = float(np.sum(w[starved] * pv[starved]))
    return float(np.sum(w * terms)), dropped


def kl(p: GridDensity, q: GridDensity) -> float:
    """KL(p || q) = int p ln(p/q) on a shared grid"""
    value, dropped = _kl_terms(p, q)
    if dropped > 0:
        logger.debug(f"KL dropped {dropped:.2e} of mass where q underflows")
    return value


def total_variation_l1(p: GridDensity, q: GridDensity) -> float:
    """L1 distance int |p - q| (2 for disjoint supports)"""
    p.require_same_grid(q)
    return float(trapezoid(np.abs(p.values - q.values), dx=p.step))


def symmetric_kl(p: GridDensity, q: GridDensity) -> DivergenceReport:
    """
    Symmetric KL divergence d = KL(p||q) + KL(q||p) with its companion quantities

    Args:
        p, q: mutually absolutely continuous densities on one grid

    Returns:
        DivergenceReport
    """
    kl_pq, dropped_pq = _kl_terms(p, q)
    kl_qp, dropped_qp = _kl_terms(q, p)
    l1 = total_variation_l1(p, q)
    return DivergenceReport(
        h_p=entropy(p),
        h_q=entropy(q),
        kl_pq=kl_pq,
        kl_qp=kl_qp,
        d=kl_pq + kl_qp,
        l1=l1,
        pinsker_slack=kl_pq - 0.5 * l1 * l1,
        tail_mass_dropped=dropped_pq + dropped_qp,
    )


def gaussian_counterpart(p: GridDensity) -> GridDensity:
    """G_X: the Gaussian with p's mean and variance, on p's grid"""
    return gaussian_on(p.grid, mean=p.mean(), variance=p.variance())


def entropy_gap(p: GridDensity) -> float:
    """h(G_X) - h(X), nonnegative by Gaussian entropy maximality"""
    return entropy(gaussian_counterpart(p)) - entropy(p)


def entropy_jump(
    p: DistributionSpec, q: DistributionSpec, grid: Optional[GridSpec] = None
) -> float:
    """
    h((X + Y)/sqrt(2)) - (h(X) + h(Y))/2 for independent X ~ p, Y ~ q

    Both halves are discretized at scale 1/sqrt(2) and convolved on the grid.
    """
    if not math.isclose(p.variance, q.variance, rel_tol=1e-9):
        raise InvalidParameterError(
            "variance", f"entropy jump needs equal variances, got {p.variance} and {q.variance}"
        )
    if grid is None:
        grid = covering_grid([p, q], 2, L=max(12.0, 12.0 * math.sqrt(p.variance)))
    half = 1.0 / math.sqrt(2.0)
    total = convolve_pair(
        discretize_on(p.scaled(half), grid), discretize_on(q.scaled(half), grid), grid
    )
    h_x = entropy(discretize_on(p, grid))
    h_y = entropy(discretize_on(q, grid))
    jump = entropy(total) - 0.5 * (h_x + h_y)
    logger.debug(f"Entropy jump of {p.label} and {q.label}: {jump:.3e}")
    return jump


def awgn_symmetric_divergence(var_in: float, var_noise: float) -> float:
    """
    Symmetric KL between the joint law of (X, X + N) and the product of its marginals

    X ~ N(0, var_in) and N ~ N(0, var_noise) independent; equals var_in / var_noise.
    """
    if not var_noise > 0:
        raise InvalidParameterError("var_noise", f"must be positive, got {var_noise}")
    if var_in < 0:
        raise InvalidParameterError("var_in", f"must be nonnegative, got {var_in}")
    if var_in == 0:
        return 0.0
    joint = np.array([[var_in, var_in], [var_in, var_in + var_noise]])
    product = np.diag([var_in, var_in + var_noise])
    forward = np.trace(np.linalg.solve(product, joint))
    backward = np.trace(np.linalg.solve(joint, product))
    # the log-determinant terms of the two directions cancel
    return float(0.5 * (forward + backward) - 2.0)


def awgn_mutual_information(var_in: float, var_noise: float) -> float:
    """I(X; X + N) = 0.5 ln(1 + SNR)"""
    if not var_noise > 0:
        raise InvalidParameterError("var_noise", f"must be positive, got {var_noise}")
    return 0.5 * math.log1p(var_in / var_noise)


def fisher_divergence_bound(spec: DistributionSpec, grid: Optional[GridSpec] = None) -> FisherBoundReport:
    """
    D(X) = KL(X || G_X) against 0.5 ln(Var J)

    Returns:
        (D, bound, slack) with slack = bound - D
    """
    J = fisher_information(spec)
    if abs(spec.mean) > MEAN_TOLERANCE:
        raise NonzeroMeanError(f"{spec.label} has mean {spec.mean:.3g}")
    var = spec.variance
    if grid is None:
        grid = covering_grid([spec], L=max(12.0, 12.0 * math.sqrt(var)))
    D = kl(discretize_on(spec, grid), gaussian_on(grid, variance=var))
    bound = 0.5 * math.log(var * J)
    return FisherBoundReport(D, bound, bound - D)
