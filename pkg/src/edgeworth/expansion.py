"""
Edgeworth Expansion
Local-limit corrections of the standardized-sum density around phi and their measured error
"""

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger
from numpy.polynomial import hermite_e
from scipy.integrate import trapezoid

from src.distributions.families import DistributionSpec
from src.distributions.functionals import CumulantSummary, cumulant_summary, cycle_specs
from src.errors import InvalidParameterError, UnsupportedOrderError
from src.grid.convolution import normalized_sum_density
from src.grid.grid_density import GridFunction, GridSpec, default_grid

MAX_HERMITE_ORDER = 6
R2_POLYNOMIALS = ("he4", "printed")


def hermite(k: int, x):
    """Probabilists' Hermite polynomial He_k evaluated at x"""
    if not 0 <= k <= MAX_HERMITE_ORDER:
        raise UnsupportedOrderError(f"Hermite order must be in 0..{MAX_HERMITE_ORDER}, got {k}")
    coeffs = np.zeros(k + 1)
    coeffs[k] = 1.0
    return hermite_e.hermeval(x, coeffs)


@dataclass(frozen=True)
class EdgeworthTerms:
    """Coefficients of the first two correction terms"""

    order: int
    n: int
    coeff_r1: float
    coeff_r2_a: float
    coeff_r2_b: float
    r2_polynomial: str = "he4"

    def r2_polynomials(self, x):
        """
        Polynomials multiplying coeff_r2_a and coeff_r2_b

        "he4" is the classical pair (He6, He4); "printed" reproduces the variant with
        (He4, He3), an even quartic on the squared-skew term and an odd cubic on the
        kurtosis term.
        """
        if self.r2_polynomial == "he4":
            return hermite(6, x), hermite(4, x)
        return hermite(4, x), hermite(3, x)


def edgeworth_terms(
    summary: CumulantSummary,
    k: int,
    n: Optional[int] = None,
    r2_polynomial: str = "he4",
) -> EdgeworthTerms:
    if k not in (0, 1, 2):
        raise UnsupportedOrderError(f"expansion order must be 0, 1 or 2, got {k}")
    if r2_polynomial not in R2_POLYNOMIALS:
        raise InvalidParameterError("r2_polynomial", f"expected one of {R2_POLYNOMIALS}")
    n = summary.n if n is None else n
    B = summary.B_n
    skew = math.sqrt(n) / B ** 1.5 * summary.sum_gamma3
    return EdgeworthTerms(
        order=k,
        n=n,
        coeff_r1=skew / 6.0,
        coeff_r2_a=skew * skew / 72.0,
        coeff_r2_b=n / (24.0 * B * B) * summary.sum_gamma4,
        r2_polynomial=r2_polynomial,
    )


def edgeworth_density(
    summary: CumulantSummary,
    k: int,
    n: int,
    grid: Optional[GridSpec] = None,
    r2_polynomial: str = "he4",
) -> GridFunction:
    """
    phi(x) + sum_{i <= k} R_i(x) / n^(i/2) sampled on the grid

    The result is a signed approximation and may dip below zero in the tails.
    """
    terms = edgeworth_terms(summary, k, n, r2_polynomial)
    grid = grid or default_grid(n)
    x = grid.x
    phi = np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
    correction = np.zeros_like(x)
    if k >= 1:
        correction += terms.coeff_r1 * hermite(3, x) / math.sqrt(n)
    if k >= 2:
        first, second = terms.r2_polynomials(x)
        correction += (terms.coeff_r2_a * first + terms.coeff_r2_b * second) / n
    return GridFunction(grid.lo, grid.step, phi * (1.0 + correction), name=f"edgeworth_k{k}_n{n}")


class ExpansionError(NamedTuple):
    sup_error: float
    l1_error: float


def expansion_error(
    specs: Sequence[DistributionSpec],
    n: int,
    k: int,
    grid: Optional[GridSpec] = None,
    r2_polynomial: str = "he4",
    delta0: float = 1.0,
    method: str = "spectral",
) -> ExpansionError:
    """
    Sup and L1 distance between p_n and the order-k expansion

    k = 0 measures plain phi, the baseline the corrections improve on.
    """
    grid = grid or default_grid(n)
    summary = cumulant_summary(cycle_specs(specs, n), delta0)
    p_n = normalized_sum_density(specs, n, grid, method=method)
    approx = edgeworth_density(summary, k, n, grid, r2_polynomial)
    diff = np.abs(p_n.values - approx.values)
    result = ExpansionError(float(diff.max()), float(trapezoid(diff, dx=grid.step)))
    logger.debug(f"Expansion error n={n} k={k}: sup={result.sup_error:.3e}")
    return result


def expansion_error_table(
    specs: Sequence[DistributionSpec],
    ns: Iterable[int],
    ks: Iterable[int] = (1, 2),
    r2_polynomial: str = "he4",
    delta0: float = 1.0,
    step: Optional[float] = None,
    L: Optional[float] = None,
) -> pd.DataFrame:
    """Error table with columns n, k, sup_error, l1_error"""
    rows = []
    for n in ns:
        grid = default_grid(n, L=L) if step is None else default_grid(n, step=step, L=L)
        for k in ks:
            err = expansion_error(specs, n, k, grid, r2_polynomial, delta0)
            rows.append({"n": n, "k": k, "sup_error": err.sup_error, "l1_error": err.l1_error})
    logger.info(f"Computed expansion errors for {len(rows)} (n, k) pairs")
    return pd.DataFrame(rows, columns=["n", "k", "sup_error", "l1_error"])
