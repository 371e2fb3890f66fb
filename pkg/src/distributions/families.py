"""
Summand Families
Analytic distribution families with exact densities, moments and characteristic functions
"""

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy import special, stats

from src.errors import InfiniteMomentError, InvalidParameterError


FAMILIES = ("gaussian", "uniform", "laplace", "gaussian_mixture", "logistic")
ALIASES = {"normal": "gaussian", "mixture": "gaussian_mixture"}

# E Z^j for a standard normal Z, even j
_GAUSSIAN_CENTRAL = {0: 1.0, 2: 1.0, 4: 3.0, 6: 15.0}
MAX_RAW_MOMENT = 6


@dataclass(frozen=True)
class DistributionSpec:
    """
    Immutable description of one independent summand

    Gaussian mixtures are stored as flat (weight, mean, variance) triplets.
    """

    family: str
    params: Tuple[float, ...]

    # ------------------------------------------------------------------
    # Structure
    # ------------------------------------------------------------------
    @property
    def label(self) -> str:
        return f"{self.family}:" + ",".join(f"{p:.12g}" for p in self.params)

    @property
    def full_support(self) -> bool:
        return self.family != "uniform"

    @property
    def support(self) -> Tuple[float, float]:
        if self.family == "uniform":
            return self.params[0], self.params[1]
        return -math.inf, math.inf

    @property
    def components(self) -> Tuple[Tuple[float, float, float], ...]:
        """Gaussian components as (weight, mean, variance); empty for other families"""
        if self.family == "gaussian":
            return ((1.0, self.params[0], self.params[1]),)
        if self.family == "gaussian_mixture":
            p = self.params
            return tuple((p[i], p[i + 1], p[i + 2]) for i in range(0, len(p), 3))
        return ()

    @property
    def mean(self) -> float:
        return self.raw_moment(1)

    @property
    def variance(self) -> float:
        m1 = self.raw_moment(1)
        return self.raw_moment(2) - m1 * m1

    def scaled(self, c: float) -> "DistributionSpec":
        """Law of c*X for c > 0, in the same family"""
        if not c > 0:
            raise InvalidParameterError("scale_factor", f"must be positive, got {c}")
        if self.family == "gaussian":
            return DistributionSpec("gaussian", (c * self.params[0], c * c * self.params[1]))
        if self.family == "uniform":
            return DistributionSpec("uniform", (c * self.params[0], c * self.params[1]))
        if self.family in ("laplace", "logistic"):
            return DistributionSpec(self.family, (c * self.params[0],))
        flat: List[float] = []
        for w, mu, var in self.components:
            flat.extend([w, c * mu, c * c * var])
        return DistributionSpec("gaussian_mixture", tuple(flat))

    # ------------------------------------------------------------------
    # Densities
    # ------------------------------------------------------------------
    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.family == "uniform":
            lo, hi = self.params
            return np.where((x >= lo) & (x <= hi), 1.0 / (hi - lo), 0.0)
        if self.family == "laplace":
            b = self.params[0]
            return np.exp(-np.abs(x) / b) / (2.0 * b)
        if self.family == "logistic":
            return stats.logistic.pdf(x, scale=self.params[0])
        total = np.zeros_like(x)
        for w, mu, var in self.components:
            total = total + w * stats.norm.pdf(x, loc=mu, scale=math.sqrt(var))
        return total

    def logpdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.family == "uniform":
            with np.errstate(divide="ignore"):
                return np.log(self.pdf(x))
        if self.family == "laplace":
            b = self.params[0]
            return -np.abs(x) / b - math.log(2.0 * b)
        if self.family == "logistic":
            return stats.logistic.logpdf(x, scale=self.params[0])
        terms = np.stack(
            [
                math.log(w) + stats.norm.logpdf(x, loc=mu, scale=math.sqrt(var))
                for w, mu, var in self.components
            ]
        )
        return special.logsumexp(terms, axis=0)

    def cdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.family == "uniform":
            return stats.uniform.cdf(x, loc=self.params[0], scale=self.params[1] - self.params[0])
        if self.family == "laplace":
            return stats.laplace.cdf(x, scale=self.params[0])
        if self.family == "logistic":
            return stats.logistic.cdf(x, scale=self.params[0])
        total = np.zeros_like(x)
        for w, mu, var in self.components:
            total = total + w * stats.norm.cdf(x, loc=mu, scale=math.sqrt(var))
        return total

    def mass_between(self, lo: float, hi: float) -> float:
        return float(self.cdf(hi) - self.cdf(lo))

    def score(self, x) -> np.ndarray:
        """Logarithmic derivative p'/p (zero inside the uniform support, nan outside)"""
        x = np.asarray(x, dtype=float)
        if self.family == "uniform":
            lo, hi = self.params
            return np.where((x >= lo) & (x <= hi), 0.0, np.nan)
        if self.family == "laplace":
            return -np.sign(x) / self.params[0]
        if self.family == "logistic":
            s = self.params[0]
            return -np.tanh(x / (2.0 * s)) / s
        comps = self.components
        log_terms = np.stack(
            [
                math.log(w) + stats.norm.logpdf(x, loc=mu, scale=math.sqrt(var))
                for w, mu, var in comps
            ]
        )
        resp = special.softmax(log_terms, axis=0)
        slopes = np.stack([-(x - mu) / var for _, mu, var in comps])
        return np.sum(resp * slopes, axis=0)

    # ------------------------------------------------------------------
    # Moments
    # ------------------------------------------------------------------
    def raw_moment(self, k: int) -> float:
        """Closed-form E X^k for k in 0..6"""
        if k < 0 or k > MAX_RAW_MOMENT:
            raise InfiniteMomentError(
                f"{self.family}: raw moments are available up to order {MAX_RAW_MOMENT}, got {k}"
            )
        if k == 0:
            return 1.0
        if self.family == "uniform":
            lo, hi = self.params
            return (hi ** (k + 1) - lo ** (k + 1)) / ((k + 1) * (hi - lo))
        if self.family == "laplace":
            return 0.0 if k % 2 else math.factorial(k) * self.params[0] ** k
        if self.family == "logistic":
            s = self.params[0]
            even = {2: math.pi ** 2 / 3, 4: 7 * math.pi ** 4 / 15, 6: 31 * math.pi ** 6 / 21}
            return 0.0 if k % 2 else even[k] * s ** k
        total = 0.0
        for w, mu, var in self.components:
            comp = sum(
                math.comb(k, j) * mu ** (k - j) * var ** (j // 2) * _GAUSSIAN_CENTRAL[j]
                for j in range(0, k + 1, 2)
            )
            total += w * comp
        return total

    def absolute_moment(self, p: float) -> float:
        """E|X|^p for real p > 0"""
        if not p > 0:
            raise InvalidParameterError("p", f"absolute moment order must be positive, got {p}")
        if self.family == "uniform":
            lo, hi = self.params

            def antiderivative(x: float) -> float:
                return math.copysign(abs(x) ** (p + 1), x) / (p + 1)

            return (antiderivative(hi) - antiderivative(lo)) / (hi - lo)
        if self.family == "laplace":
            return math.gamma(p + 1) * self.params[0] ** p
        if self.family == "logistic":
            s = self.params[0]
            eta = math.log(2.0) if p == 1 else (1 - 2 ** (1 - p)) * special.zeta(p)
            return 2 * s ** p * math.gamma(p + 1) * eta
        total = 0.0
        for w, mu, var in self.components:
            sigma = math.sqrt(var)
            centered = sigma ** p * 2 ** (p / 2) * math.gamma((p + 1) / 2) / math.sqrt(math.pi)
            total += w * centered * special.hyp1f1(-p / 2, 0.5, -mu * mu / (2 * var))
        return float(total)

    def partial_expectation(self, x) -> np.ndarray:
        """E[X 1{X > x}] in closed form"""
        x = np.asarray(x, dtype=float)
        if self.family == "uniform":
            lo, hi = self.params
            clipped = np.clip(x, lo, hi)
            return (hi * hi - clipped * clipped) / (2 * (hi - lo))
        if self.family == "laplace":
            b = self.params[0]
            ax = np.abs(x)
            return 0.5 * (ax + b) * np.exp(-ax / b)
        if self.family == "logistic":
            s = self.params[0]
            ax = np.abs(x)
            return ax * stats.logistic.sf(ax, scale=s) + s * np.logaddexp(0.0, -ax / s)
        total = np.zeros_like(x)
        for w, mu, var in self.components:
            sigma = math.sqrt(var)
            z = (x - mu) / sigma
            total = total + w * (mu * stats.norm.sf(z) + sigma * stats.norm.pdf(z))
        return total

    def exponential_moment_threshold(self) -> float:
        """Infimum of beta with E exp(X^2/beta) finite; inf when no beta works"""
        if self.family == "uniform":
            return 0.0
        if self.family in ("laplace", "logistic"):
            return math.inf
        return 2.0 * max(var for _, _, var in self.components)

    @property
    def tilt_limit(self) -> float:
        """Supremum of |Re z| on which the moment generating function is finite"""
        if self.family in ("laplace", "logistic"):
            return 1.0 / self.params[0]
        return math.inf

    def mgf(self, z) -> np.ndarray:
        """E exp(z X) for complex z with |Re z| below tilt_limit"""
        z = np.asarray(z, dtype=complex)
        with np.errstate(all="ignore"):
            if self.family == "uniform":
                lo, hi = self.params
                center, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
                w = z * half
                small = np.abs(w) < 1e-8
                safe = np.where(small, 1.0, w)
                out = np.exp(z * center) * np.where(small, 1.0 + w * w / 6, np.sinh(safe) / safe)
            elif self.family == "laplace":
                b = self.params[0]
                out = 1.0 / (1.0 - (b * z) ** 2)
            elif self.family == "logistic":
                w = math.pi * self.params[0] * z
                small = np.abs(w) < 1e-8
                safe = np.where(small, 1.0, w)
                out = np.where(small, 1.0 + w * w / 6, safe / np.sin(safe))
                # |sin| overflows for large imaginary parts where the transform is ~0
                out = np.where(np.abs(w.imag) > 600, 0.0, out)
            else:
                out = np.zeros(z.shape, dtype=complex)
                for wt, mu, var in self.components:
                    out = out + wt * np.exp(mu * z + 0.5 * var * z * z)
        return np.where(np.isfinite(out), out, 0.0)

    def characteristic_function(self, t) -> np.ndarray:
        """E exp(i t X) evaluated on real t"""
        t = np.asarray(t, dtype=float)
        if self.family == "uniform":
            lo, hi = self.params
            center = 0.5 * (lo + hi)
            return np.exp(1j * t * center) * np.sinc(t * (hi - lo) / (2 * math.pi))
        if self.family == "laplace":
            b = self.params[0]
            return (1.0 / (1.0 + (b * t) ** 2)).astype(complex)
        if self.family == "logistic":
            z = math.pi * self.params[0] * np.abs(t)
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                ratio = 2 * z * np.exp(-z) / -np.expm1(-2 * z)
            return np.where(z < 1e-8, 1.0, ratio).astype(complex)
        total = np.zeros(t.shape, dtype=complex)
        for w, mu, var in self.components:
            total = total + w * np.exp(1j * mu * t - 0.5 * var * t * t)
        return total


def _as_floats(values: Sequence, field: str) -> Tuple[float, ...]:
    try:
        out = tuple(float(v) for v in values)
    except (TypeError, ValueError) as e:
        raise InvalidParameterError(field, f"parameters must be real numbers ({e})")
    if not all(math.isfinite(v) for v in out):
        raise InvalidParameterError(field, "parameters must be finite")
    return out


def make_family(kind: str, params: Sequence[float]) -> DistributionSpec:
    """
    Build a validated summand specification

    Args:
        kind: gaussian, uniform, laplace, gaussian_mixture (alias mixture) or logistic
        params: gaussian (mean, variance); uniform (lo, hi); laplace (scale);
            logistic (scale); gaussian_mixture flat (weight, mean, variance) triplets

    Returns:
        DistributionSpec
    """
    family = ALIASES.get(kind, kind)
    if family not in FAMILIES:
        raise InvalidParameterError("kind", f"unknown family '{kind}', expected one of {FAMILIES}")
    values = _as_floats(params, "params")

    if family == "gaussian":
        if len(values) != 2:
            raise InvalidParameterError("params", "gaussian takes (mean, variance)")
        if values[1] <= 0:
            raise InvalidParameterError("variance", f"must be positive, got {values[1]}")
    elif family == "uniform":
        if len(values) != 2:
            raise InvalidParameterError("params", "uniform takes (lo, hi)")
        if not values[0] < values[1]:
            raise InvalidParameterError("lo", f"need lo < hi, got lo={values[0]}, hi={values[1]}")
    elif family in ("laplace", "logistic"):
        if len(values) != 1:
            raise InvalidParameterError("params", f"{family} takes (scale)")
        if values[0] <= 0:
            raise InvalidParameterError("scale", f"must be positive, got {values[0]}")
    else:
        if not values or len(values) % 3:
            raise InvalidParameterError(
                "params", "gaussian_mixture takes (weight, mean, variance) triplets"
            )
        weights = values[0::3]
        variances = values[2::3]
        if any(w <= 0 for w in weights):
            raise InvalidParameterError("weights", "mixture weights must be positive")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise InvalidParameterError("weights", f"must sum to 1, got {sum(weights)!r}")
        if any(v <= 0 for v in variances):
            raise InvalidParameterError("variances", "component variances must be positive")

    spec = DistributionSpec(family, values)
    logger.debug(f"Built {spec.label} (mean={spec.mean:.6g}, variance={spec.variance:.6g})")
    return spec


def gaussian_mixture(
    weights: Sequence[float], means: Sequence[float], variances: Sequence[float]
) -> DistributionSpec:
    """Convenience constructor taking the three component lists separately"""
    if not len(weights) == len(means) == len(variances):
        raise InvalidParameterError("weights", "weights, means and variances differ in length")
    flat: List[float] = []
    for w, mu, var in zip(weights, means, variances):
        flat.extend([w, mu, var])
    return make_family("gaussian_mixture", flat)


def parse_family_token(token: str) -> DistributionSpec:
    """Parse the `kind:p1,p2,...` form used on the command line and in configs"""
    kind, sep, rest = token.partition(":")
    if not sep or not rest.strip():
        raise InvalidParameterError("family", f"expected kind:params, got '{token}'")
    return make_family(kind.strip(), [p for p in rest.split(",") if p.strip()])
