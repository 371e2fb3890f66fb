"""
Grid Densities
Uniform-grid representation of densities and signed functions, with CSV storage
"""

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger
from scipy.integrate import trapezoid

from src.distributions.families import DistributionSpec
from src.errors import DomainTooSmallError, InvalidParameterError, StepMismatchError

DEFAULT_STEP = 2.0 ** -8
MIN_INTERVALS = 64
MASS_TOLERANCE = 1e-6
COVERAGE_TOLERANCE = 1e-9
RENORMALIZE_TOLERANCE = 1e-10
COVERAGE_TARGET = 1e-10
WIDENING_FACTOR = 1.25
MAX_WIDENINGS = 32


def _interval_count(lo: float, hi: float, step: float) -> int:
    if not step > 0:
        raise InvalidParameterError("step", f"must be positive, got {step}")
    ratio = (hi - lo) / step
    count = int(round(ratio))
    if abs(ratio - count) > 1e-6:
        raise InvalidParameterError("step", f"(hi - lo)/step = {ratio} is not an integer")
    if count < MIN_INTERVALS:
        raise InvalidParameterError("step", f"need at least {MIN_INTERVALS} intervals, got {count}")
    return count


def trapezoid_weights(count: int, step: float) -> np.ndarray:
    """Quadrature weights reproducing scipy's trapezoid rule on `count` points"""
    w = np.full(count, step)
    w[0] = w[-1] = 0.5 * step
    return w


@dataclass(frozen=True)
class GridSpec:
    """Working domain [lo, hi] with uniform spacing"""

    lo: float
    hi: float
    step: float = DEFAULT_STEP

    def __post_init__(self):
        _interval_count(self.lo, self.hi, self.step)

    @property
    def intervals(self) -> int:
        return _interval_count(self.lo, self.hi, self.step)

    @property
    def count(self) -> int:
        return self.intervals + 1

    @property
    def x(self) -> np.ndarray:
        return self.lo + self.step * np.arange(self.count)


def default_grid(n: int, step: float = DEFAULT_STEP, L: Optional[float] = None) -> GridSpec:
    """
    Symmetric working grid [-L, L]

    L defaults to max(12, 4 sqrt(ln n) + 8) and is rounded up to a multiple of step
    so that sums of grid-aligned supports stay aligned.
    """
    if L is None:
        L = max(12.0, 4.0 * math.sqrt(math.log(max(n, 1))) + 8.0)
    L = math.ceil(L / step - 1e-9) * step
    return GridSpec(-L, L, step)


def covering_grid(
    specs: Sequence[DistributionSpec],
    n: int = 1,
    step: float = DEFAULT_STEP,
    L: Optional[float] = None,
) -> GridSpec:
    """
    default_grid(n, step, L) widened until every law in specs leaves at most
    COVERAGE_TARGET of its mass outside [-L, L]
    """
    grid = default_grid(n, step=step, L=L)
    hi = grid.hi
    for _ in range(MAX_WIDENINGS):
        if all(spec.mass_between(-hi, hi) >= 1.0 - COVERAGE_TARGET for spec in specs):
            break
        hi *= WIDENING_FACTOR
    else:
        raise DomainTooSmallError(min(s.mass_between(-hi, hi) for s in specs), -hi, hi)
    if hi == grid.hi:
        return grid
    logger.debug(f"Widened grid to [-{hi:.4g}, {hi:.4g}] for {[s.label for s in specs]}")
    return default_grid(n, step=step, L=hi)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Signed function sampled at lo + k*step, with optional derivative samples"""

    lo: float
    step: float
    values: np.ndarray
    derivative: Optional[np.ndarray] = None
    second_derivative: Optional[np.ndarray] = None
    name: str = ""

    def __post_init__(self):
        for attr in ("values", "derivative", "second_derivative"):
            arr = getattr(self, attr)
            if arr is None:
                continue
            arr = np.array(arr, dtype=float)
            if arr.ndim != 1 or arr.shape != np.shape(self.values):
                raise InvalidParameterError(attr, "samples must be 1-D and share the grid")
            arr.setflags(write=False)
            object.__setattr__(self, attr, arr)
        _interval_count(self.lo, self.hi, self.step)

    @property
    def count(self) -> int:
        return len(self.values)

    @property
    def hi(self) -> float:
        return self.lo + (self.count - 1) * self.step

    @property
    def x(self) -> np.ndarray:
        return self.lo + self.step * np.arange(self.count)

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.lo, self.hi, self.step)

    @classmethod
    def from_callable(
        cls,
        func: Callable[[np.ndarray], np.ndarray],
        grid: GridSpec,
        derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        second_derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        name: str = "",
    ) -> "GridFunction":
        x = grid.x

        def sample(f):
            return None if f is None else np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)

        return cls(
            grid.lo,
            grid.step,
            sample(func),
            sample(derivative),
            sample(second_derivative),
            name,
        )

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"x": self.x, "value": self.values})
        if self.derivative is not None:
            frame["derivative"] = self.derivative
        if self.second_derivative is not None:
            frame["second_derivative"] = self.second_derivative
        return frame

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        logger.debug(f"Wrote {self.count} samples of {self.name or 'function'} to {path}")
        return path

    @classmethod
    def from_csv(cls, path: Union[str, Path], name: str = "") -> "GridFunction":
        frame = pd.read_csv(path, float_precision="round_trip")
        columns = list(frame.columns)
        if columns[:2] != ["x", "value"] or not set(columns[2:]) <= {"derivative", "second_derivative"}:
            raise InvalidParameterError("columns", f"expected x,value[,derivative,...], got {columns}")
        x = frame["x"].to_numpy()
        step = (x[-1] - x[0]) / (len(x) - 1)
        if not np.allclose(np.diff(x), step, rtol=0.0, atol=1e-9):
            raise StepMismatchError(f"{path}: x column is not uniformly spaced")

        def column(key):
            return frame[key].to_numpy() if key in frame else None

        return cls(
            float(x[0]),
            float(step),
            frame["value"].to_numpy(),
            column("derivative"),
            column("second_derivative"),
            name,
        )


@dataclass(frozen=True, eq=False)
class GridDensity:
    """
    Nonnegative density samples at lo + k*step

    raw_mass and clipped_mass record what renormalization and ripple clipping removed;
    full_support marks densities known to be positive on the whole real line;
    support, when known, is the exact interval outside which the law has no mass.
    """

    lo: float
    step: float
    values: np.ndarray
    full_support: bool = False
    raw_mass: float = math.nan
    clipped_mass: float = 0.0
    label: str = field(default="", compare=False)
    support: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1:
            raise InvalidParameterError("values", "density samples must be 1-D")
        if not np.all(np.isfinite(values)):
            raise InvalidParameterError("values", "density samples must be finite")
        if np.any(values < 0):
            raise InvalidParameterError("values", "density samples must be nonnegative")
        _interval_count(self.lo, self.lo + (len(values) - 1) * self.step, self.step)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def count(self) -> int:
        return len(self.values)

    @property
    def hi(self) -> float:
        return self.lo + (self.count - 1) * self.step

    @property
    def x(self) -> np.ndarray:
        return self.lo + self.step * np.arange(self.count)

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.lo, self.hi, self.step)

    @property
    def mass(self) -> float:
        return float(trapezoid(self.values, dx=self.step))

    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.count, self.step)

    def mean(self) -> float:
        return float(trapezoid(self.x * self.values, dx=self.step) / self.mass)

    def variance(self) -> float:
        mu = self.mean()
        return float(trapezoid((self.x - mu) ** 2 * self.values, dx=self.step) / self.mass)

    def same_grid(self, other: Union["GridDensity", GridFunction]) -> bool:
        return (
            self.count == other.count
            and math.isclose(self.lo, other.lo, rel_tol=0.0, abs_tol=1e-12)
            and math.isclose(self.step, other.step, rel_tol=1e-12)
        )

    def require_same_grid(self, other: Union["GridDensity", GridFunction]) -> None:
        if not self.same_grid(other):
            raise StepMismatchError(
                f"grids differ: [{self.lo}, {self.hi}] step {self.step} vs "
                f"[{other.lo}, {other.hi}] step {other.step}"
            )

    def renormalized(self, target: float = 1.0) -> "GridDensity":
        mass = self.mass
        return replace(self, values=self.values * (target / mass), raw_mass=mass)

    def check_mass(self, tol: float = MASS_TOLERANCE) -> bool:
        return abs(self.mass - 1.0) <= tol

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"x": self.x, "density": self.values})

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        logger.debug(f"Wrote {self.count} density samples to {path}")
        return path

    @classmethod
    def from_csv(cls, path: Union[str, Path], full_support: bool = False) -> "GridDensity":
        frame = pd.read_csv(path, float_precision="round_trip")
        if list(frame.columns) != ["x", "density"]:
            raise InvalidParameterError("columns", f"expected x,density, got {list(frame.columns)}")
        x = frame["x"].to_numpy()
        step = (x[-1] - x[0]) / (len(x) - 1)
        if not np.allclose(np.diff(x), step, rtol=0.0, atol=1e-9):
            raise StepMismatchError(f"{path}: x column is not uniformly spaced")
        return cls(float(x[0]), float(step), frame["density"].to_numpy(), full_support=full_support)


def discretize(spec: DistributionSpec, lo: float, hi: float, step: float = DEFAULT_STEP) -> GridDensity:
    """
    Sample an analytic density on [lo, hi]

    Samples are pointwise exact; they are rescaled to unit trapezoid mass only when
    kinks or jumps make the raw quadrature drift (raw_mass keeps the original).
    """
    captured = spec.mass_between(lo, hi)
    if captured < 1.0 - COVERAGE_TOLERANCE:
        raise DomainTooSmallError(captured, lo, hi)
    count = _interval_count(lo, hi, step) + 1
    x = lo + step * np.arange(count)
    density = GridDensity(
        lo,
        step,
        spec.pdf(x),
        full_support=spec.full_support,
        label=spec.label,
        support=None if spec.full_support else spec.support,
    )
    raw = density.mass
    if abs(raw - 1.0) > RENORMALIZE_TOLERANCE:
        density = density.renormalized()
    else:
        density = replace(density, raw_mass=raw)
    return density


def discretize_on(spec: DistributionSpec, grid: GridSpec) -> GridDensity:
    return discretize(spec, grid.lo, grid.hi, grid.step)


def gaussian_on(grid: GridSpec, mean: float = 0.0, variance: float = 1.0) -> GridDensity:
    """Gaussian density sampled on a grid (phi for the defaults)"""
    x = grid.x
    values = np.exp(-0.5 * (x - mean) ** 2 / variance) / math.sqrt(2 * math.pi * variance)
    return GridDensity(
        grid.lo,
        grid.step,
        values,
        full_support=True,
        raw_mass=float(trapezoid(values, dx=grid.step)),
        label="gaussian",
    )
