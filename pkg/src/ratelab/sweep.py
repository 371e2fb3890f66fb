"""
Convergence Sweep
Divergence, Edgeworth and coupling metrics of W_n over a list of sample sizes
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, fields
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger
from tqdm import tqdm

from src.config import RunConfig
from src.distributions.families import DistributionSpec
from src.distributions.functionals import cumulant_summary, cycle_specs
from src.edgeworth.expansion import edgeworth_density
from src.errors import (
    InfiniteFisherInformationError,
    InvalidParameterError,
    LabValidationError,
    NonzeroMeanError,
)
from src.grid.convolution import normalized_sum_density
from src.grid.grid_density import GridDensity, gaussian_on
from src.information.divergences import symmetric_kl
from src.stein.coupling import coupling_delta_second_moment

DIVERGENCE_TOLERANCE = 1e-10
PINSKER_TOLERANCE = 1e-9
MONOTONE_TOLERANCE = 1e-9
RATE_SHAPE_FACTOR = 1.2


@dataclass(frozen=True)
class SweepRow:
    """One sample size of a sweep; failed rows carry NaN metrics and a reason"""

    n: int
    d: float
    kl_wg: float
    kl_gw: float
    l1: float
    entropy_w: float
    sup_edgeworth_error: float
    e_delta_sq: float
    runtime_ms: float
    tail_variance: float = math.nan
    status: str = "ok"
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def failed(cls, n: int, reason: str) -> "SweepRow":
        nan = math.nan
        return cls(n, nan, nan, nan, nan, nan, nan, nan, 0.0, nan, "failed", reason)


SWEEP_COLUMNS = [f.name for f in fields(SweepRow)]


def tail_variance(p: GridDensity, u: float, n: int) -> float:
    """int_{|x| > u sqrt(ln n)} x^2 p_n(x) dx by trapezoid weights"""
    x = p.x
    outside = np.abs(x) > u * math.sqrt(math.log(n))
    w = p.weights()
    return float(np.sum(w[outside] * x[outside] ** 2 * p.values[outside]))


def _coupling_moment(specs: Sequence[DistributionSpec], n: int, delta0: float):
    try:
        return coupling_delta_second_moment(specs, n, delta0).e_delta_sq, ""
    except (InfiniteFisherInformationError, NonzeroMeanError) as e:
        return math.nan, f"e_delta_sq excluded: {e}"


def sweep_row(specs: Sequence[DistributionSpec], n: int, config: RunConfig) -> SweepRow:
    """All metrics of one sample size; validation errors propagate to the caller"""
    start = time.perf_counter()
    grid = config.grid(n)
    p = normalized_sum_density(specs, n, grid, method=config.method)
    report = symmetric_kl(p, gaussian_on(grid))
    report.check_chain(PINSKER_TOLERANCE)

    summary = cumulant_summary(cycle_specs(specs, n), config.delta0)
    approx = edgeworth_density(summary, config.k, n, grid, config.r2_polynomial)
    sup_error = float(np.abs(p.values - approx.values).max())
    e_delta_sq, note = _coupling_moment(specs, n, config.delta0)

    elapsed = (time.perf_counter() - start) * 1000.0 if config.timing else 0.0
    return SweepRow(
        n=n,
        d=report.d,
        kl_wg=report.kl_pq,
        kl_gw=report.kl_qp,
        l1=report.l1,
        entropy_w=report.h_p,
        sup_edgeworth_error=sup_error,
        e_delta_sq=e_delta_sq,
        runtime_ms=elapsed,
        tail_variance=tail_variance(p, config.u, n),
        reason=note,
    )


def _guarded_row(specs: Sequence[DistributionSpec], n: int, config: RunConfig) -> SweepRow:
    try:
        return sweep_row(specs, n, config)
    except LabValidationError as e:
        logger.warning(f"Sweep row n={n} failed: {e}")
        return SweepRow.failed(n, f"{type(e).__name__}: {e}")


def run_sweep(
    specs: Sequence[DistributionSpec],
    ns: Sequence[int],
    config: Optional[RunConfig] = None,
) -> List[SweepRow]:
    """
    Compute one SweepRow per sample size

    Rows are independent, so they run on a thread pool of config.workers threads;
    the result is ordered by n regardless of completion order. Validation errors
    mark the row failed, contract violations abort the sweep.

    Args:
        specs: summand families, cycled to each n
        ns: strictly increasing sample sizes
        config: grid, expansion and pool settings (RunConfig() when omitted)

    Returns:
        List of SweepRow sorted by n
    """
    config = config or RunConfig()
    ns = [int(n) for n in ns]
    if not ns:
        raise InvalidParameterError("ns", "at least one sample size is required")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise InvalidParameterError("ns", f"must be strictly increasing, got {ns}")

    logger.info(f"Initialized sweep over n={ns} with {config.workers} worker(s)")
    rows: List[SweepRow] = []
    with tqdm(total=len(ns), desc="Sweep", unit="n", disable=not config.progress) as bar:
        if config.workers == 1:
            for n in ns:
                rows.append(_guarded_row(specs, n, config))
                bar.update(1)
        else:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                futures = [pool.submit(_guarded_row, specs, n, config) for n in ns]
                for future in as_completed(futures):
                    rows.append(future.result())
                    bar.update(1)

    rows.sort(key=lambda row: row.n)
    failed = sum(not row.ok for row in rows)
    logger.info(f"Computed sweep: {len(rows) - failed} rows ok, {failed} failed")
    return rows


def rows_frame(rows: Sequence[SweepRow]) -> pd.DataFrame:
    return pd.DataFrame([row.to_dict() for row in rows], columns=SWEEP_COLUMNS)


def sweep_invariants(rows: Sequence[SweepRow]) -> Dict[str, bool]:
    """
    Row-wise and trend properties of a completed sweep

    pinsker: d >= kl_wg >= l1^2/2 on every ok row; nonnegative: every divergence
    >= -1e-10; monotone: d does not grow between consecutive rows; rate_shape:
    d sqrt(n)/ln n at the last row stays within 1.2x the max of the first three.
    """
    ok = [row for row in rows if row.ok]
    pinsker = all(
        row.d - row.kl_wg >= -PINSKER_TOLERANCE
        and row.kl_wg - 0.5 * row.l1 ** 2 >= -PINSKER_TOLERANCE
        for row in ok
    )
    nonnegative = all(
        min(row.d, row.kl_wg, row.kl_gw, row.l1) >= -DIVERGENCE_TOLERANCE for row in ok
    )
    monotone = all(b.d <= a.d + MONOTONE_TOLERANCE for a, b in zip(ok, ok[1:]))
    shape = [row.d * math.sqrt(row.n) / math.log(row.n) for row in ok if row.n > 1]
    rate_shape = len(shape) < 4 or shape[-1] <= RATE_SHAPE_FACTOR * max(shape[:3])
    return {
        "pinsker": pinsker,
        "nonnegative": nonnegative,
        "monotone": monotone,
        "rate_shape": rate_shape,
    }
