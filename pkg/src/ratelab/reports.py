"""
Sweep Reports
CSV tables, JSON bundles and self-contained log-log SVG plots of a sweep
"""

import json
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from loguru import logger  # noqa: E402

from src.errors import InvalidParameterError  # noqa: E402
from src.ratelab.rate_fit import RateFit  # noqa: E402
from src.ratelab.sweep import SweepRow, rows_frame  # noqa: E402

REPORT_FORMATS = ("csv", "json", "svg")
SVG_STYLE = {
    "svg.fonttype": "none",
    "svg.hashsalt": "entropic-clt-lab",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
}
FIT_STYLES = {
    "log_over_sqrt": ("tab:orange", "--"),
    "inv_sqrt": ("tab:green", "-."),
    "inv": ("tab:red", ":"),
    "power": ("tab:purple", "-"),
}


def _finite_or_none(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _clean(record: Dict) -> Dict:
    return {key: _finite_or_none(value) for key, value in record.items()}


def bundle(rows: Sequence[SweepRow], fits: Sequence[RateFit], metric: str = "d") -> Dict:
    """JSON-ready bundle; non-finite values become null"""
    return {
        "metric": metric,
        "rows": [_clean(row.to_dict()) for row in rows],
        "fits": [_clean(fit.to_dict()) for fit in fits],
    }


def write_csv(rows: Sequence[SweepRow], path: Path) -> Path:
    rows_frame(rows).to_csv(path, index=False)
    return path


def write_json(rows: Sequence[SweepRow], fits: Sequence[RateFit], path: Path, metric: str) -> Path:
    text = json.dumps(bundle(rows, fits, metric), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def write_svg(
    rows: Sequence[SweepRow], fits: Sequence[RateFit], path: Path, metric: str
) -> Path:
    """Log-log plot of the metric against n; each fitted curve is a path with id fit-<model>"""
    ok = [row for row in rows if row.ok and getattr(row, metric) > 0]
    n = np.array([row.n for row in ok], dtype=float)
    y = np.array([getattr(row, metric) for row in ok])

    with plt.rc_context(SVG_STYLE):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        ax.loglog(n, y, "o", color="tab:blue", label=f"measured {metric}", gid="measured")
        if n.size:
            dense = np.geomspace(n.min(), n.max(), 200)
            for fit in fits:
                color, style = FIT_STYLES.get(fit.model, ("black", "-"))
                label = fit.model if fit.model != "power" else f"power (alpha={fit.alpha:.3f})"
                if fit.chosen:
                    label += " [chosen]"
                ax.loglog(
                    dense,
                    fit.predict(dense),
                    linestyle=style,
                    color=color,
                    linewidth=2.0 if fit.chosen else 1.0,
                    label=label,
                    gid=f"fit-{fit.model}",
                )
        ax.set_xlabel("n")
        ax.set_ylabel(metric)
        ax.legend(loc="best")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path


def emit_report(
    rows: Sequence[SweepRow],
    fits: Sequence[RateFit],
    formats: Sequence[str] = REPORT_FORMATS,
    output_dir: Union[str, Path] = "outputs",
    stem: str = "sweep",
    metric: str = "d",
) -> Dict[str, Path]:
    """
    Write the sweep in each requested format

    Args:
        rows: non-empty sweep rows
        fits: rate fits of `metric` (may be empty, then the SVG carries no curves)
        formats: any of csv, json, svg
        output_dir: created if missing
        stem: file name without extension
        metric: column plotted and recorded in the JSON bundle

    Returns:
        Mapping format -> written path
    """
    if not rows:
        raise InvalidParameterError("rows", "cannot emit a report for an empty sweep")
    unknown = sorted(set(formats) - set(REPORT_FORMATS))
    if unknown:
        raise InvalidParameterError("formats", f"unknown formats {unknown}")

    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    written = {}
    for fmt in REPORT_FORMATS:
        if fmt not in formats:
            continue
        path = output_dir / f"{stem}.{fmt}"
        if fmt == "csv":
            written[fmt] = write_csv(rows, path)
        elif fmt == "json":
            written[fmt] = write_json(rows, fits, path, metric)
        else:
            written[fmt] = write_svg(rows, fits, path, metric)
        logger.success(f"Wrote {fmt.upper()} report to {path}")
    return written


def _nan_if_none(value):
    return math.nan if value is None else value


def load_report(path: Union[str, Path]) -> Tuple[List[SweepRow], List[RateFit], Optional[str]]:
    """Re-read a JSON bundle written by emit_report"""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    rows = [SweepRow(**{k: _nan_if_none(v) for k, v in row.items()}) for row in data["rows"]]
    fits = [RateFit(**{k: _nan_if_none(v) for k, v in fit.items()}) for fit in data["fits"]]
    logger.info(f"Loaded report {path}: {len(rows)} rows, {len(fits)} fits")
    return rows, fits, data.get("metric")
