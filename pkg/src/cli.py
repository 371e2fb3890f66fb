"""
Command-Line Frontend
Every pipeline as a subcommand; exit 0 on success, 2 on validation errors, 3 on contract violations
"""

import argparse
import json
import math
import sys
from dataclasses import MISSING, fields
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from src.config import RunConfig, apply_environment, load_config, parse_ns
from src.distributions.functionals import cumulant_summary, cycle_specs, expected_regime
from src.distributions.minorization import MinorizationParams, common_minorization
from src.edgeworth.expansion import expansion_error_table
from src.errors import ContractViolation, InfiniteFisherInformationError, LabError
from src.errors import InsufficientDataError, UnboundedDerivativeError
from src.grid.convolution import METHODS, normalized_sum_density
from src.grid.grid_density import default_grid, gaussian_on
from src.information.divergences import symmetric_kl
from src.ratelab.rate_fit import chosen_fit, fit_rate
from src.ratelab.reports import emit_report, load_report
from src.ratelab.sweep import run_sweep, sweep_invariants
from src.stein.catalog import TEST_FUNCTIONS, named_function
from src.stein.solver import stein_bound_report, stein_solution
from src.stein.zero_bias import (
    zero_bias_density,
    zero_bias_identity_residual,
    zero_bias_second_moment,
)
from src.verification.decomposition import CSV_COLUMNS, decompose_symmetric_kl
from src.verification.minorant import (
    minorant_propagation_check,
    tail_bound_check,
    tail_bound_params,
)
from src.verification.truncation import build_truncation_function, calibrate_envelope

VERIFY_CHECKS = ("minorant", "tail-params", "tail-bound", "truncation", "envelope")
VERIFY_ALIASES = {
    "propA1": "minorant",
    "propA2": "tail-params",
    "property24": "tail-bound",
    "h1": "truncation",
}
IDENTITY_FUNCTIONS = {
    "x2": (lambda x: x * x, lambda x: 2.0 * x),
    "x3": (lambda x: x ** 3, lambda x: 3.0 * x * x),
    "sin": (np.sin, np.cos),
}

# flag dest -> RunConfig field
CONFIG_FLAGS = {
    "family": "families",
    "delta0": "delta0",
    "L": "L",
    "step": "step",
    "ns": "ns",
    "n": "n",
    "u": "u",
    "k": "k",
    "delta1": "delta1",
    "r2_polynomial": "r2_polynomial",
    "method": "method",
    "output_dir": "output_dir",
    "format": "formats",
    "workers": "workers",
    "timing": "timing",
    "progress": "progress",
}


def jsonable(value: Any) -> Any:
    """Recursively replace non-finite floats and numpy scalars for strict JSON"""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, Path):
        return str(value)
    return value


def _print_json(payload: Any) -> None:
    print(json.dumps(jsonable(payload), indent=2, sort_keys=True, allow_nan=False))


def _field_defaults() -> argparse.Namespace:
    """RunConfig defaults for help texts, read without building (and validating) a config"""
    return argparse.Namespace(**{
        f.name: f.default_factory() if f.default is MISSING else f.default for f in fields(RunConfig)
    })


def _common_flags() -> argparse.ArgumentParser:
    defaults = _field_defaults()
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("run configuration")
    group.add_argument("--config", type=Path, help="flat JSON/YAML config file (schema: 1)")
    group.add_argument(
        "--family", action="append", metavar="KIND:PARAMS",
        help=f"summand family, repeatable, cycled over n (default {defaults.families[0]})",
    )
    group.add_argument("--delta0", type=float, help=f"moment offset (default {defaults.delta0})")
    group.add_argument(
        "--L", type=float, help="grid half-width (default max(12, 4 sqrt(ln n) + 8))"
    )
    group.add_argument("--step", type=float, help=f"grid step (default {defaults.step})")
    group.add_argument(
        "--ns", type=parse_ns, help="sample sizes, lo:hi dyadic or a list (default 8:512)"
    )
    group.add_argument("--n", type=int, help=f"sample size (default {defaults.n})")
    group.add_argument(
        "--u", type=float, help=f"radius factor in [1, sqrt 2) (default {defaults.u:.6f})"
    )
    group.add_argument(
        "--k", type=int, choices=(0, 1, 2), help=f"Edgeworth order (default {defaults.k})"
    )
    group.add_argument("--delta1", type=float, help=f"minorized fraction (default {defaults.delta1})")
    group.add_argument(
        "--r2-polynomial", choices=("he4", "printed"),
        help=f"second polynomial of the order-2 term (default {defaults.r2_polynomial})",
    )
    group.add_argument(
        "--method", choices=METHODS, help=f"convolution engine (default {defaults.method})"
    )
    group.add_argument("--output-dir", help=f"output directory (default {defaults.output_dir})")
    group.add_argument(
        "--format", action="append", choices=("csv", "json", "svg"),
        help="report format, repeatable (default csv, json and svg)",
    )
    group.add_argument("--workers", type=int, help=f"sweep threads (default {defaults.workers})")
    group.add_argument("--timing", action="store_true", default=None, help="record runtime_ms")
    group.add_argument("--progress", action="store_true", default=None, help="show a progress bar")
    group.add_argument("--dump-config", type=Path, metavar="PATH", help="write the effective config")
    group.add_argument("--verbose", action="store_true", help="debug logging on stderr")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="entropic-lab",
        description="Numerical laboratory for the entropic central limit theorem",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("divergence", parents=[common], help="symmetric KL of W_n against N(0, 1)")
    sub.add_parser("sweep", parents=[common], help="metrics over ns, rate fits and reports")
    sub.add_parser("edgeworth", parents=[common], help="expansion errors of orders 0..k over ns")

    stein = sub.add_parser("stein", parents=[common], help="Stein equation solution and bounds")
    stein.add_argument(
        "--function", choices=sorted(TEST_FUNCTIONS), default="sin", help="test function g"
    )
    stein.add_argument("--check", action="store_true", help="enforce the residual and bounds")

    sub.add_parser("zero-bias", parents=[common], help="zero-bias transform of the first family")

    verify = sub.add_parser("verify", parents=[common], help="minorant, tail and truncation checks")
    verify.add_argument(
        "check",
        type=lambda name: VERIFY_ALIASES.get(name, name),
        choices=VERIFY_CHECKS,
        help="check to run; propA1, propA2, property24 and h1 name the first four",
    )
    verify.add_argument("--l1", type=float, help="minorant height (derived when omitted)")
    verify.add_argument("--l2", type=float, help="minorant decay (derived when omitted)")
    verify.add_argument("--J", type=float, help="Fisher information bound (derived when omitted)")
    verify.add_argument("--M", type=float, help="bound on E|X|^(4+delta0) (derived when omitted)")

    sub.add_parser("decompose", parents=[common], help="four-term bound of the symmetric KL")

    report = sub.add_parser("report", parents=[common], help="refit and re-emit a JSON bundle")
    report.add_argument("input", type=Path, help="JSON bundle written by sweep")
    report.add_argument("--metric", default=None, help="column to fit (default: the bundle's)")
    report.add_argument("--stem", default="report", help="output file name stem")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults < config file < environment < flags"""
    config = load_config(args.config) if args.config else RunConfig()
    config = apply_environment(config)
    overrides = {field: getattr(args, dest, None) for dest, field in CONFIG_FLAGS.items()}
    return config.with_overrides(**overrides)


def _configure_logging(verbose: bool) -> None:
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else "INFO")


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------
def cmd_divergence(config: RunConfig, args) -> Dict:
    n = config.n
    grid = config.grid(n)
    p = normalized_sum_density(config.specs(), n, grid, method=config.method)
    report = symmetric_kl(p, gaussian_on(grid))
    report.check_chain()
    return report.to_dict()


def cmd_sweep(config: RunConfig, args) -> Dict:
    rows = run_sweep(config.specs(), config.ns, config)
    try:
        fits = fit_rate(rows, "d")
    except InsufficientDataError as e:
        logger.warning(f"No rate fit: {e}")
        fits = []
    written = emit_report(rows, fits, config.formats, config.output_dir)
    summary = {
        "rows": len(rows),
        "failed": [row.n for row in rows if not row.ok],
        "invariants": sweep_invariants(rows),
        "expected_regime": expected_regime(config.specs()),
        "written": written,
    }
    if fits:
        best = chosen_fit(fits)
        summary.update(chosen=best.model, alpha=fits[-1].alpha)
        expected = summary["expected_regime"]
        if best.model not in (expected, "power"):
            logger.warning(f"Chosen rate {best.model} differs from the expected {expected}")
    return summary


def cmd_edgeworth(config: RunConfig, args) -> List[Dict]:
    table = expansion_error_table(
        config.specs(),
        config.ns,
        ks=range(config.k + 1),
        r2_polynomial=config.r2_polynomial,
        delta0=config.delta0,
        step=config.step,
        L=config.L,
    )
    if "csv" in config.formats:
        config.output_path.mkdir(parents=True, exist_ok=True)
        table.to_csv(config.output_path / "edgeworth.csv", index=False)
    return table.to_dict(orient="records")


def cmd_stein(config: RunConfig, args) -> Dict:
    g = named_function(args.function, default_grid(1, step=config.step, L=config.L))
    solution = stein_solution(g)
    payload = solution.to_dict()
    try:
        bounds = stein_bound_report(g, solution)
    except UnboundedDerivativeError as e:
        logger.warning(f"Bounds skipped: {e}")
        bounds = None
    payload["bounds"] = bounds.to_dict() if bounds else None
    if args.check:
        solution.check_residual()
        if bounds:
            bounds.check()
    if "csv" in config.formats:
        config.output_path.mkdir(parents=True, exist_ok=True)
        solution.to_frame().to_csv(config.output_path / f"stein_{args.function}.csv", index=False)
    return payload


def cmd_zero_bias(config: RunConfig, args) -> Dict:
    spec = config.specs()[0]
    density = zero_bias_density(spec)
    residuals = {
        name: zero_bias_identity_residual(spec, f, f1) for name, (f, f1) in IDENTITY_FUNCTIONS.items()
    }
    if "csv" in config.formats:
        config.output_path.mkdir(parents=True, exist_ok=True)
        density.to_csv(config.output_path / "zero_bias.csv")
    return {
        "family": spec.label,
        "second_moment": zero_bias_second_moment(spec),
        "grid_mass": density.mass,
        "identity_residuals": residuals,
    }


def _minorant(config: RunConfig, args) -> MinorizationParams:
    if args.l1 is not None and args.l2 is not None:
        return MinorizationParams(l1=args.l1, l2=args.l2, delta1=config.delta1)
    return common_minorization(config.specs(), config.delta1)


def _tail_params(config: RunConfig, args):
    summary = cumulant_summary(cycle_specs(config.specs(), config.n), config.delta0)
    J = args.J if args.J is not None else summary.J
    M = args.M if args.M is not None else summary.M
    if not math.isfinite(J):
        raise InfiniteFisherInformationError("tail-bound constants need finite Fisher information")
    minorant = _minorant(config, args)
    return tail_bound_params(J, M, config.delta0, config.delta1, minorant.l1, minorant.l2)


def cmd_verify(config: RunConfig, args) -> Dict:
    specs, n = config.specs(), config.n
    if args.check == "minorant":
        minorant = _minorant(config, args)
        result = minorant_propagation_check(
            minorant.l1, minorant.l2, specs, n, method=config.method
        )
        if not result.holds:
            raise ContractViolation("minorant propagation", result.min_margin)
        return {"l1": minorant.l1, "l2": minorant.l2, **result._asdict()}
    if args.check == "tail-params":
        return {**_tail_params(config, args).to_dict(), "delta1_exceeds_quarter": config.delta1 > 0.25}
    if args.check == "tail-bound":
        params = _tail_params(config, args)
        p_n = normalized_sum_density(specs, n, config.grid(n), method=config.method)
        result = tail_bound_check(p_n, params, n)
        if not result.holds:
            raise ContractViolation("tail lower bound", result.min_margin)
        return {"params": params.to_dict(), **result._asdict()}

    grid = config.grid(n)
    C = calibrate_envelope(specs, n, grid, method=config.method)
    if args.check == "envelope":
        return {"n": n, "C": C}
    h1 = build_truncation_function(config.u, n, C, grid)
    return {
        "n": n,
        "u": h1.u,
        "C": C,
        "x_u": h1.x_u,
        "blend_width": h1.blend_width,
        "feasibility_margin": h1.feasibility_margin,
        "properties": h1.properties(),
    }


def cmd_decompose(config: RunConfig, args) -> Dict:
    n = config.n
    report = decompose_symmetric_kl(
        config.specs(), n, config.u, config.grid(n), method=config.method
    )
    report.check()
    if "csv" in config.formats:
        config.output_path.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame([report.to_row()], columns=CSV_COLUMNS)
        frame.to_csv(config.output_path / "decomposition.csv", index=False)
    return report.to_dict()


def cmd_report(config: RunConfig, args) -> Dict:
    rows, _, stored_metric = load_report(args.input)
    metric = args.metric or stored_metric or "d"
    fits = fit_rate(rows, metric)
    written = emit_report(rows, fits, config.formats, config.output_dir, args.stem, metric)
    return {"metric": metric, "chosen": chosen_fit(fits).model, "written": written}


COMMANDS: Dict[str, Callable[[RunConfig, argparse.Namespace], Any]] = {
    "divergence": cmd_divergence,
    "sweep": cmd_sweep,
    "edgeworth": cmd_edgeworth,
    "stein": cmd_stein,
    "zero-bias": cmd_zero_bias,
    "verify": cmd_verify,
    "decompose": cmd_decompose,
    "report": cmd_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand; JSON results go to stdout, logs and errors to stderr"""
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        config = resolve_config(args)
        if args.dump_config:
            config.dump(args.dump_config)
        payload = COMMANDS[args.command](config, args)
    except ContractViolation as e:
        logger.error(f"{args.command}: {e}")
        print(f"contract violated: {e.invariant} (slack {e.slack:.3e})", file=sys.stderr)
        return e.exit_code
    except LabError as e:
        logger.error(f"{args.command}: {e}")
        return e.exit_code
    _print_json(payload)
    return 0


if __name__ == "__main__":
    sys.exit(main())
