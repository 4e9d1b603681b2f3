"""Command line interface.

Subcommands
-----------
compute
    Read an estimate summary (JSON) and print intervals for the target
    parameter under a one-sided constraint.
simulate
    Run the Monte Carlo coverage/length experiment on a grid of truths
    and write per-method CSV files.
verify
    Run the oracle verification suites and report pass/fail.
ols / iv
    Estimate from a CSV data table and emit an estimate summary (and,
    with ``--constraint``, the intervals directly).

Exit codes: 0 on success, 1 when a verification or simulation check
fails, 2 on invalid input.  ``INEQCI_SEED`` and ``INEQCI_OUT`` provide
environment defaults for ``--seed`` and ``--out``.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import verify as verify_mod
from .core import (
    EstimateSummary,
    EstimateValidationError,
    Level,
    estimate_from_json,
    estimate_to_json,
)
from .estimators import GmmSpec, constraint_from_spec, iv_gmm_with_endogeneity, ols
from .intervals import CiResult, eici, iici, iitci, uci
from .lr import lrci, sclrci
from .mc import (
    METHODS,
    McConfig,
    panel_a_curves,
    simulate_grid,
    write_cp_al_csv,
    write_panel_csv,
)

__all__ = ["main"]


def _env_seed() -> int:
    return int(os.environ.get("INEQCI_SEED", "0"))


def _env_out() -> str:
    return os.environ.get("INEQCI_OUT", ".")


def _parse_grid(text: str) -> np.ndarray:
    try:
        lo, step, hi = (float(part) for part in text.split(":"))
    except ValueError:
        raise EstimateValidationError(
            f"cannot parse grid {text!r}; expected 'lo:step:hi'"
        ) from None
    if step <= 0.0 or hi < lo:
        raise EstimateValidationError(f"grid {text!r} must have step > 0 and hi >= lo")
    count = int(round((hi - lo) / step)) + 1
    return np.round(lo + step * np.arange(count), 10)


def _parse_methods(text: str) -> tuple[str, ...]:
    methods = tuple(part.strip().upper() for part in text.split(",") if part.strip())
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise EstimateValidationError(
            f"unknown method(s) {unknown}; choose from {', '.join(METHODS)}"
        )
    if not methods:
        raise EstimateValidationError("no methods selected")
    return methods


def _compute_results(
    estimate: EstimateSummary,
    constraint,
    level: Level,
    methods: tuple[str, ...],
    reps: int,
    seed: int,
) -> list[CiResult]:
    needs_constraint = [m for m in methods if m != "UCI"]
    if needs_constraint and constraint is None:
        raise EstimateValidationError(
            f"methods {needs_constraint} require --constraint"
        )
    results = []
    for method in methods:
        if method == "UCI":
            results.append(uci(estimate, level))
        elif method == "EICI":
            results.append(eici(estimate, constraint, level))
        elif method == "IICI":
            results.append(iici(estimate, constraint, level))
        elif method == "IITCI":
            results.append(iitci(estimate, constraint, level))
        elif method == "LRCI":
            results.append(lrci(estimate, constraint, level))
        else:
            results.append(sclrci(estimate, constraint, level, reps=reps, seed=seed))
    return results


def _print_compute(
    estimate: EstimateSummary,
    results: list[CiResult],
    level: Level,
    fmt: str,
) -> None:
    uci_result = uci(estimate, level)
    if fmt == "csv":
        print("method,lower,upper,length,length_vs_uci,branch")
        for res in results:
            branch = res.branch or ""
            print(
                f"{res.kind},{res.lower:.17g},{res.upper:.17g},"
                f"{res.length:.17g},{res.length / uci_result.length:.17g},{branch}"
            )
        return
    t = estimate.target_index
    target_name = estimate.names[t] if estimate.names else f"coordinate {t}"
    print(f"target: {target_name}   alpha: {level.alpha:g}   n: {estimate.n}")
    comps = next((r.components for r in results if r.components is not None), None)
    if comps is not None:
        print(
            f"se: {comps.se:.6f}   se_eq: {comps.se_eq:.6f}   "
            f"threshold: {comps.threshold:.6f}   slack: {comps.g_value:.6f}"
        )
    print(f"{'method':<8}{'lower':>12}{'upper':>12}{'length':>12}{'vs UCI':>9}  notes")
    for res in results:
        notes = res.branch or ""
        if res.disjoint_from_uci:
            notes += " disjoint-from-UCI"
        print(
            f"{res.kind:<8}{res.lower:>12.6f}{res.upper:>12.6f}"
            f"{res.length:>12.6f}{res.length / uci_result.length:>9.3f}  {notes}".rstrip()
        )


def _cmd_compute(args) -> int:
    if args.estimate == "-":
        text = sys.stdin.read()
    else:
        text = Path(args.estimate).read_text()
    estimate = estimate_from_json(text)
    if args.target is not None:
        estimate = dataclasses.replace(
            estimate, target_index=estimate.index_of(args.target)
        )
    constraint = (
        constraint_from_spec(args.constraint, estimate)
        if args.constraint is not None
        else None
    )
    level = Level(args.alpha)
    methods = _parse_methods(args.methods)
    results = _compute_results(estimate, constraint, level, methods, args.reps, args.seed)
    _print_compute(estimate, results, level, args.format)
    return 0


def _cmd_simulate(args) -> int:
    grid = _parse_grid(args.grid)
    methods = _parse_methods(args.methods)
    config = McConfig(
        v_hat=np.array([[1.0, args.rho], [args.rho, 1.0]]),
        theta2_grid=grid,
        reps=args.reps,
        alpha=args.alpha,
        seed=args.seed,
        methods=methods,
        sclr_reps=args.sclr_reps,
    )
    records = simulate_grid(config)
    out = Path(args.out)
    paths = write_cp_al_csv(records, out)
    curves = panel_a_curves(config, grid)
    paths += write_panel_csv(curves, grid, out)
    failures = 0
    for method in methods:
        rows = [r for r in records if r.method == method]
        failures += sum(r.failures for r in rows)
        worst = min(rows, key=lambda r: r.cp)
        print(
            f"{method}: min CP {worst.cp:.4f} at theta2={worst.theta2:g}, "
            f"mean AL {np.mean([r.al for r in rows]):.4f}"
        )
    for path in paths:
        print(f"wrote {path}")
    if failures:
        print(f"error: {failures} draw evaluation failure(s)", file=sys.stderr)
        return 1
    return 0


def _cmd_verify(args) -> int:
    checks = (
        [part.strip() for part in args.checks.split(",") if part.strip()]
        if args.checks is not None
        else None
    )
    try:
        results = verify_mod.run_all(
            seed=args.seed,
            checks=checks,
            instances=args.instances,
            grid_points=args.grid_points,
            draws=args.draws,
        )
    except ValueError as exc:
        raise EstimateValidationError(str(exc)) from exc
    for result in results:
        print(result.line())
    return 0 if all(result.passed for result in results) else 1


def _names_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _emit_estimate(estimate: EstimateSummary, args, meta: dict) -> None:
    doc = estimate_to_json(estimate, meta=meta)
    if args.out is not None:
        Path(args.out).write_text(doc + "\n")
        names = estimate.names or tuple(f"coordinate {i}" for i in range(estimate.k))
        print(f"wrote {args.out}")
        print(f"{'parameter':<20}{'estimate':>14}{'std. error':>14}")
        for i, name in enumerate(names):
            se = float(np.sqrt(estimate.v_hat[i, i] / estimate.n))
            print(f"{name:<20}{estimate.theta_hat[i]:>14.6f}{se:>14.6f}")
    else:
        print(doc)
    if args.constraint is not None:
        constraint = constraint_from_spec(args.constraint, estimate)
        level = Level(args.alpha)
        methods = _parse_methods(args.methods)
        results = _compute_results(
            estimate, constraint, level, methods, args.reps, args.seed
        )
        _print_compute(estimate, results, level, "table")


def _cmd_ols(args) -> int:
    data = pd.read_csv(args.data)
    estimate = ols(
        data,
        dependent=args.dependent,
        regressors=_names_list(args.regressors),
        add_intercept=not args.no_intercept,
        robust=not args.classical,
        cluster=args.cluster,
        small_sample=args.small_sample,
    )
    if args.target is not None:
        estimate = dataclasses.replace(
            estimate, target_index=estimate.index_of(args.target)
        )
    meta = {
        "estimator": "ols",
        "vcov": "clustered" if args.cluster else ("robust" if not args.classical else "classical"),
        "small_sample": bool(args.small_sample),
    }
    _emit_estimate(estimate, args, meta)
    return 0


def _cmd_iv(args) -> int:
    data = pd.read_csv(args.data)
    targets = None
    if args.endogeneity_targets is not None:
        text = args.endogeneity_targets.strip()
        targets = [] if text.lower() == "none" else _names_list(text)
    spec = GmmSpec(
        dependent=args.dependent,
        endogenous=_names_list(args.endogenous),
        instruments=_names_list(args.instruments),
        exogenous=_names_list(args.exogenous) if args.exogenous else [],
        endogeneity_targets=targets,
        add_intercept=not args.no_intercept,
        cluster=args.cluster,
    )
    estimate = iv_gmm_with_endogeneity(data, spec)
    if args.target is not None:
        estimate = dataclasses.replace(
            estimate, target_index=estimate.index_of(args.target)
        )
    meta = {
        "estimator": "iv_gmm",
        "vcov": "clustered" if args.cluster else "robust",
    }
    _emit_estimate(estimate, args, meta)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ineqci",
        description="Confidence intervals exploiting one inequality on nuisance parameters.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, methods_default="UCI,EICI,IICI"):
        p.add_argument("--alpha", type=float, default=0.05, help="miscoverage level")
        p.add_argument("--seed", type=int, default=_env_seed(), help="random seed")
        p.add_argument(
            "--methods", default=methods_default,
            help=f"comma-separated subset of {','.join(METHODS)}",
        )

    p = sub.add_parser("compute", help="intervals from a stored estimate summary")
    p.add_argument("estimate", help="path to an estimate JSON document, or - for stdin")
    p.add_argument("--constraint", help="one-sided bound, e.g. 'theta2 <= 0'")
    p.add_argument("--target", help="target parameter name (overrides the stored index)")
    add_common(p)
    p.add_argument("--reps", type=int, default=100_000, help="SCLRCI simulation draws")
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.set_defaults(func=_cmd_compute)

    p = sub.add_parser("simulate", help="Monte Carlo coverage/length experiment")
    add_common(p)
    p.add_argument("--reps", type=int, default=100_000, help="draws per grid point")
    p.add_argument("--grid", default="-5:0.1:0", help="true theta2 grid as lo:step:hi")
    p.add_argument("--rho", type=float, default=0.7, help="target/nuisance correlation")
    p.add_argument("--sclr-reps", type=int, default=100_000, help="SCLRCI critical value draws")
    p.add_argument("--out", default=_env_out(), help="output directory for CSV files")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("verify", help="run the oracle verification suites")
    p.add_argument("--checks", help="comma-separated check names (default: all)")
    p.add_argument("--seed", type=int, default=_env_seed())
    p.add_argument("--instances", type=int, help="override instance count per check")
    p.add_argument("--grid-points", type=int, help="override grid resolution")
    p.add_argument("--draws", type=int, help="override draws per instance")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("ols", help="least squares from a CSV table")
    p.add_argument("--data", required=True, help="path to a CSV file with a header row")
    p.add_argument("--dependent", required=True)
    p.add_argument("--regressors", required=True, help="comma-separated column names")
    p.add_argument("--no-intercept", action="store_true")
    p.add_argument("--classical", action="store_true", help="homoskedastic covariance")
    p.add_argument("--cluster", help="cluster column name")
    p.add_argument("--small-sample", action="store_true")
    p.add_argument("--target", help="target parameter name")
    p.add_argument("--out", help="write the estimate JSON here instead of stdout")
    p.add_argument("--constraint", help="also print intervals under this bound")
    add_common(p)
    p.add_argument("--reps", type=int, default=100_000)
    p.set_defaults(func=_cmd_ols)

    p = sub.add_parser("iv", help="IV-GMM with endogeneity moments from a CSV table")
    p.add_argument("--data", required=True)
    p.add_argument("--dependent", required=True)
    p.add_argument("--endogenous", required=True, help="comma-separated column names")
    p.add_argument("--instruments", required=True, help="comma-separated column names")
    p.add_argument("--exogenous", help="comma-separated column names")
    p.add_argument(
        "--endogeneity-targets",
        help="comma-separated endogenous columns to stack (default all, 'none' for plain IV)",
    )
    p.add_argument("--no-intercept", action="store_true")
    p.add_argument("--cluster", help="cluster column name")
    p.add_argument("--target", help="target parameter name")
    p.add_argument("--out", help="write the estimate JSON here instead of stdout")
    p.add_argument("--constraint", help="also print intervals under this bound")
    add_common(p)
    p.add_argument("--reps", type=int, default=100_000)
    p.set_defaults(func=_cmd_iv)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (EstimateValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
