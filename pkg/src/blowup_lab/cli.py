"""Command-line entry point ``blowup-lab``.

Exit codes: 0 success (all applicable gates pass), 1 runtime error,
2 configuration or usage error, 3 the run finished but a gate failed.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import Optional, Sequence

from . import storage
from .config import ExperimentConfig, load_config
from .errors import BlowupLabError, ConfigError, UnknownSuite
from .experiment import load_run, oracle_check, reanalyze, run_experiment
from .verify import SUITES, format_table, run_suite

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG, EXIT_GATE = 0, 1, 2, 3

SWEEP_AXES = {"p": "spec.p", "q": "spec.q", "lambda": "spec.lambda", "N": "grid.N"}
THREADS_ENV = "BLOWUP_LAB_THREADS"

logger = logging.getLogger("blowup_lab")


def _print_gates(report: dict, stream=sys.stdout) -> None:
    slope = report.get("slope")
    T = report.get("T_hat")
    lo, hi = report["window"]
    print(f"stop_reason  {report['stop_reason']}", file=stream)
    print(f"T_hat        {T:.12g}" if T is not None else "T_hat        unavailable", file=stream)
    if slope is not None:
        print(f"slope        {slope:.6f}  window [{lo:.6g}, {hi:.6g}]", file=stream)
    for name, verdict in report["gates"].items():
        print(f"gate {name:<16} {verdict}", file=stream)


def _gate_exit(report: dict) -> int:
    return EXIT_OK if report["all_applicable_pass"] else EXIT_GATE


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out) if args.out else Path(cfg.output.dir)
    result = run_experiment(cfg, out)
    _print_gates(result.report)
    print(f"artifacts    {out}")
    return _gate_exit(result.report)


def parse_values(axis: str, text: str) -> list:
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise ConfigError("sweep needs at least one value")
    try:
        return [int(s) if axis == "N" else float(s) for s in items]
    except ValueError as exc:
        raise ConfigError(f"bad sweep value: {exc}") from exc


def _sweep_task(cfg_dict: dict, axis: str, value, out_dir: str) -> dict:
    row = {"value": value, "T_hat": None, "slope": None, "window_lo": None, "window_hi": None}
    try:
        cfg = ExperimentConfig.from_dict(cfg_dict).with_value(SWEEP_AXES[axis], value).validate()
        report = run_experiment(cfg, Path(out_dir)).report
    except Exception as exc:  # a failing run must not abort its siblings
        row.update(verdict="error", error=f"{type(exc).__name__}: {exc}")
        return row
    lo, hi = report["window"]
    row.update(T_hat=report["T_hat"], slope=report["slope"], window_lo=lo, window_hi=hi,
               verdict=report["verdict_rate"])
    return row


def sweep_workers(n_tasks: int) -> int:
    raw = os.environ.get(THREADS_ENV)
    try:
        cap = int(raw) if raw else (os.cpu_count() or 1)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, min(cap, n_tasks))


def run_sweep(cfg: ExperimentConfig, axis: str, values: Sequence, out: Path) -> list[dict]:
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep axis must be one of {', '.join(SWEEP_AXES)}")
    if not values:
        raise ConfigError("sweep needs at least one value")
    out.mkdir(parents=True, exist_ok=True)
    base = cfg.to_dict()
    jobs = [(base, axis, v, str(out / f"{axis}={v}")) for v in values]
    workers = sweep_workers(len(jobs))
    rows: list[Optional[dict]] = [None] * len(jobs)
    if workers == 1:
        for i, job in enumerate(jobs):
            rows[i] = _sweep_task(*job)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_sweep_task, *job): i for i, job in enumerate(jobs)}
            for fut in as_completed(futures):
                rows[futures[fut]] = fut.result()
    storage.write_summary(rows, out / "summary.csv")
    return rows


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    values = parse_values(args.axis, args.values)
    out = Path(args.out) if args.out else Path(cfg.output.dir)
    rows = run_sweep(cfg, args.axis, values, out)
    for row in rows:
        slope = row["slope"]
        shown = f"{slope:.6f}" if slope is not None else "-"
        extra = f"  {row['error']}" if "error" in row else ""
        print(f"{args.axis}={row['value']}  slope {shown}  {row['verdict']}{extra}")
    print(f"summary      {out / 'summary.csv'}")
    if any(r["verdict"] == "error" for r in rows):
        return EXIT_RUNTIME
    return EXIT_OK if all(r["verdict"] in ("pass", "not_applicable") for r in rows) else EXIT_GATE


def cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    ok = True
    for name in names:
        checks = run_suite(name)
        print(format_table(name, checks))
        ok &= all(c.ok for c in checks)
    return EXIT_OK if ok else EXIT_GATE


def _parse_window(text: str) -> tuple[float, float]:
    try:
        z, t = (float(s) for s in text.split(","))
    except ValueError:
        raise ConfigError(f"--window needs 't0,t1', got {text!r}") from None
    return z, t


def cmd_oracle(args) -> int:
    window = _parse_window(args.window)
    trace = None
    if args.run_dir:
        cfg, trace, _ = load_run(Path(args.run_dir))
        if args.config:
            cfg = load_config(args.config)
    elif args.config:
        cfg = load_config(args.config)
    else:
        raise ConfigError("oracle needs --config or --run-dir")
    result = oracle_check(cfg, window, trace)
    print(f"window       [{window[0]:.6g}, {window[1]:.6g}]"
          f"{'  (rerun with dense snapshots)' if result['rerun'] else ''}")
    for r, res in zip(result["radii"], result["terms"]["residual"]):
        print(f"r={r:<8.4g} residual {res:.3e}")
    print(f"max residual {result['residual']:.3e}  max|u| {result['max_abs_u']:.6g}  "
          f"relative {result['relative']:.3e}  {'pass' if result['passed'] else 'fail'}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "oracle.json").write_text(storage.dumps_json(result), encoding="utf-8")
    return EXIT_OK if result["passed"] else EXIT_GATE


def cmd_analyze(args) -> int:
    report, same = reanalyze(Path(args.run_dir))
    _print_gates(report)
    print(f"report.json  {'reproduced exactly' if same else 'DIFFERS from stored copy'}")
    if not same:
        return EXIT_RUNTIME
    return _gate_exit(report)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="blowup-lab", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment and write its artifacts")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory (default: output.dir of the config)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="one run per value of a parameter")
    p.add_argument("--config", required=True)
    p.add_argument("--axis", required=True, help="one of p, q, lambda, N")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run a property suite")
    p.add_argument("--suite", required=True, help=f"one of {', '.join(SUITES)}, all")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="Green-representation residual on a time window")
    p.add_argument("--config")
    p.add_argument("--window", required=True, help="t0,t1 with 0 < t0 < t1 and t1 - t0 <= 0.05")
    p.add_argument("--run-dir", help="reuse the snapshots of a stored run when they cover the window")
    p.add_argument("--out", help="write oracle.json here")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("analyze", help="recompute report.json offline from a run directory")
    p.add_argument("--run-dir", required=True)
    p.set_defaults(func=cmd_analyze)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.command == "verify" and args.suite != "all" and args.suite not in SUITES:
            raise UnknownSuite(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}, all")
        return args.func(args)
    except (ConfigError, UnknownSuite) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BlowupLabError, ArithmeticError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
