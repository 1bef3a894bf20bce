"""Config-driven runs: integrate, analyze, persist, and re-analyze from disk."""
from __future__ import annotations

import json
import logging
import math
import platform
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import _kernels, storage
from .analyze import analyze_trace
from .config import ExperimentConfig
from .errors import ConfigError, InsufficientSnapshots
from .integrate import Trace, run
from .kernel import PotentialQuadrature, identity_terms
from .model import check_hypotheses, epsilon_bound

logger = logging.getLogger(__name__)

ORACLE_REL_TOL = 1e-2


def hypotheses_for(cfg: ExperimentConfig):
    spec = cfg.problem()
    grid = cfg.radial_grid()
    return spec, grid, check_hypotheses(spec, grid, cfg.analysis.T_cmp, cfg.analysis.C_up)


def build_report(cfg: ExperimentConfig, trace: Trace) -> dict:
    """report.json content: the config echo, every verdict, and the run record."""
    spec, _, hyp = hypotheses_for(cfg)
    analysis = analyze_trace(trace, spec, hyp, **cfg.analysis_kwargs())
    report = {"config_echo": cfg.to_dict()}
    report.update(analysis)
    report["run"] = storage.run_record(trace)
    return report


def failed_hypotheses(hyp) -> list[str]:
    out = []
    for name, value in hyp.as_dict().items():
        if isinstance(value, dict) and value.get("applicable", True) and value.get("ok") is False:
            out.append(name)
    return out


def epsilon_for(cfg: ExperimentConfig, spec) -> float:
    return cfg.analysis.epsilon_fraction * epsilon_bound(spec)


@dataclass
class RunResult:
    report: dict
    trace: Trace
    wall_time: float


def run_experiment(cfg: ExperimentConfig, out_dir: Optional[Path] = None,
                   dense_window: Optional[Sequence[float]] = None) -> RunResult:
    """Run one configured experiment; write all artifacts when ``out_dir`` is given."""
    cfg.validate()
    spec, grid, hyp = hypotheses_for(cfg)
    for name in failed_hypotheses(hyp):
        logger.warning("hypothesis %s does not hold; dependent gates are not applicable", name)
    if dense_window is None and cfg.analysis.oracle_window is not None:
        dense_window = cfg.analysis.oracle_window
    start = time.perf_counter()
    trace = run(spec, grid, cfg.step_control(), epsilon=epsilon_for(cfg, spec),
                dense_window=tuple(dense_window) if dense_window is not None else None)
    wall = time.perf_counter() - start
    report = build_report(cfg, trace)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        storage.write_trace(trace, out)
        storage.write_report(report, out)
        storage.write_plot(report, out)
        storage.write_meta(run_metadata(trace, wall), out)
    return RunResult(report=report, trace=trace, wall_time=wall)


def run_metadata(trace: Trace, wall: float) -> dict:
    from . import __version__

    return {
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "package_version": __version__,
        "backend": _kernels.BACKEND,
        "wall_time_s": wall,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "stop_reason": trace.stop_reason,
        "epsilon": trace.epsilon,
        "steps": len(trace) - 1,
    }


def load_run(run_dir: Path) -> tuple[ExperimentConfig, Trace, str]:
    """Config, trace and the stored report.json text of a finished run directory."""
    run_dir = Path(run_dir)
    try:
        text = (run_dir / "report.json").read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"no report.json in {run_dir}: {exc}") from exc
    stored = json.loads(text)
    cfg = ExperimentConfig.from_dict(stored["config_echo"]).validate()
    trace = storage.read_trace(run_dir, stored["run"], cfg.spec.R)
    return cfg, trace, text


def reanalyze(run_dir: Path) -> tuple[dict, bool]:
    """Recompute report.json from the CSV artifacts; also report whether it matches byte for byte."""
    cfg, trace, text = load_run(run_dir)
    report = build_report(cfg, trace)
    return report, storage.dumps_json(report) == text


def oracle_check(cfg: ExperimentConfig, window: Sequence[float], trace: Optional[Trace] = None,
                 radii: Optional[Sequence[float]] = None,  # fractions of R
                 quad: PotentialQuadrature = PotentialQuadrature()) -> dict:
    """Green-representation residual of a trace on ``[z, t]``; reruns densely if needed."""
    z, t = map(float, window)
    spec = cfg.problem()
    fractions = cfg.analysis.oracle_radii if radii is None else radii
    radii = [spec.R * float(x) for x in fractions]
    rerun = False
    terms = None
    if trace is not None:
        try:
            terms = identity_terms(trace.snapshot_t, trace.snapshot_u, trace.grid.r, spec.n,
                                   spec.lam, spec.p, spec.q, z, t, radii, quad)
        except InsufficientSnapshots as exc:
            logger.info("stored snapshots insufficient (%s); rerunning with a dense window", exc)
    if terms is None:
        rerun = True
        trace = run_experiment(cfg, dense_window=(z, t)).trace
        terms = identity_terms(trace.snapshot_t, trace.snapshot_u, trace.grid.r, spec.n,
                               spec.lam, spec.p, spec.q, z, t, radii, quad)
    inside = (trace.snapshot_t >= z) & (trace.snapshot_t <= t)
    scale = float(np.max(np.abs(trace.snapshot_u[inside]))) if inside.any() else float(
        np.max(np.abs(terms["u"])))
    residual = float(terms["residual"].max())
    return {
        "window": [z, t],
        "radii": radii,
        "residual": residual,
        "max_abs_u": scale,
        "relative": residual / scale if scale > 0 else math.inf,
        "passed": residual < ORACLE_REL_TOL * scale,
        "rerun": rerun,
        "terms": {k: v.tolist() for k, v in terms.items()},
    }
