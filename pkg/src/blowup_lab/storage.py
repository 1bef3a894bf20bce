"""On-disk run artifacts: CSV traces, JSON reports, gnuplot scripts, and reloading."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Union

import numpy as np

from .discretize import RadialGrid
from .errors import ConfigError
from .integrate import COLUMNS, Trace

TRACE_COLUMNS = ("t", "M", "ut_R", "min_ur", "min_J2", "min_J3", "dt")
MONITOR_COLUMNS = ("t", "min_u", "min_ut", "max_u")
SNAPSHOT_COLUMNS = ("t", "r", "u")

PathLike = Union[str, Path]


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def _json_value(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_json_value(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_json_value(v, indent, level + 1) for v in seq) + "]"
        items = [pad + _json_value(v, indent, level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj: Any, indent: int = 2) -> str:
    """JSON text with 17 significant digits per float; non-finite floats become null."""
    return _json_value(obj, indent, 0) + "\n"


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_csv(path: Path, header, data: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        if data.size:
            np.savetxt(fh, data, fmt="%.17g", delimiter=",", newline="\n")


def _read_csv(path: Path, header) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != ",".join(header):
            raise ConfigError(f"{path.name}: unexpected header {first!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        data = data.reshape(0, len(header))
    return data


def write_trace(trace: Trace, out_dir: PathLike) -> None:
    """trace.csv, monitors.csv and snapshots.csv for ``trace``."""
    out = Path(out_dir)
    idx = [COLUMNS.index(c) for c in TRACE_COLUMNS]
    _write_csv(out / "trace.csv", TRACE_COLUMNS, trace.samples[:, idx])
    idx = [COLUMNS.index(c) for c in MONITOR_COLUMNS]
    _write_csv(out / "monitors.csv", MONITOR_COLUMNS, trace.samples[:, idx])
    k, m = trace.snapshot_u.shape
    long = np.empty((k * m, 3))
    long[:, 0] = np.repeat(trace.snapshot_t, m)
    long[:, 1] = np.tile(trace.grid.r, k)
    long[:, 2] = trace.snapshot_u.ravel()
    _write_csv(out / "snapshots.csv", SNAPSHOT_COLUMNS, long)


def run_record(trace: Trace) -> dict:
    """Deterministic facts about how the run ended, needed to rebuild the trace."""
    return {
        "stop_reason": trace.stop_reason,
        "epsilon": trace.epsilon,
        "u_stop": trace.u_stop,
        "steps": len(trace) - 1,
        "snapshots": int(trace.snapshot_t.size),
        "flags": dict(trace.flags),
    }


def read_trace(run_dir: PathLike, run: dict, R: float) -> Trace:
    """Rebuild a :class:`Trace` from the CSV artifacts plus the ``run`` record of report.json."""
    d = Path(run_dir)
    tr = _read_csv(d / "trace.csv", TRACE_COLUMNS)
    mon = _read_csv(d / "monitors.csv", MONITOR_COLUMNS)
    if tr.shape[0] != mon.shape[0] or not np.array_equal(tr[:, 0], mon[:, 0]):
        raise ConfigError("trace.csv and monitors.csv disagree")
    samples = np.empty((tr.shape[0], len(COLUMNS)))
    for j, c in enumerate(TRACE_COLUMNS):
        samples[:, COLUMNS.index(c)] = tr[:, j]
    for j, c in enumerate(MONITOR_COLUMNS):
        samples[:, COLUMNS.index(c)] = mon[:, j]
    snaps = _read_csv(d / "snapshots.csv", SNAPSHOT_COLUMNS)
    k = int(run["snapshots"])
    if k < 1 or snaps.shape[0] % k:
        raise ConfigError("snapshots.csv row count does not match the run record")
    m = snaps.shape[0] // k
    grid = RadialGrid(m - 1, R)
    blocks = snaps.reshape(k, m, 3)
    return Trace(
        grid=grid,
        samples=samples,
        snapshot_t=blocks[:, 0, 0].copy(),
        snapshot_u=blocks[:, :, 2].copy(),
        u_stop=float(run["u_stop"]),
        stop_reason=run["stop_reason"],
        epsilon=float(run["epsilon"]),
        flags=dict(run.get("flags", {})),
    )


def write_report(report: dict, out_dir: PathLike) -> str:
    text = dumps_json(report)
    _write_text(Path(out_dir) / "report.json", text)
    return text


def write_meta(meta: dict, out_dir: PathLike) -> None:
    _write_text(Path(out_dir) / "meta.json", dumps_json(meta))


def plot_script(report: dict) -> str:
    """Gnuplot commands for the amplitude history, the log-log rate fit and the profiles."""
    T = report.get("T_hat")
    s = report.get("slope")
    c = report.get("intercept")
    lines = [
        "# gnuplot script; run with `gnuplot plot.gp` inside the run directory",
        "set datafile separator ','",
        "set terminal pngcairo size 1200,400",
        "set output 'plot.png'",
        "set multiplot layout 1,3",
        "set title 'boundary amplitude'",
        "set xlabel 't'",
        "set ylabel 'u(R,t)'",
        "plot 'trace.csv' using 1:2 every ::1 with lines title 'M(t)'",
    ]
    if T is not None and s is not None and c is not None:
        lines += [
            f"T = {format_float(T)}",
            f"s = {format_float(s)}",
            f"c = {format_float(c)}",
            "set title sprintf('rate fit, slope %.4f', s)",
            "set xlabel '-log(T - t)'",
            "set ylabel 'u(R,t)'",
            "plot 'trace.csv' using ($1 < T ? -log(T - $1) : 1/0):2 every ::1 with lines title 'M', \\",
            "     c + s * x with lines dashtype 2 title 'fit'",
        ]
    else:
        lines += ["set title 'rate fit unavailable'", "plot 0 notitle"]
    lines += [
        "set title 'snapshot profiles'",
        "set xlabel 'r'",
        "set ylabel 'u'",
        "plot 'snapshots.csv' using 2:3:1 every ::1 with points pointtype 7 pointsize 0.2 palette notitle",
        "unset multiplot",
    ]
    return "\n".join(lines) + "\n"


def write_plot(report: dict, out_dir: PathLike) -> None:
    _write_text(Path(out_dir) / "plot.gp", plot_script(report))


def write_summary(rows: list[dict], path: PathLike) -> None:
    header = ("value", "T_hat", "slope", "window_lo", "window_hi", "verdict")

    def cell(v):
        if v is None:
            return ""
        if isinstance(v, float):
            return format_float(v) if math.isfinite(v) else ""
        return str(v)

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(cell(row.get(k)) for k in header) + "\n")
