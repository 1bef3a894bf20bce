"""Explicit amplitude-aware time stepping of the semi-discrete radial system."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .discretize import RadialField, RadialGrid
from .errors import InvalidControl, InvalidSpec, Overflow, Underflow
from .model import ProblemSpec, epsilon_bound, evaluate_initial_data

logger = logging.getLogger(__name__)

COLUMNS = _kernels.COLUMNS
DT_MIN = _kernels.DT_MIN


@dataclass(frozen=True)
class StepControl:
    cfl_safety: float = 0.4
    delta_max: float = 0.05
    u_stop: float = 25.0
    t_max: float = 10.0
    max_steps: int = 50_000_000

    def __post_init__(self):
        if not 0.0 < self.cfl_safety < 1.0:
            raise InvalidControl("cfl_safety must lie in (0, 1)")
        if not self.delta_max > 0:
            raise InvalidControl("delta_max must be > 0")
        if not self.t_max > 0:
            raise InvalidControl("t_max must be > 0")
        if not math.isfinite(self.u_stop):
            raise InvalidControl("u_stop must be finite")
        if self.max_steps < 1:
            raise InvalidControl("max_steps must be >= 1")


@dataclass
class Trace:
    """Per-step scalar samples plus sparse solution snapshots of one run.

    ``samples`` has one row per accepted step (row 0 is the initial state,
    with ``dt = 0``) and the columns listed in :data:`COLUMNS`.
    """

    grid: RadialGrid
    samples: np.ndarray
    snapshot_t: np.ndarray
    snapshot_u: np.ndarray
    u_stop: float
    stop_reason: str = "u_stop"
    epsilon: float = 0.0
    flags: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return self.samples[:, COLUMNS.index(name)]

    @property
    def t(self) -> np.ndarray:
        return self.column("t")

    @property
    def M(self) -> np.ndarray:
        return self.column("M")

    @property
    def ut_R(self) -> np.ndarray:
        return self.column("ut_R")

    @property
    def dt(self) -> np.ndarray:
        return self.column("dt")

    def __len__(self) -> int:
        return self.samples.shape[0]

    def snapshot(self, i: int) -> RadialField:
        return RadialField(self.snapshot_u[i], self.grid)

    @property
    def reached_u_stop(self) -> bool:
        return bool(self.column("max_u")[-1] >= self.u_stop)


def _coefficients(grid: RadialGrid, n: int) -> np.ndarray:
    """Per-node factor of the first-difference term, ``(n-1)/(r_i 2h)``."""
    coef = np.zeros(grid.N + 1)
    coef[1:] = (n - 1) / (grid.r[1:] * (2.0 * grid.h))
    return coef


def compute_rhs(u: RadialField, spec: ProblemSpec) -> RadialField:
    """``Δu + λ e^{pu}`` with the flux ghost closure at ``r = R``."""
    grid = u.grid
    out = np.empty(grid.N + 1)
    _kernels.impl.rhs(u.values, out, _coefficients(grid, spec.n), spec.n, grid.h,
                      spec.p, spec.q, spec.lam)
    if not np.all(np.isfinite(out)):
        raise Overflow("right-hand side is not finite; the state is beyond the float range")
    return RadialField(out, grid)


def select_dt(u: RadialField, spec: ProblemSpec, ctl: StepControl) -> float:
    """Step size: parabolic cap or the amplitude-increment cap, whichever is smaller."""
    dt = _kernels.impl.step_size(float(np.max(u.values)), spec.n, u.grid.h, spec.p, spec.q,
                                 spec.lam, ctl.cfl_safety, ctl.delta_max)
    dt = float(dt)
    if not dt >= DT_MIN:
        raise Underflow(f"time step {dt:.3e} below {DT_MIN:.0e}: effectively at blow-up")
    return dt


def step(u: RadialField, spec: ProblemSpec, dt: float) -> RadialField:
    """One classical fourth-order Runge-Kutta step."""
    k1 = compute_rhs(u, spec).values
    v = u.values
    grid = u.grid
    half = 0.5 * dt
    k2 = compute_rhs(RadialField(v + half * k1, grid), spec).values
    k3 = compute_rhs(RadialField(v + half * k2, grid), spec).values
    k4 = compute_rhs(RadialField(v + dt * k3, grid), spec).values
    new = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(new)):
        raise Overflow("state left the float range during a step")
    return RadialField(new, grid)


def initial_sample(u: np.ndarray, k: np.ndarray, grid: RadialGrid, q: float, eps: float) -> np.ndarray:
    min_u, min_ur, min_ut, min_j2, min_j3 = _kernels.impl.monitors(u, k, grid.r, grid.h, q, eps)
    return np.array([0.0, u[-1], k[-1], min_ur, min_j2, min_j3, 0.0, min_u, min_ut, u.max()])


def run(
    spec: ProblemSpec,
    grid: RadialGrid,
    ctl: StepControl = StepControl(),
    *,
    epsilon: Optional[float] = None,
    dense_window: Optional[tuple[float, float]] = None,
    backend: Optional[str] = None,
    chunk: int = 65536,
) -> Trace:
    """Integrate from ``spec.u0`` until ``max u >= u_stop``, dt underflow or ``t_max``.

    Snapshots are stored at t = 0, whenever ``max u`` first passes
    ``u0(R) + 1, u0(R) + 2, ...``, at the final state, and at every step
    overlapping ``dense_window`` (used by the integral-identity oracle).
    Dense snapshots are observational only: the trajectory is identical with
    or without them.
    """
    if spec.u0 is None:
        raise InvalidSpec("spec carries no initial data")
    if abs(grid.R - spec.R) > 1e-14 * spec.R:
        raise InvalidSpec("grid radius differs from spec radius")
    kern = _kernels.get_impl(backend)
    eps = 0.9 * epsilon_bound(spec) if epsilon is None else float(epsilon)

    u = evaluate_initial_data(spec.u0, grid).values.copy()
    M0 = float(u.max())
    if not ctl.u_stop > M0:
        raise InvalidControl(f"u_stop={ctl.u_stop} must exceed max u0={M0}")
    n, h, p, q, lam = spec.n, grid.h, float(spec.p), float(spec.q), float(spec.lam)
    coef = _coefficients(grid, n)
    r = np.ascontiguousarray(grid.r)
    k = np.empty_like(u)
    kern.rhs(u, k, coef, n, h, p, q, lam)
    if not np.all(np.isfinite(k)):
        raise Overflow("initial right-hand side is not finite")

    rows = [initial_sample(u, k, grid, q, eps)[None, :]]
    snap_t = [0.0]
    snap_u = [u.copy()]
    buf = np.empty((chunk, len(COLUMNS)))
    work = np.empty((4, grid.N + 1))

    t, comp = 0.0, 0.0
    level_index = 1
    dt_cap = ctl.cfl_safety * h * h / (2.0 * n)
    if dense_window is not None:
        t0, t1 = map(float, dense_window)
        if not 0.0 <= t0 < t1:
            raise InvalidControl("dense_window must satisfy 0 <= t0 < t1")
        dense_start = t0 - dt_cap
    steps = 0
    reason = None
    while reason is None:
        dense = dense_window is not None and dense_start <= t < t1
        if dense and snap_t[-1] != t:
            snap_t.append(t)
            snap_u.append(u.copy())
        t_pause = ctl.t_max
        if dense_window is not None and t < dense_start:
            t_pause = min(t_pause, dense_start)
        m_level = M0 + level_index
        max_steps = 1 if dense else min(chunk, ctl.max_steps - steps)
        m, t, comp, status = kern.advance(
            u, k, t, comp, coef, r, n, h, p, q, lam, eps, ctl.cfl_safety, ctl.delta_max,
            ctl.u_stop, t_pause, m_level, max_steps, buf, work,
        )
        if m:
            rows.append(buf[:m].copy())
            steps += m
        if status == _kernels.STATUS_NONFINITE:
            raise Overflow(f"state overflowed near t={t!r}; lower u_stop")
        umax = float(u.max())
        if dense and m:
            snap_t.append(t)
            snap_u.append(u.copy())
        if status == _kernels.STATUS_LEVEL or umax >= M0 + level_index:
            if not (dense and m):
                snap_t.append(t)
                snap_u.append(u.copy())
            level_index = int(math.floor(umax - M0)) + 1
        if status == _kernels.STATUS_USTOP:
            reason = "u_stop"
        elif status == _kernels.STATUS_UNDERFLOW:
            reason = "dt_underflow"
        elif t >= ctl.t_max:
            reason = "t_max"
        elif steps >= ctl.max_steps:
            reason = "max_steps"
    if snap_t[-1] != t:
        snap_t.append(t)
        snap_u.append(u.copy())
    samples = np.concatenate(rows)
    if reason == "t_max":
        logger.warning("no blow-up observed before t_max=%g (max u=%.4g)", ctl.t_max, umax)
    M = samples[:, 1]
    flags = {"nonmonotone_M": bool(np.any(np.diff(M) < 0))}
    return Trace(
        grid=grid,
        samples=samples,
        snapshot_t=np.asarray(snap_t),
        snapshot_u=np.asarray(snap_u),
        u_stop=float(ctl.u_stop),
        stop_reason=reason,
        epsilon=eps,
        flags=flags,
    )
