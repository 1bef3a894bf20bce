"""Verdicts on traces: blow-up time, log-rate slope, invariant monitors and the
supersolution comparison certifying boundary-only blow-up."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .discretize import RadialField, RadialGrid, derivative_field
from .errors import (
    Cond14Violated,
    InsufficientSamples,
    NonmonotoneTrace,
    NotApplicable,
)
from .integrate import Trace
from .model import CONDITION_SLACK, HypothesisReport, ProblemSpec, cond14_sides, epsilon_bound

PASS, FAIL, NA = "pass", "fail", "not_applicable"

TOL_SLOPE = 0.05
TOL_CMP = 0.1
# resolved fit window: T - t <= ASYMPTOTIC_HORIZON * R^2 and h e^{qM} <= RESOLUTION_LIMIT
ASYMPTOTIC_HORIZON = 0.01
RESOLUTION_LIMIT = 0.1
MIN_FIT_SAMPLES = 8


def _verdict(ok: bool) -> str:
    return PASS if ok else FAIL


# --------------------------------------------------------------------------- blow-up time


@dataclass(frozen=True)
class BlowupTime:
    T_hat: float
    primary: float
    secondary: float
    spread: float
    beta: float


def _line_root(t: np.ndarray, y: np.ndarray) -> float:
    """Root of the least-squares line through ``(t, y)``, computed about the last sample."""
    x = t - t[-1]
    slope, intercept = np.polyfit(x, y, 1)
    if not slope < 0:
        raise NonmonotoneTrace("linearised amplitude does not decrease toward blow-up")
    return float(t[-1] + (-intercept / slope))


def aitken_blowup_time(times: Sequence[float]) -> float:
    """Limit of a geometrically converging sequence of level-crossing times."""
    t = np.asarray(times, dtype=float)
    estimate = math.nan
    for j in range(len(t) - 2):
        d1, d2 = t[j + 1] - t[j], t[j + 2] - t[j + 1]
        denom = d2 - d1
        if denom < 0:
            estimate = float(t[j + 2] - d2 * d2 / denom)
    return estimate


def estimate_blowup_time(trace: Trace, beta: float, min_samples: int = 30) -> BlowupTime:
    """Extrapolate the blow-up time from the top of the amplitude history.

    Primary: if ``M = -(1/β) log(κ (T - t))`` then ``e^{-βM}`` is linear in
    ``t`` with root ``T``; a least-squares line is fitted over the top decade
    of ``e^{-βM}``. Secondary: Aitken extrapolation of the crossing times of
    the four unit-spaced levels ending at ``min(u_stop, final M)``.
    """
    if not beta > 0:
        raise ValueError("beta must be > 0")
    t, M = trace.t, trace.M
    if np.count_nonzero(M > M[0] + 2.0) < min_samples:
        raise InsufficientSamples(
            f"need >= {min_samples} samples with M above u0(R) + 2 to extrapolate"
        )
    top = min(trace.u_stop, float(M[-1]))
    tail = M >= top - 3.5
    if np.any(np.diff(M[tail]) < 0):
        raise NonmonotoneTrace("M(t) decreases near the end of the run")

    sel = M >= M[-1] - math.log(10.0) / beta
    if np.count_nonzero(sel) < 3:
        raise InsufficientSamples("fewer than 3 samples in the top amplitude decade")
    primary = _line_root(t[sel], np.exp(-beta * (M[sel] - M[-1])))

    levels = top - np.array([3.0, 2.0, 1.0, 0.0])
    crossing = np.interp(levels, M[tail], t[tail])
    secondary = aitken_blowup_time(crossing)

    t_end = float(t[-1])
    if primary > t_end:
        T_hat = primary
    elif secondary > t_end:
        T_hat = secondary
    else:
        raise InsufficientSamples("neither estimator extrapolates beyond the last sample")
    spread = abs(primary - secondary) if math.isfinite(secondary) else math.inf
    return BlowupTime(T_hat=T_hat, primary=primary, secondary=secondary, spread=spread, beta=beta)


# --------------------------------------------------------------------------- rate fit


@dataclass(frozen=True)
class RateReport:
    T_hat: float
    T_hat_ci: float
    slope: float
    intercept: float
    window: tuple[float, float]
    verdict: str
    fit_window: tuple[float, float]
    n_fit: int
    mode: str
    tail_slope: float = math.nan


def rate_window(spec: ProblemSpec) -> tuple[float, float]:
    """Proven slope interval ``[1/(2α), 1/q]``; degenerate ``1/(2q)`` when λ = 0."""
    if spec.lam == 0:
        return 1.0 / (2.0 * spec.q), 1.0 / (2.0 * spec.q)
    return 1.0 / (2.0 * spec.alpha()), 1.0 / spec.q


def _log_fit(t, M, T_hat):
    x = -np.log(T_hat - t)
    slope, intercept = np.polyfit(x, M, 1)
    return float(slope), float(intercept)


def fit_window_mask(trace: Trace, T_hat: float, q: float,
                    window: Union[str, Sequence[float]] = "resolved") -> tuple[np.ndarray, str]:
    t, M = trace.t, trace.M
    before = t < T_hat
    if isinstance(window, str):
        if window == "resolved":
            R, h = trace.grid.R, trace.grid.h
            near = (T_hat - t) <= ASYMPTOTIC_HORIZON * R * R
            resolved = M <= math.log(RESOLUTION_LIMIT / h) / q
            return before & near & resolved, "resolved"
        if window == "tail":
            top = min(trace.u_stop, float(M[-1]))
            return before & (M >= top - 2.0), "tail"
        raise ValueError(f"unknown fit window {window!r}")
    lo, hi = map(float, window)
    return before & (M >= lo) & (M <= hi), "explicit"


def fit_rate(trace: Trace, T_hat: float, spec: ProblemSpec,
             window: Union[str, Sequence[float]] = "resolved",
             tol_s: float = TOL_SLOPE, spread: float = 0.0) -> RateReport:
    """Least-squares slope of ``M`` against ``-log(T_hat - t)``.

    ``window`` selects the samples: ``"resolved"`` keeps the asymptotic
    samples whose boundary layer is still resolved by the grid
    (``T_hat - t <= 0.01 R^2`` and ``h e^{qM} <= 0.1``); ``"tail"`` keeps the
    top two amplitude units; a pair ``(lo, hi)`` is an explicit amplitude range.
    """
    mask, mode = fit_window_mask(trace, T_hat, spec.q, window)
    if np.count_nonzero(mask) < MIN_FIT_SAMPLES:
        raise InsufficientSamples(
            f"only {np.count_nonzero(mask)} samples in the {mode} fit window; refine the grid"
        )
    t, M = trace.t[mask], trace.M[mask]
    slope, intercept = _log_fit(t, M, T_hat)

    tail_slope = math.nan
    tail_mask, _ = fit_window_mask(trace, T_hat, spec.q, "tail")
    if mode != "tail" and np.count_nonzero(tail_mask) >= MIN_FIT_SAMPLES:
        tail_slope = _log_fit(trace.t[tail_mask], trace.M[tail_mask], T_hat)[0]

    lo, hi = rate_window(spec)
    ok = lo - tol_s <= slope <= hi + tol_s
    return RateReport(
        T_hat=T_hat,
        T_hat_ci=spread,
        slope=slope,
        intercept=intercept,
        window=(lo, hi),
        verdict=_verdict(ok),
        fit_window=(float(M.min()), float(M.max())),
        n_fit=int(mask.sum()),
        mode=mode,
        tail_slope=tail_slope,
    )


# --------------------------------------------------------------------------- monitors


@dataclass(frozen=True)
class MonitorParams:
    epsilon: float
    tol_mono: float

    @classmethod
    def for_run(cls, spec: ProblemSpec, grid: RadialGrid, epsilon_fraction: float = 0.9):
        return cls(epsilon=epsilon_fraction * epsilon_bound(spec), tol_mono=10.0 * grid.h**2)

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ValueError("epsilon must be >= 0")


@dataclass(frozen=True)
class Lemma1Minima:
    min_u: float
    min_ur: float
    min_ut: float
    flagged: tuple[str, ...]


def monitor_lemma1(u: RadialField, rhs: RadialField, tol: float, q: Optional[float] = None) -> Lemma1Minima:
    """Minima of ``u``, the discrete ``u_r`` and ``u_t``; names of those below ``-tol``.

    ``min u`` is reported but never flagged here: positivity is only checked
    as preservation across a run (see :func:`summarize_monitors`).
    """
    ur = derivative_field(u, q).values
    mins = {"u_r": float(ur.min()), "u_t": float(np.min(rhs.values))}
    flagged = tuple(k for k, v in mins.items() if v < -tol)
    return Lemma1Minima(float(np.min(u.values)), mins["u_r"], mins["u_t"], flagged)


def j_lower_field(u: RadialField, R: float, q: Optional[float] = None) -> np.ndarray:
    """``u_r - (r/R) e^{u}`` on the grid."""
    ur = derivative_field(u, q).values
    return ur - (u.grid.r / R) * np.exp(u.values)


def monitor_J_theorem2(u: RadialField, R: float, tol: float, q: Optional[float] = None) -> tuple[float, bool]:
    """``(min J, flagged)`` for ``J = u_r - (r/R) e^u``."""
    m = float(j_lower_field(u, R, q).min())
    return m, m < -tol


def monitor_J_theorem3(u: RadialField, rhs: RadialField, params: MonitorParams,
                       q: Optional[float] = None) -> tuple[float, bool]:
    """``(min J, flagged)`` for ``J = u_t - ε u_r``."""
    ur = derivative_field(u, q).values
    m = float(np.min(rhs.values - params.epsilon * ur))
    return m, m < -params.tol_mono


def summarize_monitors(trace: Trace, spec: ProblemSpec, hyp: HypothesisReport,
                       params: MonitorParams) -> dict:
    """Run-level verdicts of the per-step monitors recorded in ``trace``."""
    tol = params.tol_mono
    col = trace.column
    M = trace.M
    min_u = col("min_u")
    nonneg = np.nonzero(min_u >= 0)[0]
    if nonneg.size:
        first = int(nonneg[0])
        preserved = bool(np.all(min_u[first:] >= -tol))
    else:
        preserved = True
    lemma1 = {
        "min_ur": float(col("min_ur").min()),
        "min_ut": float(col("min_ut").min()),
        "min_u_after_positive": float(min_u[nonneg[0]:].min()) if nonneg.size else None,
        "positivity_preserved": preserved,
        "M_nondecreasing": not bool(np.any(np.diff(M) < 0)),
        "tol": tol,
    }
    lemma1_ok = (
        lemma1["min_ur"] >= -tol
        and lemma1["min_ut"] >= -tol
        and preserved
        and lemma1["M_nondecreasing"]
    )
    lemma1["verdict"] = _verdict(lemma1_ok) if hyp.basic_ok else NA

    ut_R = trace.ut_R
    two_alpha = 2.0 * spec.alpha() if spec.lam > 0 else 2.0 * spec.q
    ratio2 = ut_R / np.exp(two_alpha * M)
    top = M >= M[-1] - 1.0
    head_max = float(ratio2[~top].max()) if np.any(~top) else float(ratio2.max())
    j2_applicable = spec.q >= 1 and hyp.basic_ok and hyp.cond11.ok
    J2 = {
        "min": float(col("min_J2").min()),
        "boundary_ratio_max": float(ratio2.max()),
        "boundary_ratio_final": float(ratio2[-1]),
        "boundary_ratio_bounded": bool(ratio2[top].max() <= 10.0 * head_max),
        "tol": tol,
    }
    J2["verdict"] = (
        _verdict(J2["min"] >= -tol and J2["boundary_ratio_bounded"]) if j2_applicable else NA
    )

    eps = params.epsilon
    ratio3 = ut_R / np.exp(spec.q * M)
    j3_applicable = (
        spec.q >= 1 and hyp.basic_ok and hyp.cond12.ok
        and eps <= epsilon_bound(spec) * (1 + 1e-12)
        and math.isclose(eps, trace.epsilon, rel_tol=1e-12, abs_tol=0.0)
    )
    J3 = {
        "epsilon": eps,
        "min": float(col("min_J3").min()),
        "boundary_ratio_min": float(ratio3.min()),
        "tol": tol,
    }
    J3["verdict"] = (
        _verdict(J3["min"] >= -tol and J3["boundary_ratio_min"] >= eps - tol)
        if j3_applicable else NA
    )
    return {"lemma1": lemma1, "J2": J2, "J3": J3}


# --------------------------------------------------------------------------- supersolution


@dataclass(frozen=True)
class SupersolutionEnvelope:
    """Comparison function ``z = -log(A (R²-r²)² + B (T - t))``."""

    A: float
    B: float
    C_up: float
    T_cmp: float
    lam: float
    n: int
    R: float

    def v(self, r):
        r = np.asarray(r, dtype=float)
        return self.A * (self.R**2 - r**2) ** 2

    def z(self, r, t, T: Optional[float] = None):
        T = self.T_cmp if T is None else T
        return -np.log(self.v(r) + self.B * (T - np.asarray(t, dtype=float)))

    def interior_bound(self, r):
        return -np.log(self.v(r))


def envelope_from_spec(spec: ProblemSpec, grid: RadialGrid, T_cmp: float, C_up: float) -> SupersolutionEnvelope:
    """Smallest admissible constants: ``A = λ``, ``B = A [4R²(n+1) + 1]``."""
    if spec.p != 1 or spec.q != 1:
        raise NotApplicable("the supersolution comparison needs p = q = 1")
    if not spec.lam > 0:
        raise NotApplicable("the supersolution comparison needs lambda > 0")
    R, n = spec.R, spec.n
    A = spec.lam
    B = A * (4.0 * R * R * (n + 1) + 1.0)
    sup = float(np.max(np.abs(spec.u0.value(grid.r))))
    lhs, rhs = cond14_sides(spec.lam, n, R, T_cmp, C_up, sup)
    if lhs > rhs + CONDITION_SLACK:
        raise Cond14Violated(f"lambda[4R^2(n+1)+1] = {lhs:.6g} exceeds {rhs:.6g}")
    return SupersolutionEnvelope(A=A, B=B, C_up=C_up, T_cmp=T_cmp, lam=spec.lam, n=n, R=R)


def supersolution_residual(env: SupersolutionEnvelope, r, t, T: Optional[float] = None):
    """``z_t - Δz - λ e^z`` from the closed forms of ``z_t``, ``z_r``, ``z_rr``.

    The ``(n-1)/r z_r`` term is simplified analytically, so ``r = 0`` is regular.
    """
    T = env.T_cmp if T is None else T
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    A, B, R, n = env.A, env.B, env.R, env.n
    w = R * R - r * r
    D = env.v(r) + B * (T - t)
    z_t = B / D
    z_rr = (D * 4.0 * A * (R * R - 3.0 * r * r) + 16.0 * A * A * r * r * w * w) / (D * D)
    radial = (n - 1) * 4.0 * A * w / D
    return z_t - z_rr - radial - env.lam / D


def verify_supersolution_pde(env: SupersolutionEnvelope, spec: ProblemSpec, grid: RadialGrid,
                             t_nodes: Sequence[float]) -> float:
    """Minimum of the supersolution residual over ``grid × t_nodes`` (t < T_cmp)."""
    t_nodes = np.asarray(t_nodes, dtype=float)
    if np.any(t_nodes >= env.T_cmp):
        raise ValueError("t_nodes must lie before the comparison horizon")
    res = supersolution_residual(env, grid.r[:, None], t_nodes[None, :])
    return float(res.min())


@dataclass(frozen=True)
class BoundaryBlowupVerdict:
    verdict: str
    envelope_excess: float
    interior_excess: float
    upper_hypothesis_excess: float
    reached_u_stop: bool
    interior_max: float
    tol: float
    details: dict = field(default_factory=dict)


def check_boundary_blowup(trace: Trace, env: SupersolutionEnvelope, interior_fraction: float,
                          T_hat: float, spread: float = 0.0, tol_cmp: float = TOL_CMP) -> BoundaryBlowupVerdict:
    """Compare every snapshot against the envelope built on the estimated blow-up time.

    Passes iff (a) ``u <= z + tol`` at every snapshot and node, (b) nodes with
    ``r <= interior_fraction R`` stay below ``-log(A (R²-r²)²) + tol``, (c)
    ``u <= log(C_up/(T_hat - t)) + tol`` and (d) the run reached ``u_stop``.
    """
    if not 0.0 <= interior_fraction < 1.0:
        raise ValueError("interior_fraction must lie in [0, 1)")
    tol = tol_cmp + (spread if math.isfinite(spread) else 0.0)
    r = trace.grid.r
    times = trace.snapshot_t
    keep = times < T_hat
    U = trace.snapshot_u[keep]
    ts = times[keep][:, None]
    z = env.z(r[None, :], ts, T=T_hat)
    envelope_excess = float(np.max(U - z))
    upper = np.log(env.C_up / (T_hat - ts))
    upper_excess = float(np.max(U - upper))
    interior = r <= interior_fraction * env.R + 1e-12 * env.R
    interior_max = float(U[:, interior].max())
    interior_excess = float(np.max(U[:, interior] - env.interior_bound(r[interior])[None, :]))
    reached = trace.reached_u_stop
    ok = envelope_excess <= tol and interior_excess <= tol and upper_excess <= tol and reached
    return BoundaryBlowupVerdict(
        verdict=_verdict(ok),
        envelope_excess=envelope_excess,
        interior_excess=interior_excess,
        upper_hypothesis_excess=upper_excess,
        reached_u_stop=reached,
        interior_max=interior_max,
        tol=tol,
        details={"A": env.A, "B": env.B, "snapshots": int(keep.sum())},
    )


# --------------------------------------------------------------------------- full report


def analyze_trace(
    trace: Trace,
    spec: ProblemSpec,
    hyp: HypothesisReport,
    *,
    beta: Optional[float] = None,
    fit_window: Union[str, Sequence[float]] = "resolved",
    epsilon_fraction: float = 0.9,
    interior_fraction: float = 0.9,
    T_cmp: float = 1.0,
    C_up: float = 10.0,
    theorem4: bool = False,
) -> dict:
    """Every verdict for one run, as a JSON-ready dict (without the config echo)."""
    beta = spec.q if beta is None else beta
    report: dict = {"hypotheses": hyp.as_dict()}
    gates: dict[str, str] = {}
    bt, rate = None, None
    try:
        bt = estimate_blowup_time(trace, beta)
        rate = fit_rate(trace, bt.T_hat, spec, fit_window, spread=bt.spread)
    except (InsufficientSamples, NonmonotoneTrace) as exc:
        report["rate_error"] = str(exc)
    lo, hi = rate_window(spec)
    report.update(
        T_hat=bt.T_hat if bt else None,
        T_hat_spread=bt.spread if bt else None,
        T_hat_secondary=bt.secondary if bt else None,
        beta=beta,
        slope=rate.slope if rate else None,
        intercept=rate.intercept if rate else None,
        window=[lo, hi],
        fit_window=list(rate.fit_window) if rate else None,
        fit_mode=rate.mode if rate else None,
        n_fit=rate.n_fit if rate else 0,
        tail_slope=rate.tail_slope if rate else None,
    )
    rate_applicable = hyp.basic_ok and hyp.cond12.ok
    if not rate_applicable:
        gates["rate"] = NA
    else:
        gates["rate"] = rate.verdict if rate else FAIL
    report["verdict_rate"] = gates["rate"]

    if not theorem4:
        gates["theorem4"] = NA
        report["theorem4"] = {"requested": False}
    else:
        try:
            env = envelope_from_spec(spec, trace.grid, T_cmp, C_up)
        except (NotApplicable, Cond14Violated) as exc:
            gates["theorem4"] = NA
            report["theorem4"] = {"requested": True, "reason": str(exc)}
        else:
            if bt is None:
                gates["theorem4"] = FAIL
                report["theorem4"] = {"requested": True, "reason": "no blow-up time estimate"}
            else:
                res = verify_supersolution_pde(
                    env, spec, trace.grid, np.linspace(0.0, env.T_cmp, 65)[:-1]
                )
                chk = check_boundary_blowup(trace, env, interior_fraction, bt.T_hat, bt.spread)
                d = asdict(chk)
                d.update(requested=True, pde_residual_min=res)
                ok = chk.verdict == PASS and res >= 0
                gates["theorem4"] = _verdict(ok)
                report["theorem4"] = d
    report["verdict_theorem4"] = gates["theorem4"]

    params = MonitorParams.for_run(spec, trace.grid, epsilon_fraction)
    report["monitors"] = summarize_monitors(trace, spec, hyp, params)
    for name, mon in report["monitors"].items():
        gates[f"monitor_{name}"] = mon["verdict"]
    report["stop_reason"] = trace.stop_reason
    report["gates"] = gates
    report["all_applicable_pass"] = all(v in (PASS, NA) for v in gates.values())
    return report
