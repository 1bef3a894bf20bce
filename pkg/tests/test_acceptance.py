"""Acceptance criteria A1-A8, each at its stated tolerance.

Every test records one line in ``conftest.ACCEPTANCE``; the terminal summary
prints them as ``A<k> PASS|FAIL  detail``.
"""
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE, TimedRun, fixture_config

from blowup_lab.analyze import SupersolutionEnvelope, estimate_blowup_time
from blowup_lab.discretize import RadialGrid
from blowup_lab.integrate import COLUMNS, Trace
from blowup_lab.kernel import integral_identity_residual
from blowup_lab.verify import (
    envelope_residual_min,
    gamma_mass,
    laplacian_error,
    observed_orders,
    random_admissible_pairs,
    sphere_potential_n3_exact,
)
from blowup_lab.kernel import sphere_potential


def record(key: str, ok: bool, detail: str) -> None:
    ACCEPTANCE[key] = (bool(ok), detail)
    print(f"{key} {'PASS' if ok else 'FAIL'}  {detail}")


def test_A1_rate_window_boundary_dominated(f1_run):
    s = f1_run.report["slope"]
    ok = s is not None and 0.20 <= s <= 0.55 and f1_run.elapsed <= 60.0
    record("A1", ok, f"F1 slope={s:.4f} in [0.20, 0.55], runtime {f1_run.elapsed:.1f}s <= 60s")
    assert ok


def test_A2_no_reaction_rate(f2_run):
    s = f2_run.report["slope"]
    ok = s is not None and abs(s - 0.5) <= 0.05 and f2_run.elapsed <= 60.0
    record("A2", ok, f"F2 slope={s:.4f}, |s-0.5|={abs(s - 0.5):.4f} <= 0.05, "
                     f"runtime {f2_run.elapsed:.1f}s <= 60s")
    assert ok


def _monitor_minima(run):
    tr = run.trace
    tol = 10.0 * tr.grid.h ** 2
    rows = tr.samples
    hyp = run.report["hypotheses"]
    q = run.cfg.spec.q
    mins = {
        "ur": rows[:, COLUMNS.index("min_ur")].min(),
        "ut": rows[:, COLUMNS.index("min_ut")].min(),
    }
    if q >= 1 and hyp["cond11"]["ok"]:
        mins["J2"] = rows[:, COLUMNS.index("min_J2")].min()
    if q >= 1 and hyp["cond12"]["ok"]:
        mins["J3"] = rows[:, COLUMNS.index("min_J3")].min()
    return mins, tol


def test_A3_invariant_monitors(f1_run, f2_run):
    details, ok = [], True
    for name, run in (("F1", f1_run), ("F2", f2_run)):
        mins, tol = _monitor_minima(run)
        ok &= all(v >= -tol for v in mins.values())
        details.append(f"{name}: " + ", ".join(f"min {k}={v:.2e}" for k, v in mins.items()))
    # ε is 0.9 q e^{q u0(R)} on both runs
    for run in (f1_run, f2_run):
        spec = run.cfg.problem()
        eps = 0.9 * spec.q * math.exp(spec.q * float(spec.u0.value(spec.R)))
        ok &= math.isclose(run.trace.epsilon, eps, rel_tol=1e-15)
    record("A3", ok, "; ".join(details) + f"; all >= -10h^2 = {-_monitor_minima(f1_run)[1]:.2e}")
    assert ok


def test_A4_boundary_only_certificate(f3_run):
    rep = f3_run.report
    t4 = rep["theorem4"]
    ok = rep["verdict_theorem4"] == "pass" and f3_run.elapsed <= 120.0
    record("A4", ok, f"F3 envelope excess {t4['envelope_excess']:.3f}, interior excess "
                     f"{t4['interior_excess']:.3f}, upper excess {t4['upper_hypothesis_excess']:.3f} "
                     f"(tol {t4['tol']:.3g}), reached u_stop={t4['reached_u_stop']}, "
                     f"runtime {f3_run.elapsed:.1f}s <= 120s")
    assert ok


def test_A5_kernel_oracle(f1_run):
    z, t = 0.02, 0.03
    spec = f1_run.cfg.problem()
    radii = [0.0, 0.3, 0.6, 0.9]
    res = integral_identity_residual(f1_run.trace, spec, z, t, radii)
    tr = f1_run.trace
    inside = (tr.snapshot_t >= z) & (tr.snapshot_t <= t)
    scale = float(np.abs(tr.snapshot_u[inside]).max())
    ok = res < 1e-2 * scale
    record("A5", ok, f"F1 window [{z}, {t}], max residual {res:.2e} < 1e-2 max|u| = {1e-2 * scale:.2e}")
    assert ok


def _synthetic_trace(T, beta, kappa, n_samples=400):
    """Exact ``M = -(1/β) log(κ (T - t))`` sampled on geometrically shrinking gaps."""
    t = T - (T / 2.0) * 0.97 ** np.arange(n_samples)
    M = -np.log(kappa * (T - t)) / beta
    samples = np.zeros((n_samples, len(COLUMNS)))
    samples[:, COLUMNS.index("t")] = t
    samples[:, COLUMNS.index("M")] = M
    samples[:, COLUMNS.index("max_u")] = M
    grid = RadialGrid(16)
    return Trace(grid, samples, t[:1], np.zeros((1, 17)), u_stop=float(M[-1]) + 1.0)


def test_A6_operator_and_kernel_units():
    mass_err = max(abs(gamma_mass(t, n) - 1.0) for n in (1, 2, 3) for t in (1e-3, 0.1, 2.0))
    rel = 0.0
    for r in (0.0, 0.2, 0.5, 0.9):
        for t in (2e-3, 0.05, 0.5):
            exact = sphere_potential_n3_exact(r, 1.0, t)
            rel = max(rel, abs(sphere_potential(r, 1.0, t, 3) - exact) / exact)
    order = min(min(observed_orders(lambda g: laplacian_error(g, n))) for n in (1, 2, 3))
    t_err = 0.0
    for T, beta, kappa in ((0.7, 2.0, 1.0), (1.3, 1.0, 3.0), (0.25, 0.5, 0.2)):
        est = estimate_blowup_time(_synthetic_trace(T, beta, kappa), beta)
        t_err = max(t_err, abs(est.T_hat - T))
    ok = mass_err < 1e-8 and rel < 1e-8 and order >= 1.9 and t_err < 1e-6
    record("A6", ok, f"|∫Γ-1|={mass_err:.1e} < 1e-8, sphere n=3 rel err {rel:.1e} < 1e-8, "
                     f"Laplacian order {order:.3f} >= 1.9, T_hat error {t_err:.1e} < 1e-6")
    assert ok


def test_A7_supersolution_sign():
    worst = min(envelope_residual_min(env) for env in random_admissible_pairs(100, seed=7))
    probe = math.inf
    for env in random_admissible_pairs(20, seed=8):
        bound = env.A * (4.0 * env.R ** 2 * (env.n + 1) + 1.0)
        assert env.A < bound
        sharp = SupersolutionEnvelope(A=env.A, B=env.A, C_up=env.C_up, T_cmp=env.T_cmp,
                                      lam=env.lam, n=env.n, R=env.R)
        probe = min(probe, envelope_residual_min(sharp))
    ok = worst >= 0.0 and probe < 0.0
    record("A7", ok, f"100 admissible pairs min residual {worst:.3e} >= 0; "
                     f"B=A probe min residual {probe:.3e} < 0")
    assert ok


def test_A8_determinism_and_refinement(f1_run, tmp_path):
    rerun = TimedRun(f1_run.cfg, tmp_path / "f1_again")
    same = (f1_run.out / "trace.csv").read_bytes() == (rerun.out / "trace.csv").read_bytes()
    slopes = {256: f1_run.report["slope"]}
    for N in (128, 512):
        cfg = f1_run.cfg.with_value("grid.N", N).with_value("analysis.oracle_window", None)
        slopes[N] = TimedRun(cfg, tmp_path / f"N{N}").report["slope"]
    gap = max(abs(a - b) for a in slopes.values() for b in slopes.values())
    ok = same and gap <= 0.02
    record("A8", ok, f"trace.csv rerun identical={same}; slopes "
                     + ", ".join(f"N={k}: {v:.4f}" for k, v in sorted(slopes.items()))
                     + f"; max pairwise gap {gap:.4f} <= 0.02")
    assert ok
