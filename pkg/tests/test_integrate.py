import math

import numpy as np
import pytest

from blowup_lab import _kernels
from blowup_lab.discretize import RadialField, RadialGrid, radial_laplacian
from blowup_lab.errors import InvalidControl, InvalidSpec, Underflow
from blowup_lab.integrate import (
    COLUMNS,
    StepControl,
    _coefficients,
    compute_rhs,
    run,
    select_dt,
    step,
)
from blowup_lab.model import ProblemSpec, build_quadratic_initial_data, evaluate_initial_data


def make_spec(n=1, p=1.0, q=1.0, lam=0.0, a=-1.0, R=1.0):
    spec = ProblemSpec(n, R, p, q, lam)
    return spec.with_initial_data(build_quadratic_initial_data(a, spec))


@pytest.fixture(scope="module")
def small_trace():
    spec = make_spec(q=2.0, lam=1.0)
    return spec, run(spec, RadialGrid(48), StepControl(u_stop=6.0))


def test_rhs_matches_operator_plus_reaction():
    spec = make_spec(n=2, q=1.5, lam=0.7)
    g = RadialGrid(32)
    u = evaluate_initial_data(spec.u0, g)
    expected = radial_laplacian(u, 2, q=1.5).values + 0.7 * np.exp(u.values)
    assert np.allclose(compute_rhs(u, spec).values, expected, rtol=1e-13)


def test_step_size_caps():
    spec = make_spec(q=2.0, lam=1.0)
    g = RadialGrid(64)
    ctl = StepControl()
    u = evaluate_initial_data(spec.u0, g)
    assert select_dt(u, spec, ctl) == pytest.approx(0.4 * g.h**2 / 2.0)
    big = RadialField(np.full(65, 10.0), g)
    expected = 0.05 / (math.exp(10.0) + (2.0 / g.h) * 2.0 * math.exp(20.0))
    assert select_dt(big, spec, ctl) == pytest.approx(expected)
    with pytest.raises(Underflow):
        select_dt(RadialField(np.full(65, 40.0), g), spec, ctl)


def test_run_reaches_u_stop(small_trace):
    spec, tr = small_trace
    assert tr.stop_reason == "u_stop" and tr.reached_u_stop
    assert tr.samples.shape[1] == len(COLUMNS)
    assert np.all(np.diff(tr.t) > 0)
    assert np.all(np.diff(tr.M) >= 0)
    assert tr.dt[0] == 0.0 and tr.t[0] == 0.0
    assert tr.M[0] == pytest.approx(float(spec.u0.value(1.0)))
    # the recorded time is the compensated sum of the steps
    assert math.fsum(tr.dt) == pytest.approx(tr.t[-1], rel=1e-15, abs=0)


def test_snapshots_at_level_crossings(small_trace):
    spec, tr = small_trace
    M0 = float(spec.u0.value(1.0))
    assert tr.snapshot_t[0] == 0.0 and tr.snapshot_t[-1] == tr.t[-1]
    maxima = tr.snapshot_u.max(axis=1)
    for level in range(1, int(6.0 - M0) + 1):
        assert np.any(np.abs(maxima - (M0 + level)) < 0.06)
    assert np.all(np.diff(tr.snapshot_t) > 0)


def test_kernel_step_agrees_with_reference_step():
    spec = make_spec(n=3, q=1.5, lam=0.5)
    g = RadialGrid(32)
    u0 = evaluate_initial_data(spec.u0, g)
    dt = select_dt(u0, spec, StepControl())
    ref = step(u0, spec, dt).values
    for name in ("numpy", "numba"):
        kern = _kernels.get_impl(name)
        u = u0.values.copy()
        k = np.empty_like(u)
        coef = _coefficients(g, 3)
        kern.rhs(u, k, coef, 3, g.h, 1.0, 1.5, 0.5)
        out = np.empty((4, len(COLUMNS)))
        m, t, comp, status = kern.advance(u, k, 0.0, 0.0, coef, g.r, 3, g.h, 1.0, 1.5, 0.5, 0.1,
                                          0.4, 0.05, 100.0, 10.0, 100.0, 1, out, np.empty((4, 33)))
        assert m == 1 and t == dt
        assert np.allclose(u, ref, rtol=1e-14, atol=1e-14)


def test_dense_window_does_not_change_trajectory():
    spec = make_spec(q=2.0, lam=1.0)
    g = RadialGrid(32)
    ctl = StepControl(u_stop=4.0)
    plain = run(spec, g, ctl)
    dense = run(spec, g, ctl, dense_window=(0.01, 0.02))
    assert np.array_equal(plain.samples, dense.samples)
    # every accepted step inside the window has its own snapshot
    steps_inside = plain.t[(plain.t >= 0.01) & (plain.t <= 0.02)]
    assert np.all(np.isin(steps_inside, dense.snapshot_t))
    assert dense.snapshot_t.size > plain.snapshot_t.size


def test_t_max_stop():
    spec = make_spec()
    tr = run(spec, RadialGrid(32), StepControl(t_max=0.05))
    assert tr.stop_reason == "t_max" and not tr.reached_u_stop
    assert tr.t[-1] >= 0.05


def test_max_steps_stop():
    tr = run(make_spec(), RadialGrid(32), StepControl(max_steps=50))
    assert tr.stop_reason == "max_steps" and len(tr) == 51


def test_control_validation():
    with pytest.raises(InvalidControl):
        StepControl(cfl_safety=1.0)
    with pytest.raises(InvalidControl):
        StepControl(delta_max=0.0)
    with pytest.raises(InvalidControl):
        StepControl(u_stop=math.inf)
    with pytest.raises(InvalidControl):
        run(make_spec(), RadialGrid(32), StepControl(u_stop=-2.0))
    with pytest.raises(InvalidControl):
        run(make_spec(), RadialGrid(32), StepControl(), dense_window=(0.2, 0.1))


def test_run_requires_initial_data_and_matching_radius():
    with pytest.raises(InvalidSpec):
        run(ProblemSpec(1, 1.0, 1.0, 1.0, 0.0), RadialGrid(32))
    with pytest.raises(InvalidSpec):
        run(make_spec(), RadialGrid(32, 2.0))


def test_monitor_columns_match_field_recomputation(small_trace):
    spec, tr = small_trace
    u = tr.snapshot(-1)
    k = compute_rhs(u, spec)
    last = tr.samples[-1]
    assert last[COLUMNS.index("min_ut")] == pytest.approx(k.values.min(), rel=1e-12)
    assert last[COLUMNS.index("ut_R")] == pytest.approx(k.values[-1], rel=1e-12)
    assert last[COLUMNS.index("max_u")] == u.values.max()
