import os
import subprocess
import sys

import numpy as np
import pytest

from blowup_lab import _kernels
from blowup_lab.discretize import RadialGrid
from blowup_lab.integrate import COLUMNS, StepControl, _coefficients, run
from blowup_lab.model import ProblemSpec, build_quadratic_initial_data


def spec_for(n, q, lam):
    s = ProblemSpec(n, 1.0, 1.0, q, lam)
    return s.with_initial_data(build_quadratic_initial_data(-1.0, s))


@pytest.mark.parametrize("n,q,lam", [(1, 2.0, 1.0), (2, 1.0, 0.0), (3, 1.5, 0.3)])
def test_pointwise_kernels_agree(n, q, lam):
    g = RadialGrid(40)
    rng = np.random.default_rng(n)
    u = np.cumsum(rng.uniform(0, 0.05, 41)) - 1.0
    coef = _coefficients(g, n)
    outs = {}
    for name in ("numpy", "numba"):
        kern = _kernels.get_impl(name)
        k = np.empty(41)
        kern.rhs(u, k, coef, n, g.h, 1.0, q, lam)
        mons = kern.monitors(u, k, g.r, g.h, q, 0.3)
        dt = kern.step_size(float(u.max()), n, g.h, 1.0, q, lam, 0.4, 0.05)
        outs[name] = (k, np.array(mons), dt)
    assert np.allclose(outs["numpy"][0], outs["numba"][0], rtol=1e-13, atol=1e-10)
    assert np.allclose(outs["numpy"][1], outs["numba"][1], rtol=1e-13, atol=1e-10)
    assert outs["numpy"][2] == pytest.approx(outs["numba"][2], rel=1e-15)


def test_full_runs_agree_between_backends():
    spec = spec_for(1, 2.0, 1.0)
    g = RadialGrid(32)
    ctl = StepControl(u_stop=5.0)
    a = run(spec, g, ctl, backend="numpy")
    b = run(spec, g, ctl, backend="numba")
    assert a.stop_reason == b.stop_reason
    assert abs(len(a) - len(b)) <= 1
    m = min(len(a), len(b)) - 1
    t_col = COLUMNS.index("t")
    assert a.samples[m, t_col] == pytest.approx(b.samples[m, t_col], rel=1e-10)
    assert np.allclose(a.snapshot_u[0], b.snapshot_u[0])


def test_unknown_backend():
    with pytest.raises(ValueError):
        _kernels.get_impl("fortran")


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, BLOWUP_LAB_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "import blowup_lab; print(blowup_lab.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"
