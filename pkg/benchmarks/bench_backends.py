"""Compare the numba and numpy kernel backends on one fixture run.

    python3 benchmarks/bench_backends.py [--N 128] [--u-stop 10]

Reports wall time per backend (numba timed after a warm-up call so JIT
compilation is excluded) and the largest difference between the two traces.
"""
import argparse
import time

import numpy as np

from blowup_lab.discretize import RadialGrid
from blowup_lab.integrate import StepControl, run
from blowup_lab.model import ProblemSpec, build_quadratic_initial_data


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=128)
    ap.add_argument("--u-stop", type=float, default=10.0)
    args = ap.parse_args()

    spec = ProblemSpec(1, 1.0, 1.0, 2.0, 1.0)
    spec = spec.with_initial_data(build_quadratic_initial_data(-1.0, spec))
    grid = RadialGrid(args.N)
    ctl = StepControl(u_stop=args.u_stop)
    run(spec, RadialGrid(16), StepControl(u_stop=0.0), backend="numba")

    traces = {}
    for name in ("numba", "numpy"):
        start = time.perf_counter()
        traces[name] = run(spec, grid, ctl, backend=name)
        elapsed = time.perf_counter() - start
        print(f"{name:<6} {elapsed:8.3f} s  {len(traces[name]) - 1} steps")
    a, b = traces["numba"], traces["numpy"]
    m = min(len(a), len(b))
    diff = np.max(np.abs(a.samples[:m] - b.samples[:m]) / (1.0 + np.abs(b.samples[:m])))
    print(f"max relative sample difference over {m} rows: {diff:.3e}")


if __name__ == "__main__":
    main()
