"""Named property suites run by ``blowup-lab verify``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .analyze import (
    SupersolutionEnvelope,
    envelope_from_spec,
    verify_supersolution_pde,
)
from .discretize import RadialField, RadialGrid, derivative_field, radial_laplacian
from .errors import Cond14Violated, NoCompatibleRoot, UnknownSuite
from .kernel import (
    PotentialQuadrature,
    ball_potential,
    composite_rule,
    gamma,
    identity_terms,
    sphere_measure,
    sphere_potential,
)
from .model import (
    ProblemSpec,
    build_quadratic_initial_data,
    check_hypotheses,
    cond14_sides,
)


@dataclass(frozen=True)
class SuiteCheck:
    name: str
    ok: bool
    value: float
    threshold: str


# --------------------------------------------------------------------------- kernel


def gamma_mass(t: float, n: int) -> float:
    """``∫_{R^n} Γ(x, t) dx`` by Gauss-Legendre in the radius, truncated at 40√t."""
    rho, w = composite_rule(np.linspace(0.0, 40.0 * math.sqrt(t), 41), 20)
    return float(np.sum(w * sphere_measure(n) * rho ** (n - 1) * gamma(rho, t, n)))


def sphere_potential_n3_exact(r: float, R: float, t: float) -> float:
    """Closed form of the single-layer potential of S_R in R^3."""
    c = (4.0 * math.pi * t) ** -0.5
    if r == 0.0:
        return 4.0 * math.pi * R * R * (4.0 * math.pi * t) ** -1.5 * math.exp(-R * R / (4.0 * t))
    return (R / r) * c * (math.exp(-(R - r) ** 2 / (4.0 * t)) - math.exp(-(R + r) ** 2 / (4.0 * t)))


def _kernel_suite() -> list[SuiteCheck]:
    out = []
    err = max(abs(gamma_mass(t, n) - 1.0) for n in (1, 2, 3) for t in (1e-3, 0.1, 2.0))
    out.append(SuiteCheck("gamma normalization |∫Γ-1|", err < 1e-8, err, "< 1e-8"))

    rel = 0.0
    for r in (0.0, 0.2, 0.5, 0.9):
        for t in (2e-3, 0.05, 0.5):
            exact = sphere_potential_n3_exact(r, 1.0, t)
            if exact > 1e-200:
                rel = max(rel, abs(sphere_potential(r, 1.0, t, 3) - exact) / exact)
    out.append(SuiteCheck("sphere potential n=3 vs closed form", rel < 1e-8, rel, "< 1e-8 rel"))

    err = 0.0
    for r in (0.0, 0.4, 0.8):
        for t in (1e-3, 0.05, 1.0):
            s = 2.0 * math.sqrt(t)
            exact = 0.5 * (math.erf((1.0 - r) / s) + math.erf((1.0 + r) / s))
            err = max(err, abs(ball_potential(r, 1.0, t, 1) - exact))
    out.append(SuiteCheck("ball potential n=1 vs erf form", err < 1e-8, err, "< 1e-8"))

    # u ≡ 1 solves the heat equation with zero flux: initial term minus double layer must give 1
    r_grid = np.linspace(0.0, 1.0, 33)
    times = np.linspace(0.0, 0.02, 5)
    values = np.ones((times.size, r_grid.size))
    res = 0.0
    for n in (1, 2, 3):
        terms = identity_terms(times, values, r_grid, n, 0.0, 1.0, 1.0, 0.01, 0.02,
                               [0.0, 0.5, 0.9], PotentialQuadrature(), flux=lambda tau: 0.0,
                               max_gap=1.0)
        res = max(res, float(terms["residual"].max()))
    out.append(SuiteCheck("Green identity for constant solution", res < 1e-8, res, "< 1e-8"))
    return out


# --------------------------------------------------------------------------- operators


def _cos_profile(r, n):
    u = np.cos(2.0 * r)
    lap = np.empty_like(r)
    lap[0] = -4.0 * n
    rr = r[1:]
    lap[1:] = -4.0 * np.cos(2.0 * rr) - (n - 1) * 2.0 * np.sin(2.0 * rr) / rr
    return u, -2.0 * np.sin(2.0 * r), lap


def observed_orders(op: Callable[[RadialGrid], float], sizes=(32, 64, 128, 256)) -> list[float]:
    """log2 error ratios over successive grid doublings."""
    errs = [op(RadialGrid(N)) for N in sizes]
    return [math.log2(a / b) for a, b in zip(errs[:-1], errs[1:])]


def laplacian_error(grid: RadialGrid, n: int) -> float:
    u, _, lap = _cos_profile(grid.r, n)
    approx = radial_laplacian(RadialField(u, grid), n).values
    return float(np.max(np.abs(approx - lap)[:-1]))


def derivative_error(grid: RadialGrid) -> float:
    u, ur, _ = _cos_profile(grid.r, 1)
    approx = derivative_field(RadialField(u, grid)).values
    return float(np.max(np.abs(approx - ur)))


def _operators_suite() -> list[SuiteCheck]:
    out = []
    err = 0.0
    for n in (1, 2, 3):
        spec = ProblemSpec(n, 1.0, 1.0, 1.0, 1.0)
        data = build_quadratic_initial_data(-1.0, spec)
        grid = RadialGrid(32)
        u = RadialField(data.value(grid.r), grid)
        lap = radial_laplacian(u, n, q=spec.q).values
        err = max(err, float(np.max(np.abs(lap - 2.0 * data.b * n))))
    out.append(SuiteCheck("Laplacian exact on compatible quadratics", err < 1e-8, err, "< 1e-8"))
    for n in (1, 2, 3):
        order = min(observed_orders(lambda g: laplacian_error(g, n)))
        out.append(SuiteCheck(f"Laplacian observed order n={n}", order >= 1.9, order, ">= 1.9"))
    order = min(observed_orders(derivative_error))
    out.append(SuiteCheck("derivative observed order", order >= 1.9, order, ">= 1.9"))
    grid = RadialGrid(16)
    u = RadialField(0.1 * grid.r**2 - 0.5, grid)
    d = derivative_field(u, q=2.0).values[-1]
    gap = abs(d - math.exp(2.0 * u.values[-1]))
    out.append(SuiteCheck("boundary derivative equals flux e^{qu}", gap == 0.0, gap, "== 0"))
    return out


# --------------------------------------------------------------------------- conditions


def _conditions_suite() -> list[SuiteCheck]:
    out = []
    lhs, rhs = cond14_sides(0.01, 1, 1.0, 1.0, 10.0, 1.0)
    out.append(SuiteCheck("cond14 holds at lambda=0.01 (0.09 <= 0.1)", lhs <= rhs, lhs - rhs, "<= 0"))
    lhs, rhs = cond14_sides(0.02, 1, 1.0, 1.0, 10.0, 1.0)
    out.append(SuiteCheck("cond14 fails at lambda=0.02 (0.18 > 0.1)", lhs > rhs, lhs - rhs, "> 0"))

    worst = 0.0
    for q in (0.5, 1.0, 2.0, 3.0):
        for a in (-3.0, -1.0, -0.5):
            spec = ProblemSpec(1, 1.0, 1.0, q, 1.0)
            try:
                data = build_quadratic_initial_data(a, spec)
            except NoCompatibleRoot:
                continue
            flux = 2.0 * data.b
            worst = max(worst, abs(flux - math.exp(q * float(data.value(1.0)))) / flux)
    out.append(SuiteCheck("compatible root flux residual", worst < 1e-12, worst, "< 1e-12 rel"))

    try:
        build_quadratic_initial_data(0.0, ProblemSpec(1, 1.0, 1.0, 2.0, 1.0))
        raised = False
    except NoCompatibleRoot:
        raised = True
    out.append(SuiteCheck("no compatible root for a=0, q=2", raised, float(raised), "raises"))

    grid = RadialGrid(128)
    ok = True
    for a in (-2.0, -1.0, -0.5):
        spec = ProblemSpec(1, 1.0, 1.0, 1.0, 1.0)
        spec = spec.with_initial_data(build_quadratic_initial_data(a, spec))
        ok &= check_hypotheses(spec, grid, 1.0, 10.0).cond11.ok
    out.append(SuiteCheck("cond11 holds for compatible q=1 data", ok, float(ok), "all hold"))
    return out


# --------------------------------------------------------------------------- supersolution


def random_admissible_pairs(count: int, seed: int = 0):
    """Yield envelopes with ``λ <= A`` and ``B >= A[4R²(n+1)+1]``."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, 4))
        R = float(rng.uniform(0.3, 2.0))
        A = float(10.0 ** rng.uniform(-3, 1))
        lam = A * float(rng.uniform(0.0, 1.0))
        B = A * (4.0 * R * R * (n + 1) + 1.0) * float(rng.uniform(1.0, 3.0))
        yield SupersolutionEnvelope(A=A, B=B, C_up=10.0, T_cmp=1.0, lam=lam, n=n, R=R)


def envelope_residual_min(env: SupersolutionEnvelope, N: int = 64) -> float:
    spec = ProblemSpec(env.n, env.R, 1.0, 1.0, env.lam)
    t_nodes = np.concatenate([np.linspace(0.0, 0.99, 34), 1.0 - np.logspace(-2, -9, 8)])
    return verify_supersolution_pde(env, spec, RadialGrid(N, env.R), t_nodes)


def _supersolution_suite() -> list[SuiteCheck]:
    out = []
    worst = min(envelope_residual_min(env) for env in random_admissible_pairs(100))
    out.append(SuiteCheck("100 admissible (A, B): min residual", worst >= 0.0, worst, ">= 0"))
    probe = math.inf
    for env in random_admissible_pairs(20, seed=1):
        sharp = SupersolutionEnvelope(A=env.A, B=env.A, C_up=env.C_up, T_cmp=env.T_cmp,
                                      lam=env.lam, n=env.n, R=env.R)
        probe = min(probe, envelope_residual_min(sharp))
    out.append(SuiteCheck("B = A below the admissible bound: residual < 0", probe < 0.0, probe, "< 0"))

    spec = ProblemSpec(1, 1.0, 1.0, 1.0, 0.01)
    spec = spec.with_initial_data(build_quadratic_initial_data(-1.0, spec))
    grid = RadialGrid(256)
    env = envelope_from_spec(spec, grid, 1.0, 10.0)
    res = verify_supersolution_pde(env, spec, grid, np.linspace(0.0, 1.0, 65)[:-1])
    out.append(SuiteCheck("envelope from lambda=0.01 spec", res >= 0.0, res, ">= 0"))
    spec2 = ProblemSpec(1, 1.0, 1.0, 1.0, 0.02).with_initial_data(spec.u0)
    try:
        envelope_from_spec(spec2, grid, 1.0, 10.0)
        flagged = False
    except Cond14Violated:
        flagged = True
    out.append(SuiteCheck("lambda=0.02 rejected by cond14", flagged, float(flagged), "raises"))
    return out


SUITES: dict[str, Callable[[], list[SuiteCheck]]] = {
    "kernel": _kernel_suite,
    "operators": _operators_suite,
    "conditions": _conditions_suite,
    "supersolution": _supersolution_suite,
}


def run_suite(name: str) -> list[SuiteCheck]:
    try:
        fn = SUITES[name]
    except KeyError:
        raise UnknownSuite(f"unknown suite {name!r}; choose from {', '.join(SUITES)}") from None
    return fn()


def format_table(name: str, checks: list[SuiteCheck]) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"suite {name}"]
    for c in checks:
        lines.append(f"  {'PASS' if c.ok else 'FAIL'}  {c.name:<{width}}  {c.value:.3e}  ({c.threshold})")
    return "\n".join(lines)
