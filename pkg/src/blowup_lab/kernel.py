"""Heat kernel, its ball/sphere potentials and the Green-identity residual check.

For a radial solution the representation

    u(x,t) = ∫_B Γ(x-y,t-z) u(y,z) dy
             + λ ∫_z^t ∫_B Γ(x-y,t-τ) e^{pu(y,τ)} dy dτ
             + ∫_z^t ∫_S Γ(x-y,t-τ) ∂u/∂η(y,τ) ds_y dτ
             - ∫_z^t ∫_S u(y,τ) ∂Γ/∂η_y(x-y,t-τ) ds_y dτ

holds for interior x. All integrals over spheres reduce to a polar-angle
integral; ball integrals nest a radial rule around it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, InsufficientSnapshots, InvalidSpec, NonpositiveTime

MAX_WINDOW = 0.05


@dataclass(frozen=True)
class PotentialQuadrature:
    angular_nodes: int = 256
    time_nodes: int = 128
    rule: str = "gauss-legendre"
    panel_nodes: int = 16

    def __post_init__(self):
        if self.angular_nodes < 16 or self.time_nodes < 16 or self.panel_nodes < 4:
            raise InvalidSpec("quadrature node counts must be >= 16")
        if self.rule != "gauss-legendre":
            raise InvalidSpec(f"unsupported rule {self.rule!r}")


@lru_cache(maxsize=64)
def _legendre(m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(m)
    return x, w


def composite_rule(breaks: Sequence[float], m: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights with ``m`` points on each panel of ``breaks``."""
    b = np.unique(np.asarray(breaks, dtype=float))
    x, w = _legendre(m)
    lo, hi = b[:-1, None], b[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def sphere_measure(n: int) -> float:
    """Surface measure of the unit sphere in R^n (2 for the two-point 'sphere' of R^1)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def gamma(dist, t: float, n: int):
    """Fundamental solution ``(4πt)^{-n/2} exp(-dist²/(4t))``."""
    if not t > 0:
        raise NonpositiveTime(f"elapsed time must be > 0, got {t!r}")
    d = np.asarray(dist, dtype=float)
    out = (4.0 * math.pi * t) ** (-n / 2.0) * np.exp(-d * d / (4.0 * t))
    return float(out) if out.ndim == 0 else out


def _check_args(r, R, t):
    if not t > 0:
        raise NonpositiveTime(f"elapsed time must be > 0, got {t!r}")
    if r < 0 or r > R * (1.0 + 1e-14):
        raise DomainError(f"field radius {r} outside [0, {R}]")


def _angular_rule(width: float, quad: PotentialQuadrature):
    """Panels on [0, π] refined geometrically toward θ = 0 down to ``width``."""
    m = quad.panel_nodes
    if not width < math.pi:
        k = max(1, quad.angular_nodes // m)
        return composite_rule(np.linspace(0.0, math.pi, k + 1), m)
    k = int(math.ceil(math.log2(math.pi / width)))
    breaks = [0.0] + [width * 2.0**j for j in range(k)] + [math.pi]
    n_uniform = max(1, quad.angular_nodes // m - len(breaks) + 1)
    breaks += list(np.linspace(0.0, math.pi, n_uniform + 1))
    return composite_rule(breaks, m)


def _sphere_integrals(r: float, rho, s: float, n: int, quad: PotentialQuadrature):
    """Single- and double-layer integrals over spheres of radii ``rho`` about a point at radius ``r``.

    Returns ``(∫_{S_ρ} Γ ds_y, ∫_{S_ρ} ∂Γ/∂η_y ds_y)`` with the outward normal of S_ρ.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    if n == 1:
        g_plus = gamma(rho - r, s, 1)
        g_minus = gamma(rho + r, s, 1)
        single = g_plus + g_minus
        double = (g_plus * (r - rho) - g_minus * (r + rho)) / (2.0 * s)
        return single, double
    rmax = float(rho.max())
    width = math.sqrt(2.0 * s / (r * rmax)) if r * rmax > 0 else math.inf
    theta, w = _angular_rule(width, quad)
    cos_t = np.cos(theta)
    jac = w * np.sin(theta) ** (n - 2)
    rr = rho[:, None]
    d2 = r * r + rr * rr - 2.0 * r * rr * cos_t[None, :]
    g = (4.0 * math.pi * s) ** (-n / 2.0) * np.exp(-np.maximum(d2, 0.0) / (4.0 * s))
    scale = sphere_measure(n - 1) * rho ** (n - 1)
    single = scale * (g @ jac)
    double = scale * ((g * (r * cos_t[None, :] - rr)) @ jac) / (2.0 * s)
    return single, double


def sphere_potential(r: float, R: float, t: float, n: int,
                     quad: PotentialQuadrature = PotentialQuadrature()) -> float:
    """``∫_{S_R} Γ(x-y, t) ds_y`` for ``|x| = r``."""
    _check_args(r, R, t)
    return float(_sphere_integrals(r, R, t, n, quad)[0][0])


def double_layer_potential(r: float, R: float, t: float, n: int,
                           quad: PotentialQuadrature = PotentialQuadrature()) -> float:
    """``∫_{S_R} ∂Γ/∂η_y(x-y, t) ds_y`` for ``|x| = r``."""
    _check_args(r, R, t)
    return float(_sphere_integrals(r, R, t, n, quad)[1][0])


def _radial_rule(r: float, R: float, s: float, n: int, m: int):
    w = math.sqrt(2.0 * s)
    breaks = [0.0, R]
    breaks += list(np.linspace(0.0, R, 9))
    k = 0
    while w * 2.0 ** (k - 1) < R:
        for c in (r - w * 2.0**k, r + w * 2.0**k, r - 0.5 * w * 2.0**k, r + 0.5 * w * 2.0**k):
            if 0.0 < c < R:
                breaks.append(c)
        if n == 1 and 0.0 < w * 2.0**k - r < R:
            breaks.append(w * 2.0**k - r)
        k += 1
    if 0.0 < r < R:
        breaks.append(r)
    return composite_rule(breaks, m)


def ball_integral(r: float, R: float, s: float, n: int, density: Callable[[np.ndarray], np.ndarray],
                  quad: PotentialQuadrature = PotentialQuadrature()) -> float:
    """``∫_{B_R} Γ(x-y, s) g(|y|) dy`` for a radial density ``g``."""
    rho, w = _radial_rule(r, R, s, n, quad.panel_nodes)
    single, _ = _sphere_integrals(r, rho, s, n, quad)
    return float(np.sum(w * single * density(rho)))


def ball_potential(r: float, R: float, t: float, n: int,
                   quad: PotentialQuadrature = PotentialQuadrature()) -> float:
    """``∫_{B_R} Γ(x-y, t) dy``; rounding excess above 1 is clipped."""
    _check_args(r, R, t)
    val = ball_integral(r, R, t, n, np.ones_like, quad)
    return min(val, 1.0)


def _time_rule(S: float, quad: PotentialQuadrature):
    """Nodes in elapsed time s ∈ (0, S], panels halving toward s = 0."""
    m = quad.panel_nodes
    panels = max(1, quad.time_nodes // m)
    breaks = [0.0] + [S * 2.0 ** (-j) for j in range(panels - 1, -1, -1)]
    return composite_rule(breaks, m)


class _SnapshotSeries:
    """Piecewise-linear-in-time access to stored snapshots."""

    def __init__(self, times: np.ndarray, values: np.ndarray, z: float, t: float, max_gap: float):
        order = np.argsort(times, kind="stable")
        self.times = np.asarray(times)[order]
        self.values = np.asarray(values)[order]
        if self.times.size < 2 or self.times[0] > z or self.times[-1] < t:
            raise InsufficientSnapshots(f"snapshots do not cover [{z}, {t}]")
        lo = np.searchsorted(self.times, z, side="right") - 1
        hi = np.searchsorted(self.times, t, side="left")
        gaps = np.diff(self.times[lo:hi + 1])
        if gaps.size and gaps.max() > max_gap:
            raise InsufficientSnapshots(
                f"snapshot gap {gaps.max():.3e} exceeds {max_gap:.3e} inside [{z}, {t}]"
            )

    def __call__(self, tau: float) -> np.ndarray:
        j = int(np.searchsorted(self.times, tau, side="right")) - 1
        j = min(max(j, 0), self.times.size - 2)
        t0, t1 = self.times[j], self.times[j + 1]
        if t1 == t0:
            return self.values[j + 1]
        a = (tau - t0) / (t1 - t0)
        return (1.0 - a) * self.values[j] + a * self.values[j + 1]


def identity_terms(
    times: np.ndarray,
    values: np.ndarray,
    grid_r: np.ndarray,
    n: int,
    lam: float,
    p: float,
    q: float,
    z: float,
    t: float,
    x_nodes: Sequence[float],
    quad: PotentialQuadrature = PotentialQuadrature(),
    flux: Optional[Callable[[float], float]] = None,
    max_gap: Optional[float] = None,
) -> dict:
    """Evaluate each term of the Green representation at the radii ``x_nodes``.

    ``flux(τ)`` overrides the boundary normal derivative (default ``e^{q u(R,τ)}``).
    """
    if not 0.0 < z < t:
        raise DomainError("need 0 < z < t")
    if t - z > MAX_WINDOW:
        raise DomainError(f"window t - z = {t - z} exceeds the short-time limit {MAX_WINDOW}")
    R = float(grid_r[-1])
    x_nodes = np.asarray(x_nodes, dtype=float)
    if np.any(x_nodes < 0) or np.any(x_nodes > 0.9 * R * (1 + 1e-12)):
        raise DomainError("sample radii must lie in [0, 0.9 R]")
    series = _SnapshotSeries(times, values, z, t, (t - z) / 20.0 if max_gap is None else max_gap)
    S = t - z
    s_nodes, s_weights = _time_rule(S, quad)
    states = [series(t - s) for s in s_nodes]
    u_z = series(z)
    u_t = series(t)

    def interp(state):
        return lambda rho: np.interp(rho, grid_r, state)

    out = {k: np.zeros(x_nodes.size) for k in ("u", "initial", "reaction", "single", "double")}
    for i, r in enumerate(x_nodes):
        out["u"][i] = np.interp(r, grid_r, u_t)
        out["initial"][i] = ball_integral(r, R, S, n, interp(u_z), quad)
        for s, w, state in zip(s_nodes, s_weights, states):
            single, double = _sphere_integrals(r, R, s, n, quad)
            uR = state[-1]
            g = flux(t - s) if flux is not None else math.exp(q * uR)
            out["single"][i] += w * g * single[0]
            out["double"][i] += w * uR * double[0]
            if lam != 0.0:
                out["reaction"][i] += w * lam * ball_integral(
                    r, R, s, n, lambda rho, st=state: np.exp(p * np.interp(rho, grid_r, st)), quad
                )
    out["rhs"] = out["initial"] + out["reaction"] + out["single"] - out["double"]
    out["residual"] = np.abs(out["u"] - out["rhs"])
    return out


def integral_identity_residual(trace, spec, z: float, t: float, x_nodes: Sequence[float],
                               quad: PotentialQuadrature = PotentialQuadrature(),
                               flux: Optional[Callable[[float], float]] = None) -> float:
    """Max over ``x_nodes`` of ``|u(x,t) - (Green representation on [z, t])|``."""
    terms = identity_terms(trace.snapshot_t, trace.snapshot_u, trace.grid.r, spec.n, spec.lam,
                           spec.p, spec.q, z, t, x_nodes, quad, flux)
    return float(terms["residual"].max())
