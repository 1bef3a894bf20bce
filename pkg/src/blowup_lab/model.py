"""Continuous problem definition, admissible initial data and hypothesis checks.

The simulated system is

    u_t = Δu + λ e^{p u}      in the ball B_R ⊂ R^n,
    ∂u/∂η = e^{q u}           on the sphere ∂B_R,
    u(·, 0) = u0,

restricted to radially symmetric data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import InvalidSpec, NoCompatibleRoot

#: absolute slack used by every grid-pointwise condition check
CONDITION_SLACK = 1e-9


@dataclass(frozen=True)
class InitialData:
    """Quadratic radial profile ``u0(r) = a + b r**2``."""

    a: float
    b: float
    family: str = "quadratic"

    def __post_init__(self):
        if self.family != "quadratic":
            raise InvalidSpec(f"unknown initial-data family {self.family!r}")
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise InvalidSpec("initial-data coefficients must be finite")
        if self.b < 0:
            raise InvalidSpec("curvature b must be >= 0 (u0 must be nondecreasing in r)")

    def value(self, r):
        return self.a + self.b * np.asarray(r, dtype=float) ** 2

    def radial_derivative(self, r):
        return 2.0 * self.b * np.asarray(r, dtype=float)

    def laplacian(self, r, n: int):
        return np.full_like(np.asarray(r, dtype=float), 2.0 * self.b * n)


@dataclass(frozen=True)
class ProblemSpec:
    n: int
    R: float
    p: float
    q: float
    lam: float
    u0: Optional[InitialData] = None

    def __post_init__(self):
        validate_spec(self)

    def alpha(self) -> float:
        return max(self.p, self.q)

    def with_initial_data(self, u0: InitialData) -> "ProblemSpec":
        return replace(self, u0=u0)


def validate_spec(spec: ProblemSpec) -> None:
    if isinstance(spec.n, bool) or int(spec.n) != spec.n or spec.n < 1:
        raise InvalidSpec(f"dimension n must be an integer >= 1, got {spec.n!r}")
    for name in ("R", "p", "q", "lam"):
        if not math.isfinite(getattr(spec, name)):
            raise InvalidSpec(f"{name} must be finite")
    if spec.R <= 0:
        raise InvalidSpec("radius R must be > 0")
    if spec.q <= 0:
        raise InvalidSpec("boundary exponent q must be > 0")
    if spec.lam < 0:
        raise InvalidSpec("reaction coefficient lambda must be >= 0")
    if spec.lam > 0 and spec.p <= 0:
        raise InvalidSpec("reaction exponent p must be > 0 when lambda > 0")


def build_quadratic_initial_data(a: float, spec: ProblemSpec, b_max: float = 1e3) -> InitialData:
    """Return ``u0 = a + b r**2`` whose flux matches ``e^{q u0}`` at ``r = R``.

    ``b`` is the smallest root in ``(0, b_max]`` of
    ``g(b) = 2 b R - exp(q (a + b R**2))``. ``g`` is strictly concave with
    ``g(0) < 0``, so it has at most two roots and the smaller one lies left
    of the maximiser of ``g``; bisection runs on that bracket to machine
    precision.
    """
    validate_spec(spec)
    if not (b_max > 0 and math.isfinite(b_max)):
        raise InvalidSpec("b_max must be a positive finite number")
    if not math.isfinite(a):
        raise InvalidSpec("center value a must be finite")
    R, q = spec.R, spec.q

    def g(b: float) -> float:
        e = q * (a + b * R * R)
        if e > 700.0:
            return -math.inf
        return 2.0 * b * R - math.exp(e)

    # g'(b) = 2R - q R^2 exp(q(a + bR^2)) vanishes at b_star
    b_star = (math.log(2.0 / (q * R)) / q - a) / (R * R)
    hi = min(b_star, b_max)
    if hi <= 0 or g(hi) < 0:
        raise NoCompatibleRoot(
            f"2bR = exp(q(a + bR^2)) has no root in (0, {b_max}] for a={a}, q={q}, R={R}"
        )
    lo = 0.0
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return InitialData(a=float(a), b=hi)


def evaluate_initial_data(data: InitialData, grid) -> "RadialField":
    from .discretize import RadialField

    return RadialField(data.a + data.b * grid.r**2, grid)


@dataclass(frozen=True)
class Check:
    ok: bool
    value: float
    applicable: bool = True

    def as_dict(self) -> dict:
        return {"ok": self.ok, "value": self.value, "applicable": self.applicable}


@dataclass(frozen=True)
class HypothesisReport:
    compat: Check
    subsol: Check
    monotone: Check
    cond11: Check
    cond12: Check
    cond14: Check
    cond14_lhs: float
    cond14_rhs: float
    u0_sup_norm: float
    extra: dict = field(default_factory=dict)

    @property
    def compat_ok(self) -> bool:
        return self.compat.ok

    @property
    def subsol_ok(self) -> bool:
        return self.subsol.ok

    @property
    def monotone_ok(self) -> bool:
        return self.monotone.ok

    @property
    def cond11_ok(self) -> bool:
        return self.cond11.ok

    @property
    def cond12_margin(self) -> float:
        return self.cond12.value

    @property
    def cond14_ok(self) -> bool:
        return self.cond14.ok

    @property
    def basic_ok(self) -> bool:
        """Compatibility, subsolution and monotonicity of u0 all hold."""
        return self.compat.ok and self.subsol.ok and self.monotone.ok

    def as_dict(self) -> dict:
        return {
            "compat": self.compat.as_dict(),
            "subsol": self.subsol.as_dict(),
            "monotone": self.monotone.as_dict(),
            "cond11": self.cond11.as_dict(),
            "cond12": self.cond12.as_dict(),
            "cond14": self.cond14.as_dict(),
            "cond14_lhs": self.cond14_lhs,
            "cond14_rhs": self.cond14_rhs,
            "u0_sup_norm": self.u0_sup_norm,
        }


def cond14_sides(lam: float, n: int, R: float, horizon: float, upper_constant: float,
                 u0_sup_norm: float) -> tuple[float, float]:
    lhs = lam * (4.0 * R * R * (n + 1) + 1.0)
    rhs = min(
        1.0 / upper_constant,
        4.0 * (n + 1) / (R * R + 4.0 * (n + 1) * horizon) * math.exp(-u0_sup_norm),
    )
    return lhs, rhs


def check_hypotheses(spec: ProblemSpec, grid, horizon: float, upper_constant: float) -> HypothesisReport:
    """Evaluate every hypothesis imposed on ``(u0, λ, p, q)`` on ``grid``."""
    validate_spec(spec)
    if spec.u0 is None:
        raise InvalidSpec("spec carries no initial data")
    if not (horizon > 0 and upper_constant > 0):
        raise InvalidSpec("horizon and upper_constant must be > 0")
    u0, r, R, n = spec.u0, grid.r, spec.R, spec.n
    tol = CONDITION_SLACK

    values = u0.value(r)
    slope = u0.radial_derivative(r)
    lap = u0.laplacian(r, n)

    flux_target = math.exp(spec.q * float(u0.value(R)))
    flux = float(u0.radial_derivative(R))
    compat_res = abs(flux - flux_target)
    compat = Check(compat_res <= tol * max(1.0, abs(flux)), compat_res)

    reaction = spec.lam * np.exp(spec.p * values) if spec.lam > 0 else np.zeros_like(values)
    sub_min = float(np.min(lap + reaction))
    subsol = Check(sub_min >= -tol, sub_min)
    mono_min = float(np.min(slope))
    monotone = Check(mono_min >= -tol, mono_min)

    j_min = float(np.min(slope - (r / R) * np.exp(values)))
    cond11 = Check(j_min >= -tol, j_min, applicable=spec.q >= 1)
    # f(u) = λ e^{pu}; the margin must be strictly positive
    cond12 = Check(sub_min > tol, sub_min)

    sup_norm = float(np.max(np.abs(values)))
    lhs, rhs = cond14_sides(spec.lam, n, R, horizon, upper_constant, sup_norm)
    cond14 = Check(
        lhs <= rhs + tol,
        rhs - lhs,
        applicable=spec.p == 1 and spec.q == 1 and spec.lam > 0,
    )
    return HypothesisReport(
        compat=compat,
        subsol=subsol,
        monotone=monotone,
        cond11=cond11,
        cond12=cond12,
        cond14=cond14,
        cond14_lhs=lhs,
        cond14_rhs=rhs,
        u0_sup_norm=sup_norm,
    )


def epsilon_bound(spec: ProblemSpec) -> float:
    """Largest admissible ε for the ``u_t - ε u_r`` monitor: ``q e^{q u0(R)}``."""
    if spec.u0 is None:
        raise InvalidSpec("spec carries no initial data")
    return spec.q * math.exp(spec.q * float(spec.u0.value(spec.R)))
