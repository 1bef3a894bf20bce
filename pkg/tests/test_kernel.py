import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blowup_lab.errors import DomainError, InsufficientSnapshots, InvalidSpec, NonpositiveTime
from blowup_lab.kernel import (
    PotentialQuadrature,
    ball_integral,
    ball_potential,
    double_layer_potential,
    gamma,
    identity_terms,
    sphere_measure,
    sphere_potential,
)
from blowup_lab.verify import gamma_mass, sphere_potential_n3_exact


def test_sphere_measure():
    assert sphere_measure(1) == pytest.approx(2.0)
    assert sphere_measure(2) == pytest.approx(2 * math.pi)
    assert sphere_measure(3) == pytest.approx(4 * math.pi)


def test_gamma_requires_positive_time():
    with pytest.raises(NonpositiveTime):
        gamma(0.1, 0.0, 1)
    assert gamma(0.0, 1.0 / (4 * math.pi), 2) == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(t=st.floats(1e-4, 10.0), n=st.integers(1, 4))
def test_gamma_has_unit_mass(t, n):
    assert abs(gamma_mass(t, n) - 1.0) < 1e-8


@pytest.mark.parametrize("r", [0.0, 0.1, 0.5, 0.9, 1.0])
@pytest.mark.parametrize("t", [1e-3, 0.02, 0.3, 3.0])
def test_sphere_potential_n3_closed_form(r, t):
    exact = sphere_potential_n3_exact(r, 1.0, t)
    if exact < 1e-200:
        return
    assert sphere_potential(r, 1.0, t, 3) == pytest.approx(exact, rel=1e-8)


@pytest.mark.parametrize("r", [0.0, 0.3, 0.8])
@pytest.mark.parametrize("t", [2e-3, 0.05, 1.0])
def test_sphere_potential_n2_bessel_form(r, t):
    # ∫_{S_R} Γ ds = R/(2t) e^{-(r²+R²)/4t} I0(rR/2t); use the scaled Bessel to avoid overflow
    R = 1.0
    x = r * R / (2 * t)
    exact = R / (2 * t) * math.exp(-(r - R) ** 2 / (4 * t)) * float(np.i0(x) * np.exp(-x))
    assert sphere_potential(r, R, t, 2) == pytest.approx(exact, rel=1e-8)


def test_n1_potentials_are_two_point_sums():
    r, R, t = 0.3, 1.0, 0.05
    gp, gm = gamma(R - r, t, 1), gamma(R + r, t, 1)
    assert sphere_potential(r, R, t, 1) == pytest.approx(gp + gm)
    expected = (gp * (r - R) - gm * (r + R)) / (2 * t)
    assert double_layer_potential(r, R, t, 1) == pytest.approx(expected)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("r,t", [(0.0, 0.1), (0.4, 0.02), (0.7, 0.5)])
def test_double_layer_is_radial_derivative_of_normalized_single_layer(n, r, t):
    # ∫_{S_ρ} ∂Γ/∂ν ds = ρ^{n-1} d/dρ [ρ^{1-n} ∫_{S_ρ} Γ ds]
    R, d = 1.0, 1e-4

    def scaled(rho):
        return rho ** (1 - n) * sphere_potential(r, rho, t, n)

    fd = R ** (n - 1) * (scaled(R + d) - scaled(R - d)) / (2 * d)
    assert double_layer_potential(r, R, t, n) == pytest.approx(fd, rel=1e-6, abs=1e-10)


@pytest.mark.parametrize("r", [0.0, 0.5, 0.9])
@pytest.mark.parametrize("t", [1e-3, 0.05, 1.0])
def test_ball_potential_n1_erf(r, t):
    s = 2 * math.sqrt(t)
    exact = 0.5 * (math.erf((1 - r) / s) + math.erf((1 + r) / s))
    assert ball_potential(r, 1.0, t, 1) == pytest.approx(exact, abs=1e-10)


@pytest.mark.parametrize("t", [1e-3, 0.05, 1.0])
def test_ball_potential_n3_at_centre(t):
    R = 1.0
    a = R / (2 * math.sqrt(t))
    exact = math.erf(a) - 2 * a / math.sqrt(math.pi) * math.exp(-a * a)
    assert ball_potential(0.0, R, t, 3) == pytest.approx(exact, abs=1e-10)


def test_ball_potential_bounded_by_one():
    for n in (1, 2, 3):
        for r in (0.0, 0.5, 1.0):
            assert 0.0 < ball_potential(r, 1.0, 1e-4, n) <= 1.0


def test_ball_integral_of_radial_density():
    # Gaussian density convolved with Γ over all space is a wider Gaussian; truncate far away
    n, t, R = 3, 0.01, 3.0
    density = lambda rho: np.exp(-rho**2 / 0.04)  # (4π·0.01)^{3/2} Γ(·, 0.01)
    val = ball_integral(0.2, R, t, n, density)
    exact = (0.04 * math.pi) ** 1.5 * gamma(0.2, t + 0.01, n)
    assert val == pytest.approx(exact, rel=1e-8)


def _exact_heat_solution(n, k):
    """Radial heat solutions on the unit ball and their boundary flux."""
    if n == 1:
        u = lambda r, t: np.cos(k * r) * np.exp(-k * k * t)
        flux = lambda t: -k * math.sin(k) * math.exp(-k * k * t)
    elif n == 3:
        u = lambda r, t: np.sinc(k * np.asarray(r) / math.pi) * np.exp(-k * k * t)
        flux = lambda t: (math.cos(k) - math.sin(k) / k) * math.exp(-k * k * t)
    else:
        raise ValueError(n)
    return u, flux


@pytest.mark.parametrize("n", [1, 3])
def test_identity_reproduces_exact_heat_solution(n):
    u, flux = _exact_heat_solution(n, 2.0)
    r = np.linspace(0.0, 1.0, 401)
    times = np.linspace(0.05, 0.06, 201)
    values = np.array([u(r, t) for t in times])
    terms = identity_terms(times, values, r, n, 0.0, 1.0, 1.0, 0.05, 0.06, [0.0, 0.45, 0.9],
                           flux=flux)
    assert terms["residual"].max() < 1e-5
    assert np.allclose(terms["u"], u(np.array([0.0, 0.45, 0.9]), 0.06), atol=1e-5)


def test_identity_argument_checks():
    r = np.linspace(0, 1, 33)
    times = np.linspace(0, 0.1, 11)
    vals = np.zeros((11, 33))
    with pytest.raises(DomainError):
        identity_terms(times, vals, r, 1, 0, 1, 1, 0.0, 0.01, [0.1])
    with pytest.raises(DomainError):
        identity_terms(times, vals, r, 1, 0, 1, 1, 0.01, 0.09, [0.1])
    with pytest.raises(DomainError):
        identity_terms(times, vals, r, 1, 0, 1, 1, 0.01, 0.02, [0.95])
    with pytest.raises(InsufficientSnapshots):
        identity_terms(times, vals, r, 1, 0, 1, 1, 0.01, 0.02, [0.1])
    with pytest.raises(InsufficientSnapshots):
        identity_terms(times[:3], vals[:3], r, 1, 0, 1, 1, 0.05, 0.06, [0.1], max_gap=1.0)


def test_quadrature_validation():
    with pytest.raises(InvalidSpec):
        PotentialQuadrature(angular_nodes=4)
    with pytest.raises(InvalidSpec):
        PotentialQuadrature(rule="trapezoid")
