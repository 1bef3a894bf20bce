import math

import numpy as np
from numba import njit

from .common import (
    DT_MIN,
    STATUS_CHUNK,
    STATUS_LEVEL,
    STATUS_NONFINITE,
    STATUS_PAUSE,
    STATUS_UNDERFLOW,
    STATUS_USTOP,
)


@njit(cache=True)
def rhs(u, out, coef, n, h, p, q, lam):
    N = u.shape[0] - 1
    inv_h2 = 1.0 / (h * h)
    out[0] = 2.0 * n * (u[1] - u[0]) * inv_h2
    for i in range(1, N):
        out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_h2 + coef[i] * (u[i + 1] - u[i - 1])
    f = math.exp(q * u[N])
    g = u[N - 1] + 2.0 * h * f
    out[N] = (g - 2.0 * u[N] + u[N - 1]) * inv_h2 + coef[N] * (g - u[N - 1])
    if lam != 0.0:
        for i in range(N + 1):
            out[i] += lam * math.exp(p * u[i])


@njit(cache=True)
def step_size(umax, n, h, p, q, lam, cfl, dmax):
    dt_par = cfl * h * h / (2.0 * n)
    denom = 2.0 / h * q * math.exp(q * umax)
    if lam != 0.0:
        denom = lam * p * math.exp(p * umax) + denom
    dt_nl = dmax / denom
    return dt_par if dt_par < dt_nl else dt_nl


@njit(cache=True)
def monitors(u, k, r, h, q, eps):
    """(min u, min u_r, min u_t, min J2, min J3) for one state."""
    N = u.shape[0] - 1
    R = r[N]
    inv_2h = 1.0 / (2.0 * h)
    min_u = u[0]
    min_ut = k[0]
    ur = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv_2h
    min_ur = ur
    min_j2 = ur - (r[0] / R) * math.exp(u[0])
    min_j3 = k[0] - eps * ur
    for i in range(1, N + 1):
        if i < N:
            ur = (u[i + 1] - u[i - 1]) * inv_2h
        else:
            ur = math.exp(q * u[N])
        if u[i] < min_u:
            min_u = u[i]
        if k[i] < min_ut:
            min_ut = k[i]
        if ur < min_ur:
            min_ur = ur
        j2 = ur - (r[i] / R) * math.exp(u[i])
        if j2 < min_j2:
            min_j2 = j2
        j3 = k[i] - eps * ur
        if j3 < min_j3:
            min_j3 = j3
    return min_u, min_ur, min_ut, min_j2, min_j3


@njit(cache=True)
def _all_finite(a):
    for i in range(a.shape[0]):
        if not math.isfinite(a[i]):
            return False
    return True


@njit(cache=True)
def advance(u, k, t, comp, coef, r, n, h, p, q, lam, eps, cfl, dmax,
            u_stop, t_pause, m_level, max_steps, out, work):
    """Take up to ``max_steps`` RK4 steps in place; ``k`` holds rhs(u) on entry and exit.

    Returns ``(steps, t, comp, status)``; ``comp`` is the Kahan compensation
    term of the accumulated time.
    """
    N = u.shape[0] - 1
    k2 = work[0]
    k3 = work[1]
    k4 = work[2]
    tmp = work[3]
    m = 0
    status = STATUS_CHUNK
    while m < max_steps:
        umax = u[0]
        for i in range(1, N + 1):
            if u[i] > umax:
                umax = u[i]
        dt = step_size(umax, n, h, p, q, lam, cfl, dmax)
        if not dt >= DT_MIN:
            status = STATUS_UNDERFLOW
            break
        half = 0.5 * dt
        for i in range(N + 1):
            tmp[i] = u[i] + half * k[i]
        rhs(tmp, k2, coef, n, h, p, q, lam)
        for i in range(N + 1):
            tmp[i] = u[i] + half * k2[i]
        rhs(tmp, k3, coef, n, h, p, q, lam)
        for i in range(N + 1):
            tmp[i] = u[i] + dt * k3[i]
        rhs(tmp, k4, coef, n, h, p, q, lam)
        sixth = dt / 6.0
        for i in range(N + 1):
            u[i] = u[i] + sixth * (k[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        y = dt - comp
        tt = t + y
        comp = (tt - t) - y
        t = tt
        if not _all_finite(u):
            status = STATUS_NONFINITE
            break
        rhs(u, k, coef, n, h, p, q, lam)
        if not _all_finite(k):
            status = STATUS_NONFINITE
            break
        min_u, min_ur, min_ut, min_j2, min_j3 = monitors(u, k, r, h, q, eps)
        umax = u[0]
        for i in range(1, N + 1):
            if u[i] > umax:
                umax = u[i]
        row = out[m]
        row[0] = t
        row[1] = u[N]
        row[2] = k[N]
        row[3] = min_ur
        row[4] = min_j2
        row[5] = min_j3
        row[6] = dt
        row[7] = min_u
        row[8] = min_ut
        row[9] = umax
        m += 1
        if umax >= u_stop:
            status = STATUS_USTOP
            break
        if umax >= m_level:
            status = STATUS_LEVEL
            break
        if t >= t_pause:
            status = STATUS_PAUSE
            break
    return m, t, comp, status
