import numpy as np

from .common import (
    DT_MIN,
    STATUS_CHUNK,
    STATUS_LEVEL,
    STATUS_NONFINITE,
    STATUS_PAUSE,
    STATUS_UNDERFLOW,
    STATUS_USTOP,
)


def rhs(u, out, coef, n, h, p, q, lam):
    inv_h2 = 1.0 / (h * h)
    out[0] = 2.0 * n * (u[1] - u[0]) * inv_h2
    out[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) * inv_h2 + coef[1:-1] * (u[2:] - u[:-2])
    with np.errstate(over="ignore", invalid="ignore"):
        f = np.exp(q * u[-1])
        g = u[-2] + 2.0 * h * f
        out[-1] = (g - 2.0 * u[-1] + u[-2]) * inv_h2 + coef[-1] * (g - u[-2])
        if lam != 0.0:
            out += lam * np.exp(p * u)


def step_size(umax, n, h, p, q, lam, cfl, dmax):
    dt_par = cfl * h * h / (2.0 * n)
    with np.errstate(over="ignore"):
        denom = 2.0 / h * q * np.exp(q * umax)
        if lam != 0.0:
            denom = lam * p * np.exp(p * umax) + denom
        dt_nl = dmax / denom
    return float(dt_par if dt_par < dt_nl else dt_nl)


def monitors(u, k, r, h, q, eps):
    ur = np.empty_like(u)
    inv_2h = 1.0 / (2.0 * h)
    ur[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv_2h
    ur[1:-1] = (u[2:] - u[:-2]) * inv_2h
    with np.errstate(over="ignore"):
        ur[-1] = np.exp(q * u[-1])
        j2 = ur - (r / r[-1]) * np.exp(u)
    j3 = k - eps * ur
    return (float(u.min()), float(ur.min()), float(k.min()), float(j2.min()), float(j3.min()))


def advance(u, k, t, comp, coef, r, n, h, p, q, lam, eps, cfl, dmax,
            u_stop, t_pause, m_level, max_steps, out, work):
    k2, k3, k4, tmp = work[0], work[1], work[2], work[3]
    m = 0
    status = STATUS_CHUNK
    while m < max_steps:
        dt = step_size(float(u.max()), n, h, p, q, lam, cfl, dmax)
        if not dt >= DT_MIN:
            status = STATUS_UNDERFLOW
            break
        half = 0.5 * dt
        np.multiply(k, half, out=tmp)
        tmp += u
        rhs(tmp, k2, coef, n, h, p, q, lam)
        np.multiply(k2, half, out=tmp)
        tmp += u
        rhs(tmp, k3, coef, n, h, p, q, lam)
        np.multiply(k3, dt, out=tmp)
        tmp += u
        rhs(tmp, k4, coef, n, h, p, q, lam)
        u += (dt / 6.0) * (k + 2.0 * k2 + 2.0 * k3 + k4)
        y = dt - comp
        tt = t + y
        comp = (tt - t) - y
        t = tt
        if not np.all(np.isfinite(u)):
            status = STATUS_NONFINITE
            break
        rhs(u, k, coef, n, h, p, q, lam)
        if not np.all(np.isfinite(k)):
            status = STATUS_NONFINITE
            break
        min_u, min_ur, min_ut, min_j2, min_j3 = monitors(u, k, r, h, q, eps)
        umax = float(u.max())
        out[m] = (t, u[-1], k[-1], min_ur, min_j2, min_j3, dt, min_u, min_ut, umax)
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
