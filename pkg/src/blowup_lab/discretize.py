"""Uniform radial grid, radial Laplacian and the nonlinear-flux ghost closure."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidSpec, NonFiniteInput, Overflow

MIN_RESOLUTION = 16


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Nodes ``r_i = i h`` for ``i = 0..N`` on ``[0, R]``."""

    N: int
    R: float = 1.0

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < MIN_RESOLUTION:
            raise InvalidSpec(f"grid resolution N must be an integer >= {MIN_RESOLUTION}")
        if not (self.R > 0 and math.isfinite(self.R)):
            raise InvalidSpec("grid radius must be positive and finite")
        r = np.arange(self.N + 1, dtype=float) * (self.R / self.N)
        r[-1] = self.R
        r.flags.writeable = False
        object.__setattr__(self, "r", r)

    @property
    def h(self) -> float:
        return self.R / self.N

    def __eq__(self, other):
        return isinstance(other, RadialGrid) and (self.N, self.R) == (other.N, other.R)

    def __hash__(self):
        return hash((self.N, self.R))


class RadialField:
    """Finite values of a radial function on a :class:`RadialGrid`."""

    __slots__ = ("values", "grid")

    def __init__(self, values, grid: RadialGrid):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.N + 1,):
            raise InvalidSpec(f"field needs {grid.N + 1} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise NonFiniteInput("radial field contains NaN or infinite values")
        self.values = values
        self.grid = grid

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, idx):
        return self.values[idx]

    def __repr__(self):
        return f"RadialField(N={self.grid.N}, min={self.values.min():.6g}, max={self.values.max():.6g})"


def _check(u: RadialField) -> np.ndarray:
    v = u.values
    if not np.all(np.isfinite(v)):
        raise NonFiniteInput("radial field contains NaN or infinite values")
    return v


def boundary_flux(u_boundary: float, q: float) -> float:
    """``e^{q u}`` with overflow reported as :class:`Overflow`."""
    try:
        f = math.exp(q * u_boundary)
    except OverflowError:
        f = math.inf
    if not math.isfinite(f):
        raise Overflow(f"exp({q} * {u_boundary}) is not representable; lower u_stop")
    return f


def ghost_value(u: RadialField, q: float) -> float:
    """Value at the fictitious node ``r = R + h`` that imposes ``u_r(R) = e^{q u_N}``."""
    v = _check(u)
    return float(v[-2] + 2.0 * u.grid.h * boundary_flux(float(v[-1]), q))


def apply_flux_closure(u: RadialField, q: float, n: int) -> float:
    """Radial Laplacian at ``r = R`` with the ghost node substituted."""
    v = _check(u)
    h, R = u.grid.h, u.grid.R
    g = ghost_value(u, q)
    second = (g - 2.0 * v[-1] + v[-2]) / (h * h)
    first = (g - v[-2]) / (2.0 * h)
    return float(second + (n - 1) / R * first)


def radial_laplacian(u: RadialField, n: int, q: Optional[float] = None) -> RadialField:
    """Second-order radial Laplacian ``u_rr + (n-1)/r u_r``.

    The centre node uses the symmetry limit ``n u_rr(0)``. The boundary node
    uses the nonlinear flux ghost closure when ``q`` is given and a
    zero-flux mirror otherwise.
    """
    if n < 1:
        raise InvalidSpec("dimension must be >= 1")
    v = _check(u)
    grid = u.grid
    h = grid.h
    r = grid.r
    out = np.empty_like(v)
    out[0] = 2.0 * n * (v[1] - v[0]) / (h * h)
    out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (h * h) + (n - 1) / r[1:-1] * (
        v[2:] - v[:-2]
    ) / (2.0 * h)
    if q is None:
        out[-1] = 2.0 * (v[-2] - v[-1]) / (h * h)
    else:
        out[-1] = apply_flux_closure(u, q, n)
    return RadialField(out, grid)


def derivative_field(u: RadialField, q: Optional[float] = None) -> RadialField:
    """Discrete ``u_r``: centred inside, one-sided second order at the ends.

    With ``q`` the boundary value is the imposed flux ``e^{q u_N}``.
    """
    v = _check(u)
    h = u.grid.h
    out = np.empty_like(v)
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    if q is None:
        out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    else:
        out[-1] = boundary_flux(float(v[-1]), q)
    return RadialField(out, u.grid)
