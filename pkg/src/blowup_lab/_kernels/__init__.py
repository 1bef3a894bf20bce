"""Hot inner loops of the time integrator.

Two interchangeable implementations exist: ``numba_impl`` (``@njit`` loops)
and ``numpy_impl`` (vectorised numpy). The numba path is used when numba
imports cleanly unless ``BLOWUP_LAB_DISABLE_NUMBA`` is set to a truthy value.
Both expose ``rhs``, ``monitors`` and ``advance`` with identical signatures.
"""
import os

from . import numpy_impl
from .common import (
    COLUMNS,
    DT_MIN,
    STATUS_CHUNK,
    STATUS_LEVEL,
    STATUS_NONFINITE,
    STATUS_PAUSE,
    STATUS_UNDERFLOW,
    STATUS_USTOP,
)

ENV_FLAG = "BLOWUP_LAB_DISABLE_NUMBA"


def numba_disabled() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() in ("1", "true", "yes", "on")


def _load_numba():
    try:
        from . import numba_impl
    except ImportError:
        return None
    return numba_impl


numba_impl = None if numba_disabled() else _load_numba()
impl = numba_impl if numba_impl is not None else numpy_impl
BACKEND = "numba" if impl is numba_impl else "numpy"


def get_impl(name=None):
    """Return the kernel module for ``name`` (``"numba"``/``"numpy"``) or the active one."""
    if name is None:
        return impl
    if name == "numpy":
        return numpy_impl
    if name == "numba":
        mod = numba_impl if numba_impl is not None else _load_numba()
        if mod is None:
            raise ImportError("numba backend requested but numba is not importable")
        return mod
    raise ValueError(f"unknown backend {name!r}")


__all__ = [
    "BACKEND",
    "COLUMNS",
    "DT_MIN",
    "ENV_FLAG",
    "STATUS_CHUNK",
    "STATUS_LEVEL",
    "STATUS_NONFINITE",
    "STATUS_PAUSE",
    "STATUS_UNDERFLOW",
    "STATUS_USTOP",
    "get_impl",
    "impl",
    "numba_disabled",
]
