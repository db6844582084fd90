"""Dispatch layer over the numba and numpy kernel lanes.

The active lane is picked at import time from ``CHFLOW_BACKEND`` (see
_backend) and can be switched at runtime with :func:`use` - tests exercise
both lanes through that hook.
"""

from __future__ import annotations

import numpy as np

from . import _backend
from . import _kernels_numpy

_IMPLS = {"numpy": _kernels_numpy}
_active = _backend.resolve()
if _active == "numba":
    from . import _kernels_numba

    _IMPLS["numba"] = _kernels_numba


def active() -> str:
    return _active


def use(name: str) -> str:
    """Switch the kernel lane ('numba'|'numpy'|'auto'); returns the lane now active."""
    global _active
    lane = _backend.resolve(name)
    if lane == "numba" and "numba" not in _IMPLS:
        from . import _kernels_numba

        _IMPLS["numba"] = _kernels_numba
    _active = lane
    return _active


def _impl():
    return _IMPLS[_active]


def _f64(x):
    return np.ascontiguousarray(np.asarray(x, dtype=np.float64))


def pq_periodic(ye, ue, dh, L, fast=True):
    """Interaction sums (P, Q) for the periodic peakon system."""
    ye, ue, dh = _f64(ye), _f64(ue), _f64(dh)
    if fast:
        return _impl().pq_periodic_fast(ye, ue, dh, float(L))
    return _impl().pq_periodic_naive(ye, ue, dh, float(L))


def pq_line(y, u, dh, fast=True):
    """Interaction sums (P, Q) for the real-line peakon system."""
    y, u, dh = _f64(y), _f64(u), _f64(dh)
    if fast:
        return _impl().pq_line_fast(y, u, dh)
    return _impl().pq_line_naive(y, u, dh)


def momentum_solve(diag, rhs):
    """Solve the scaled cyclic-tridiagonal momentum system (see kernel docs)."""
    return _impl().momentum_solve(_f64(diag), _f64(rhs))


def ordered_sum(x) -> float:
    """Strictly ascending-index accumulation (reproducible summation order)."""
    return float(_impl().ordered_sum(_f64(x)))
