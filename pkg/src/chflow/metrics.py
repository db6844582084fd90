"""Error norms on reference grids, rate fitting, invariant traces."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .grid import GridSpec
from .ode import Trajectory


@dataclass
class Interpolant:
    """Scheme-side evaluators on arbitrary points of the initial interval."""

    u: Callable[[np.ndarray], np.ndarray]
    ux: Callable[[np.ndarray], np.ndarray] | None = None
    rho: Callable[[np.ndarray], np.ndarray] | None = None


@dataclass
class ErrorReport:
    l2: float
    h1: float | None
    grid_k0: int
    shifted: bool
    rho_l2: float | None = None


def reference_grid(L: float, k0: int, shifted: bool = False):
    """Measurement grid x_i = (i [+ 1/2]) * L * 2^-k0 and its spacing."""
    m = 2 ** k0
    dx = L / m
    off = 0.5 if shifted else 0.0
    return (np.arange(m) + off) * dx, dx


def error_norms(num: Interpolant, ref: Interpolant, g: GridSpec, k0: int,
                shifted: bool = False) -> ErrorReport:
    """Riemann-sum L2/H1 errors of num against ref on the reference grid.

    The H1 value includes the L2 part; it is reported only when both sides
    provide a derivative. A density error is included when both sides
    provide rho.
    """
    x, dx = reference_grid(g.L, k0, shifted)
    du = np.asarray(num.u(x), dtype=np.float64) - np.asarray(ref.u(x), dtype=np.float64)
    l2sq = dx * np.sum(du * du)
    h1 = None
    if num.ux is not None and ref.ux is not None:
        dux = np.asarray(num.ux(x), dtype=np.float64) - np.asarray(ref.ux(x), dtype=np.float64)
        h1 = float(np.sqrt(l2sq + dx * np.sum(dux * dux)))
    rho_l2 = None
    if num.rho is not None and ref.rho is not None:
        dr = np.asarray(num.rho(x), dtype=np.float64) - np.asarray(ref.rho(x), dtype=np.float64)
        rho_l2 = float(np.sqrt(dx * np.sum(dr * dr)))
    return ErrorReport(l2=float(np.sqrt(l2sq)), h1=h1, grid_k0=k0,
                       shifted=shifted, rho_l2=rho_l2)


def fit_rate(errors, ks=None) -> float:
    """Least-squares slope of log2(error) against -k (the convergence rate)."""
    errors = np.asarray(errors, dtype=np.float64)
    if errors.size < 3:
        raise ValueError("rate fitting needs at least three refinement levels")
    if np.any(errors <= 0):
        raise ValueError("errors must be strictly positive")
    if ks is None:
        ks = np.arange(errors.size)
    ks = np.asarray(ks, dtype=np.float64)
    return float(np.polyfit(-ks, np.log2(errors), 1)[0])


def invariant_trace(traj: Trajectory, evaluators: Mapping[str, Callable]) -> dict:
    """Deviation time series I(t) - I(0) for each named invariant evaluator."""
    out = {}
    for name, ev in evaluators.items():
        vals = np.array([ev(state) for state in traj.states], dtype=np.float64)
        out[name] = vals - vals[0]
    return out
