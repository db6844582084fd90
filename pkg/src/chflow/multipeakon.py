"""Conservative multipeakon scheme, periodic and real-line versions.

State arrays are 0-based over the n peaks. Periodic states carry the
boundary-peakon convention implicitly: the pair arrays are built on the
ghost-extended sequence (y[n-1]-L, y[0], ..., y[n-1]), so pair j in
{0..n-1} spans [y_{j-1}, y_j] in code indices with pair 0 wrapping around.
The evolved cumulative energies H store the energy from the boundary
peakon up to each peak (H_0 = 0 is implicit); the interaction sums take
their half-interval energies from differences of H, never from the
tanh/coth identity, which keeps the right-hand side finite between and at
characteristic collisions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .grid import GridSpec

# states are rejected as grossly non-monotone below this (relative to L):
# a macroscopic ordering breakdown, not the tiny negative gaps that explicit
# stepper stages produce while grazing a collision (the interaction sums are
# analytic there and the conservative dynamics re-separate the peaks)
MONOTONE_TOL = 1e-3
# a vanishing gap with a velocity jump has no finite energy density
SINGULAR_GAP_TOL = 1e-14


class ConfigurationError(ValueError):
    pass


class SingularConfigurationError(ValueError):
    pass


class InternalConsistencyError(RuntimeError):
    pass


@dataclass
class PeakonState:
    y: np.ndarray
    u: np.ndarray
    H: np.ndarray
    L: float | None = None  # None: real-line state

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=np.float64)
        self.u = np.asarray(self.u, dtype=np.float64)
        self.H = np.asarray(self.H, dtype=np.float64)
        n = self.y.shape[0]
        if self.u.shape != (n,) or self.H.shape != (n,):
            raise ConfigurationError("y, u, H must have equal lengths")

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def total_energy(self) -> float:
        return float(self.H[-1])

    def pack(self) -> np.ndarray:
        return np.concatenate([self.y, self.u, self.H])

    @classmethod
    def unpack(cls, vec: np.ndarray, L: float | None) -> "PeakonState":
        n = vec.shape[0] // 3
        return cls(vec[:n], vec[n:2 * n], vec[2 * n:], L)


@dataclass
class PairStats:
    ybar: np.ndarray
    dy: np.ndarray
    ubar: np.ndarray
    du: np.ndarray
    dH: np.ndarray


def _extended(s: PeakonState):
    """Ghost-extended (length n+1) position and height arrays."""
    if s.L is None:
        raise ConfigurationError("periodic operation on a real-line state")
    ye = np.concatenate([[s.y[-1] - s.L], s.y])
    ue = np.concatenate([[s.u[-1]], s.u])
    return ye, ue


def _scale(s: PeakonState) -> float:
    return s.L if s.L is not None else max(float(s.y[-1] - s.y[0]), 1.0)


def pair_stats(s: PeakonState) -> PairStats:
    """Midpoint/half-difference sequences; dH from the evolved energies."""
    if s.L is not None:
        ye, ue = _extended(s)
        He = np.concatenate([[0.0], s.H])
    else:
        ye, ue, He = s.y, s.u, s.H
    return PairStats(
        ybar=0.5 * (ye[:-1] + ye[1:]),
        dy=0.5 * (ye[1:] - ye[:-1]),
        ubar=0.5 * (ue[:-1] + ue[1:]),
        du=0.5 * (ue[1:] - ue[:-1]),
        dH=0.5 * (He[1:] - He[:-1]),
    )


def delta_H(s: PeakonState) -> np.ndarray:
    """Half-interval energies from the closed-form identity on (y, u).

    Valid for states with positive gaps; a collapsed gap contributes its
    limit value 0 when the heights match and is singular otherwise.
    """
    if s.L is not None:
        ye, ue = _extended(s)
    else:
        ye, ue = s.y, s.u
    dy = 0.5 * (ye[1:] - ye[:-1])
    ub = 0.5 * (ue[:-1] + ue[1:])
    du = 0.5 * (ue[1:] - ue[:-1])
    if np.any(dy < 0):
        raise ConfigurationError("peak positions must be nondecreasing")
    scale = _scale(s)
    tiny = dy < SINGULAR_GAP_TOL * scale
    uscale = max(float(np.max(np.abs(ue))), 1.0)
    if np.any(tiny & (np.abs(du) > 1e-13 * uscale)):
        raise SingularConfigurationError(
            "vanishing gap with a velocity jump: energy density is singular")
    th = np.tanh(dy)
    out = ub * ub * th
    ok = ~tiny
    out[ok] += du[ok] ** 2 / th[ok]
    return out


def _validated_pairs(s: PeakonState):
    ye, ue = _extended(s)
    gaps = ye[1:] - ye[:-1]
    if np.min(gaps) < -MONOTONE_TOL * s.L:
        raise ConfigurationError(
            f"non-monotone peak configuration (min gap {np.min(gaps):.3e})")
    He = np.concatenate([[0.0], s.H])
    dH = 0.5 * (He[1:] - He[:-1])
    return ye, ue, dH


def interaction_sums(s: PeakonState, fast: bool = True):
    """The periodic interaction sums (P, Q)."""
    ye, ue, dH = _validated_pairs(s)
    return kernels.pq_periodic(ye, ue, dH, s.L, fast=fast)


def rhs_periodic(s: PeakonState, fast: bool = True, debug: bool = False):
    """Time derivatives (ydot, udot, Hdot) of the periodic system."""
    ye, ue, dH = _validated_pairs(s)
    P, Q = kernels.pq_periodic(ye, ue, dH, s.L, fast=fast)
    if debug and fast:
        Pn, Qn = kernels.pq_periodic(ye, ue, dH, s.L, fast=False)
        ref = max(np.max(np.abs(Pn)), np.max(np.abs(Qn)), 1e-300)
        mism = max(np.max(np.abs(P - Pn)), np.max(np.abs(Q - Qn))) / ref
        if mism > 1e-10:
            raise InternalConsistencyError(
                f"fast/naive interaction sums disagree (rel {mism:.3e})")
    u = s.u
    flux = u * (u * u - 2.0 * P)
    return u.copy(), -Q, flux - flux[-1]


def rhs_line(s: PeakonState, fast: bool = True):
    """Time derivatives of the real-line system (peakons at infinity conventions)."""
    y, u = s.y, s.u
    gaps = np.diff(y)
    if gaps.size and np.min(gaps) < -MONOTONE_TOL * _scale(s):
        raise ConfigurationError("non-monotone peak configuration")
    dH = 0.5 * np.diff(s.H)
    P, Q = kernels.pq_line(y, u, dH, fast=fast)
    return u.copy(), -Q, u ** 3 - 2.0 * P * u


def eval_peakon_interpolant(s: PeakonState, x) -> tuple[np.ndarray, np.ndarray]:
    """Piecewise-exponential interpolant (u, u_x) at query points.

    Queries are wrapped mod L into the current boundary-peakon interval; at
    a peak the derivative is the right limit.
    """
    ye, ue = _extended(s)
    st = pair_stats(s)
    x = np.asarray(x, dtype=np.float64)
    z = ye[0] + np.mod(x - ye[0], s.L)
    idx = np.searchsorted(ye, z, side="right") - 1
    idx = np.clip(idx, 0, s.n - 1)
    dy = st.dy[idx]
    if np.any(dy <= 0):
        raise ConfigurationError("query landed in an empty interval")
    sl = z - st.ybar[idx]
    ch, sh = np.cosh(sl), np.sinh(sl)
    cdy, sdy = np.cosh(dy), np.sinh(dy)
    u = st.ubar[idx] * ch / cdy + st.du[idx] * sh / sdy
    ux = st.ubar[idx] * sh / cdy + st.du[idx] * ch / sdy
    return u, ux


def _sample(f, x: np.ndarray) -> np.ndarray:
    v = np.asarray(f(x), dtype=np.float64)
    if v.shape != x.shape:
        v = np.asarray([f(xi) for xi in x], dtype=np.float64)
    return v


def init_peakons(u0, g: GridSpec) -> PeakonState:
    """Peaks at the grid labels, heights sampled from u0, energies cumulative."""
    y = g.xi.copy()
    u = _sample(u0, y)
    state = PeakonState(y, u, np.zeros(g.n), g.L)
    dH = delta_H(state)
    state.H = 2.0 * np.cumsum(dH)
    return state
