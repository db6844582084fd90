"""Periodic grid bookkeeping and finite-difference operators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic label grid: n cells on a torus of period L."""

    n: int
    L: float
    dxi: float = field(init=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"cell count must be >= 1, got {self.n}")
        if not self.L > 0:
            raise ValueError(f"period must be positive, got {self.L}")
        object.__setattr__(self, "dxi", self.L / self.n)

    @property
    def xi(self) -> np.ndarray:
        """Label points xi_i = i*dxi, i in {0..n-1}."""
        return self.dxi * np.arange(self.n)


class GridFunction:
    """Length-n sequence with exact modular index wrap (v[i+n] == v[i])."""

    def __init__(self, values):
        self.values = np.asarray(values, dtype=np.float64)
        if self.values.ndim != 1:
            raise ValueError("grid function must be one-dimensional")

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, i):
        return self.values[np.asarray(i) % len(self)]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.values, dtype=dtype)


def _as_values(f, g: GridSpec) -> np.ndarray:
    v = np.asarray(f, dtype=np.float64)
    if v.shape != (g.n,):
        raise ValueError(f"expected length {g.n}, got shape {v.shape}")
    return v


def diff(f, mode: str, g: GridSpec) -> np.ndarray:
    """Periodic difference operator: forward D+, backward D-, or central D0."""
    v = _as_values(f, g)
    if mode == "forward":
        return (np.roll(v, -1) - v) / g.dxi
    if mode == "backward":
        return (v - np.roll(v, 1)) / g.dxi
    if mode == "central":
        return (np.roll(v, -1) - np.roll(v, 1)) / (2.0 * g.dxi)
    raise ValueError(f"unknown difference mode {mode!r}")


def inner(f, w, g: GridSpec) -> float:
    """Riemann-sum inner product dxi * sum_i f_i w_i, summed in ascending index order."""
    fv = _as_values(f, g)
    wv = _as_values(w, g)
    return g.dxi * kernels.ordered_sum(fv * wv)
