"""Eulerian comparison schemes: finite differences and pseudospectral.

Grid values live at x_j = j*dx (CKR velocities at the half nodes). The
momentum-based schemes recover u from m by FFT inversion of the circulant
discrete Helmholtz operator; 'compact' is Id - D-D+, 'noncompact' is
Id - D0D0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridSpec


@dataclass
class EulerianState:
    scheme: str                  # 'hr' | 'lp' | 'lp2ch'
    m: np.ndarray
    rho: np.ndarray | None = None

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=np.float64)
        if self.rho is not None:
            self.rho = np.asarray(self.rho, dtype=np.float64)


@dataclass
class SpectralState:
    V: np.ndarray                # complex coefficients, numpy fft layout
    a: float                     # period scale L / (2 pi)

    def __post_init__(self):
        self.V = np.asarray(self.V, dtype=np.complex128)
        if self.V.shape[0] % 2 != 0:
            raise ValueError("spectral state needs an even mode count")


def _d_eigenvalues(n: int, dx: float, stencil: str) -> np.ndarray:
    j = np.arange(n // 2 + 1)
    if stencil == "compact":
        return 1.0 + (2.0 / dx * np.sin(np.pi * j / n)) ** 2
    if stencil == "noncompact":
        return 1.0 + (np.sin(2.0 * np.pi * j / n) / dx) ** 2
    raise ValueError(f"unknown stencil {stencil!r}")


def helmholtz_invert(m, stencil: str, g: GridSpec) -> np.ndarray:
    """u with (Id - D-D+)u = m (compact) or (Id - D0D0)u = m (noncompact)."""
    m = np.asarray(m, dtype=np.float64)
    d = _d_eigenvalues(g.n, g.dxi, stencil)
    return np.fft.irfft(np.fft.rfft(m) / d, n=g.n)


def helmholtz_apply(u, stencil: str, g: GridSpec) -> np.ndarray:
    """The forward operator; used to build m from sampled initial data."""
    u = np.asarray(u, dtype=np.float64)
    dx = g.dxi
    if stencil == "compact":
        return u - (np.roll(u, -1) - 2.0 * u + np.roll(u, 1)) / dx ** 2
    if stencil == "noncompact":
        return u - (np.roll(u, -2) - 2.0 * u + np.roll(u, 2)) / (2.0 * dx) ** 2
    raise ValueError(f"unknown stencil {stencil!r}")


def greens_function(stencil_n: int, dx: float) -> np.ndarray:
    """Closed-form periodic Green's function of the compact operator."""
    kappa = np.arccosh(1.0 + 0.5 * dx * dx)
    j = np.arange(stencil_n)
    return (np.cosh(kappa * (j - stencil_n / 2.0))
            / (np.sqrt(4.0 + dx * dx) * np.sinh(kappa * stencil_n / 2.0)))


def _d0(v, dx):
    return (np.roll(v, -1) - np.roll(v, 1)) / (2.0 * dx)


def _dm(v, dx):
    return (v - np.roll(v, 1)) / dx


def _dp(v, dx):
    return (np.roll(v, -1) - v) / dx


def rhs_fd(state: EulerianState, scheme: str, g: GridSpec):
    """Momentum-form finite-difference right-hand sides.

    Returns (mdot, rhodot); rhodot is None except for the two-component
    scheme. The two-component density force is the conservative form
    -1/2 D0(rho^2), which keeps mass, energy, and density mass invariant.
    """
    dx = g.dxi
    m = state.m
    if scheme == "hr":
        u = helmholtz_invert(m, "compact", g)
        return -_dm(m * u, dx) - m * _d0(u, dx), None
    if scheme == "lp":
        u = helmholtz_invert(m, "noncompact", g)
        return -_d0(m * u, dx) - m * _d0(u, dx), None
    if scheme == "lp2ch":
        rho = state.rho
        u = helmholtz_invert(m, "noncompact", g)
        mdot = -_d0(m * u, dx) - m * _d0(u, dx) - 0.5 * _d0(rho * rho, dx)
        rho_bar = 0.5 * (np.roll(rho, -1) + rho)   # flux values at j+1/2
        u_bar = 0.5 * (np.roll(u, -1) + u)
        rhodot = -_dm(rho_bar * u_bar, dx)
        return mdot, rhodot
    raise ValueError(f"unknown finite-difference scheme {scheme!r}")


def rhs_ckr(u, g: GridSpec) -> np.ndarray:
    """Upwinded dissipative scheme on the staggered grid (u at half nodes)."""
    dx = g.dxi
    u = np.asarray(u, dtype=np.float64)
    up = np.maximum(u, 0.0)
    um = np.minimum(u, 0.0)
    dmu = _dm(u, dx)
    prhs = up * up + um * um + 0.5 * dmu * dmu
    P = helmholtz_invert(prhs, "compact", g)
    return -(up * dmu + um * _dp(u, dx) + _dp(P, dx))


def fft_freqs(n: int) -> np.ndarray:
    """Signed integer frequencies in numpy fft layout."""
    return np.fft.fftfreq(n, d=1.0 / n)


def dealias_mask(n: int) -> np.ndarray:
    """Keep |k| <= floor(n/3), zero the top third of the spectrum."""
    return (np.abs(fft_freqs(n)) <= n // 3).astype(np.float64)


def rhs_ps(state: SpectralState, dealias: bool = False) -> np.ndarray:
    """Fourier collocation right-hand side in the frequency domain."""
    V = state.V
    n = V.shape[0]
    k = fft_freqs(n)
    a = state.a
    Vd = V * dealias_mask(n) if dealias else V
    u = np.fft.ifft(Vd).real
    w = np.fft.ifft(1j * k * Vd).real   # scaled-variable derivative a*u_x
    T1 = np.fft.fft(u * u)
    T2 = np.fft.fft(w * w)
    return -(1j * k / (2.0 * a * (a * a + k * k))) * ((3.0 * a * a + k * k) * T1 + T2)


def spectral_init(u0_samples, L: float) -> SpectralState:
    u0_samples = np.asarray(u0_samples, dtype=np.float64)
    return SpectralState(np.fft.fft(u0_samples), L / (2.0 * np.pi))


def ps_eval(state: SpectralState, L: float, x, deriv: bool = False) -> np.ndarray:
    """Evaluate the trigonometric interpolant (or its derivative) anywhere."""
    V = state.V
    n = V.shape[0]
    k = fft_freqs(n)
    coeff = V.copy()
    if deriv:
        coeff = coeff * (1j * k) / state.a
        # split the Nyquist mode symmetrically so the derivative stays real
        coeff[n // 2] = 0.0
    x = np.asarray(x, dtype=np.float64)
    phase = np.exp(2j * np.pi * np.outer(x, k) / L)
    vals = (phase @ coeff) / n
    return vals.real


def fourier_interpolate(u, target_count: int) -> np.ndarray:
    """Trigonometric interpolation onto a denser uniform grid (zero padding)."""
    u = np.asarray(u, dtype=np.float64)
    n = u.shape[0]
    m = int(target_count)
    if m < n:
        raise ValueError("target grid must be at least as fine as the source")
    if m == n:
        return u.copy()
    F = np.fft.fft(u)
    G = np.zeros(m, dtype=np.complex128)
    half = n // 2
    G[:half] = F[:half]
    G[m - half:] = F[half:]
    if n % 2 == 0:
        # split the Nyquist coefficient between +half and -half
        G[half] = 0.5 * F[half]
        G[m - half] = 0.5 * F[half]
    return np.fft.ifft(G).real * (m / n)


def eval_grid_interpolant(values, g: GridSpec, x, offset: float = 0.0):
    """Piecewise linear (u, u_x) through ((j + offset)*dx, values_j), periodic."""
    v = np.asarray(values, dtype=np.float64)
    dx = g.dxi
    x = np.asarray(x, dtype=np.float64)
    t = (x - offset * dx) / dx
    j = np.floor(t).astype(np.int64)
    frac = t - j
    j = np.mod(j, g.n)
    vr = np.roll(v, -1)
    slope = (vr[j] - v[j]) / dx
    return v[j] + frac * dx * slope, slope
