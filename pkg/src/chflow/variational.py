"""Variational finite-difference Lagrangian scheme for CH and 2CH.

The prognostic variables are characteristics y, velocities U, and an
energy variable: either the cumulative H (formulation 'H', H_0 = 0
implicit, stored entries are H_1..H_n) or the cell density h (formulation
'h'). Velocities are updated through (Q, R) obtained from the cyclic
banded momentum system; the 2n x 2n first-order form keeps the solve
well-posed through cell collapse (D+y = 0), which is what lets the scheme
run across wave breaking.

The density enters only through the constant Lagrangian density
r_i = rho_i(0) * D+y_i(0); the Eulerian density is reconstructed as
rho_i(t) = r_i / D+y_i(t) on nonempty cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .grid import GridSpec

# gaps y_{i+1}-y_i below -GAP_CLAMP_TOL*L are a contract violation; less
# negative ones are zeroed before assembly (explicit steppers overshoot
# slightly at breaking)
GAP_CLAMP_TOL = 1e-13


class DegenerateCellError(ValueError):
    pass


class SolveError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass
class LagrangianState:
    grid: GridSpec
    y: np.ndarray
    U: np.ndarray
    energy: np.ndarray          # H (cumulative) or h (density), per formulation
    formulation: str = "H"
    r: np.ndarray | None = None  # Lagrangian density rho(0)*D+y(0), constant in time
    y0: np.ndarray | None = None     # frozen initial characteristics
    rho0: np.ndarray | None = None   # frozen initial density samples

    def __post_init__(self):
        n = self.grid.n
        self.y = np.asarray(self.y, dtype=np.float64)
        self.U = np.asarray(self.U, dtype=np.float64)
        self.energy = np.asarray(self.energy, dtype=np.float64)
        if self.formulation not in ("H", "h"):
            raise ValueError(f"formulation must be 'H' or 'h', got {self.formulation!r}")
        for name in ("y", "U", "energy"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} must have length {n}")
        if self.r is None:
            self.r = np.zeros(n)
        else:
            self.r = np.asarray(self.r, dtype=np.float64)
        if self.y0 is None:
            self.y0 = self.y.copy()
        if self.rho0 is None:
            self.rho0 = np.zeros(n)

    @property
    def n(self) -> int:
        return self.grid.n

    def gaps(self) -> np.ndarray:
        """Cell widths y_{i+1} - y_i with periodic wrap y_n = y_0 + L."""
        g = np.empty(self.n)
        g[:-1] = self.y[1:] - self.y[:-1]
        g[-1] = self.y[0] + self.grid.L - self.y[-1]
        return g

    def dy(self, clamp: bool = True) -> np.ndarray:
        """Forward divided differences D+y, optionally clamped at zero."""
        gaps = self.gaps()
        if clamp:
            lo = float(np.min(gaps))
            if lo < -GAP_CLAMP_TOL * self.grid.L:
                raise DegenerateCellError(
                    f"characteristics crossed (min gap {lo:.3e})")
            gaps = np.maximum(gaps, 0.0)
        return gaps / self.grid.dxi

    def dU(self) -> np.ndarray:
        return (np.roll(self.U, -1) - self.U) / self.grid.dxi

    def h_values(self) -> np.ndarray:
        """Energy cell densities, whichever formulation is stored."""
        if self.formulation == "h":
            return self.energy
        He = np.concatenate([[0.0], self.energy])
        return (He[1:] - He[:-1]) / self.grid.dxi

    def H_values(self) -> np.ndarray:
        """Cumulative energies H_1..H_n."""
        if self.formulation == "H":
            return self.energy
        return self.grid.dxi * np.cumsum(self.energy)

    def pack(self) -> np.ndarray:
        return np.concatenate([self.y, self.U, self.energy])

    def with_vector(self, vec: np.ndarray) -> "LagrangianState":
        n = self.n
        return replace(self, y=vec[:n].copy(), U=vec[n:2 * n].copy(),
                       energy=vec[2 * n:].copy())


@dataclass
class KernelSet:
    G: np.ndarray
    Gamma: np.ndarray
    K: np.ndarray
    Kcal: np.ndarray


@dataclass
class MomentumMatrix:
    """The 2n x 2n cyclic banded discrete momentum operator A[D+y]."""

    g: GridSpec
    dy: np.ndarray
    scaled_diag: np.ndarray = field(init=False)

    def __post_init__(self):
        self.dy = np.asarray(self.dy, dtype=np.float64)
        if self.dy.shape != (self.g.n,):
            raise ValueError(f"dy must have length {self.g.n}")
        if np.any(self.dy < 0):
            raise ValueError("D+y must be nonnegative")
        self.scaled_diag = np.repeat(self.g.dxi * self.dy, 2)

    def to_dense(self, scaled: bool = True) -> np.ndarray:
        m = 2 * self.g.n
        M = np.zeros((m, m))
        M[np.arange(m), np.arange(m)] = self.scaled_diag
        M[np.arange(1, m), np.arange(m - 1)] += 1.0
        M[np.arange(m - 1), np.arange(1, m)] += -1.0
        M[0, m - 1] += 1.0
        M[m - 1, 0] += -1.0
        return M if scaled else M / self.g.dxi

    def det_scaled(self) -> float:
        """det(dxi*A); bounded below by L^2 for admissible dy."""
        return float(np.linalg.det(self.to_dense(scaled=True)))

    def solve(self, b: np.ndarray, method: str = "auto") -> np.ndarray:
        """Solve A x = b (unscaled right-hand side)."""
        b = np.asarray(b, dtype=np.float64)
        c = self.g.dxi * b
        if method == "auto":
            method = "dense" if self.g.n <= 16 else "smw"
        if method == "dense":
            x = np.linalg.solve(self.to_dense(scaled=True), c)
        elif method == "smw":
            x = kernels.momentum_solve(self.scaled_diag, c)
        else:
            raise ValueError(f"unknown solve method {method!r}")
        if not np.all(np.isfinite(x)):
            raise SolveError("momentum solve produced non-finite values")
        return x


def assemble_momentum_matrix(dy, g: GridSpec) -> MomentumMatrix:
    return MomentumMatrix(g, dy)


def solve_QR(state: LagrangianState, method: str = "auto"):
    """(Q, R) from the interleaved momentum system for the current state."""
    dy = state.dy()
    h = state.h_values()
    b = np.empty(2 * state.n)
    b[0::2] = state.U * state.dU()
    b[1::2] = h
    x = MomentumMatrix(state.grid, dy).solve(b, method=method)
    return x[0::2], x[1::2]


def rhs_vd(state: LagrangianState, system: str = "CH", formulation: str | None = None):
    """Time derivatives (ydot, Udot, energydot) of the Lagrangian scheme.

    The CH and 2CH dynamics share the same form; the density acts through
    the r^2 contribution already folded into the energy variable.
    """
    if system not in ("CH", "2CH"):
        raise ValueError(f"system must be 'CH' or '2CH', got {system!r}")
    if system == "CH" and np.any(state.r != 0.0):
        raise ValueError("CH dynamics requested on a state with nonzero density")
    if formulation is not None and formulation != state.formulation:
        raise ValueError("formulation tag does not match the state")
    Q, R = solve_QR(state)
    U = state.U
    if state.formulation == "H":
        edot = U[0] * R[-1] - np.roll(U, -1) * R
    else:
        edot = -(np.roll(U, -1) * R - U * np.roll(R, 1)) / state.grid.dxi
    return U.copy(), -Q, edot


def compute_h(U, dy, r, g: GridSpec) -> np.ndarray:
    """Cell energy densities from the pointwise identity (initialization-time)."""
    U = np.asarray(U, dtype=np.float64)
    dy = np.asarray(dy, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    if np.any(dy <= 0):
        raise DegenerateCellError(
            "collapsed cell at initialization; use the measure-valued path")
    dU = (np.roll(U, -1) - U) / g.dxi
    return (U * U * dy * dy + dU * dU + r * r) / (2.0 * dy)


def compute_kernels(dy, g: GridSpec) -> KernelSet:
    """Periodized summation kernels, read off from the inverse of dxi*A."""
    A = MomentumMatrix(g, dy)
    Ainv = np.linalg.inv(A.to_dense(scaled=True))
    n = g.n
    even = 2 * np.arange(n)
    G = Ainv[np.ix_(even, even)].T
    Gamma = Ainv[np.ix_(even + 1, even)].T
    Kcal = Ainv[np.ix_(even, even + 1)].T
    K = Ainv[np.ix_(even + 1, even + 1)].T
    return KernelSet(G=G, Gamma=Gamma, K=K, Kcal=Kcal)


def kernel_sums_QR(ks: KernelSet, state: LagrangianState):
    """(Q, R) through the kernel quadratures; the slow path used as an oracle."""
    dxi = state.grid.dxi
    f = state.U * state.dU()
    h = state.h_values()
    Q = dxi * (ks.G.T @ f + ks.Kcal.T @ h)
    R = dxi * (ks.Gamma.T @ f + ks.K.T @ h)
    return Q, R


def lagrangian_invariants(state: LagrangianState):
    """(total energy, total momentum)."""
    E = float(state.grid.dxi * np.sum(state.h_values()))
    I = float(state.grid.dxi * np.sum(state.U * state.dy()))
    return E, I


def _sample(f, x: np.ndarray) -> np.ndarray:
    v = np.asarray(f(x), dtype=np.float64)
    if v.shape != x.shape:
        v = np.asarray([f(xi) for xi in x], dtype=np.float64)
    return v


def init_lagrangian(u0, rho0, g: GridSpec, formulation: str = "H") -> LagrangianState:
    """Characteristics on the labels, velocities/density sampled from data."""
    y = g.xi.copy()
    U = _sample(u0, y)
    rho = np.zeros(g.n) if rho0 is None else _sample(rho0, y)
    dy = np.ones(g.n)
    r = rho * dy
    h = compute_h(U, dy, r, g)
    energy = h if formulation == "h" else g.dxi * np.cumsum(h)
    return LagrangianState(g, y, U, energy, formulation, r=r, y0=y.copy(), rho0=rho)


def init_from_measure(u0, F, E_total: float, g: GridSpec,
                      formulation: str = "H") -> LagrangianState:
    """Initial data from (u0, mu): equalizes y + cumulative energy across labels.

    F(x) = mu([0, x)) must be nondecreasing with F -> E_total at the period;
    characteristics cluster (zero-width cells) inside atoms of mu.
    """
    L = g.L
    c = 1.0 + E_total / L
    xi = g.xi
    y = np.empty(g.n)
    for i, x in enumerate(xi):
        target = c * x
        if target <= 0.0:
            y[i] = 0.0
            continue
        lo, hi = 0.0, L
        flo = lo + float(F(lo))
        fhi = hi + float(F(hi))
        if flo > fhi + 1e-12 * max(1.0, abs(fhi)):
            raise ValueError("cumulative measure must be nondecreasing")
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if mid + float(F(mid)) < target:
                lo = mid
            else:
                hi = mid
        y[i] = 0.5 * (lo + hi)
    H_param = c * xi - y          # cumulative energy at labels xi_0..xi_{n-1}
    # stored slots are H_1..H_n with H(xi_n) = E_total
    H = np.concatenate([H_param[1:], [E_total]])
    U = _sample(u0, y)
    state = LagrangianState(g, y, U, H, "H", r=np.zeros(g.n), y0=y.copy(),
                            rho0=np.zeros(g.n))
    if formulation == "h":
        state = replace(state, energy=state.h_values(), formulation="h")
    return state


def eval_lagrangian_interpolant(state: LagrangianState, x):
    """(u, u_x, rho) of the piecewise linear/constant reconstruction.

    Queries are identified mod L with the current characteristic interval;
    empty cells contribute nothing, so values at a cluster are the right
    limit.
    """
    y = state.y
    L = state.grid.L
    yext = np.concatenate([y, [y[0] + L]])
    x = np.asarray(x, dtype=np.float64)
    z = y[0] + np.mod(x - y[0], L)
    idx = np.searchsorted(yext, z, side="right") - 1
    idx = np.clip(idx, 0, state.n - 1)
    gap = yext[idx + 1] - y[idx]
    if np.any(gap <= 0):
        raise DegenerateCellError("query landed in an empty cell")
    Ue = np.concatenate([state.U, [state.U[0]]])
    slope = (Ue[idx + 1] - state.U[idx]) / gap
    u = state.U[idx] + (z - y[idx]) * slope
    rho = state.r[idx] * state.grid.dxi / gap
    return u, slope, rho


# -- Floquet / monodromy verification path (small n oracle) ------------------

def cell_transfer_matrices(dy, g: GridSpec) -> np.ndarray:
    """Per-cell transfer matrices of the homogeneous second-order recurrence."""
    t = g.dxi * np.asarray(dy, dtype=np.float64)
    A = np.empty((t.size, 2, 2))
    A[:, 0, 0] = 1.0 + t * t
    A[:, 0, 1] = t
    A[:, 1, 0] = t
    A[:, 1, 1] = 1.0
    return A


def monodromy(dy, g: GridSpec) -> np.ndarray:
    """Product of the cell matrices over one period (last cell leftmost)."""
    A = cell_transfer_matrices(dy, g)
    M = np.eye(2)
    for j in range(A.shape[0]):
        M = A[j] @ M
    return M


def cell_multipliers(dy, g: GridSpec):
    """Per-cell eigenvalue pairs (lambda+, lambda-) with lambda+ lambda- = 1."""
    t = g.dxi * np.asarray(dy, dtype=np.float64)
    root = 0.5 * t * np.sqrt(4.0 + t * t)
    lam_plus = 1.0 + 0.5 * t * t + root
    return lam_plus, 1.0 / lam_plus
