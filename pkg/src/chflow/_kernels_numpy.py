"""Pure numpy/scipy implementations of the hot kernels.

Same contracts and index conventions as _kernels_numba. The O(n) peakon
recursions are realized with cumulative sums of exponentially rescaled
terms: every exponent is taken relative to the boundary peakon, so all
arguments stay within [-L, L].
"""

import numpy as np
import scipy.linalg


def pair_coeffs(ye, ue, dh):
    dy = 0.5 * (ye[1:] - ye[:-1])
    ub = 0.5 * (ue[1:] + ue[:-1])
    du = 0.5 * (ue[1:] - ue[:-1])
    ch = np.cosh(dy)
    sh = np.sinh(dy)
    a = (dh * ch * ch + ub * ub * sh / ch) / (2.0 * ch)
    b = ub * du * sh * sh / ch
    return a, b


def pq_periodic_naive(ye, ue, dh, L, block=256):
    n = ye.shape[0] - 1
    a, b = pair_coeffs(ye, ue, dh)
    shalf = np.sinh(0.5 * L)
    ybar = 0.5 * (ye[:-1] + ye[1:])
    y = ye[1:]
    P = np.empty(n)
    Q = np.empty(n)
    j = np.arange(n)
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        p = np.arange(lo, hi)
        sigma = np.where(j[None, :] <= p[:, None], 1.0, -1.0)
        w = sigma * (y[lo:hi, None] - ybar[None, :]) - 0.5 * L
        ch = np.cosh(w)
        sh = np.sinh(w)
        P[lo:hi] = ((ch * a - sigma * sh * b) / shalf).sum(axis=1)
        Q[lo:hi] = ((sigma * sh * a - ch * b) / shalf).sum(axis=1)
    return P, Q


def pq_periodic_fast(ye, ue, dh, L):
    n = ye.shape[0] - 1
    a, b = pair_coeffs(ye, ue, dh)
    C = np.exp(-L) / (1.0 - np.exp(-L))
    ref = ye[0]
    ybar = 0.5 * (ye[:-1] + ye[1:]) - ref
    yrel = ye[1:] - ref
    cp = np.exp(ybar) * (a + b)
    cm = np.exp(-ybar) * (a - b)
    Ei = np.exp(yrel)
    csum = np.cumsum(cp)
    tail = np.cumsum(cm[::-1])[::-1]
    fl = csum / Ei                       # f^l_i: pairs j <= p included
    fr = np.empty(n)
    fr[:-1] = tail[1:] * Ei[:-1]         # f^r_i: pairs j > p
    fr[-1] = 0.0
    gm = C * csum[-1] / Ei
    gp = C * tail[0] * Ei
    P = gm + fl + fr + gp
    Q = fr + gp - gm - fl
    return P, Q


def pq_line_naive(y, u, dh, block=256):
    n = y.shape[0]
    dy = 0.5 * (y[1:] - y[:-1])
    ub = 0.5 * (u[1:] + u[:-1])
    du = 0.5 * (u[1:] - u[:-1])
    ch = np.cosh(dy)
    sh = np.sinh(dy)
    a = (dh * ch * ch + ub * ub * sh / ch) / (2.0 * ch)
    b = ub * du * sh * sh / ch
    ybar = 0.5 * (y[:-1] + y[1:])
    bl = 0.25 * u[0] ** 2 * np.exp(y[0] - y)
    br = 0.25 * u[-1] ** 2 * np.exp(y - y[-1])
    P = bl + br
    Q = -bl + br
    c = np.arange(n - 1)
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        p = np.arange(lo, hi)
        sigma = np.where(c[None, :] < p[:, None], 1.0, -1.0)
        pij = np.exp(-sigma * (y[lo:hi, None] - ybar[None, :])) * (a + sigma * b)
        P[lo:hi] += pij.sum(axis=1)
        Q[lo:hi] += (-sigma * pij).sum(axis=1)
    return P, Q


def pq_line_fast(y, u, dh):
    n = y.shape[0]
    if n == 1:
        P = np.array([0.5 * u[0] ** 2])
        return P, np.zeros(1)
    dy = 0.5 * (y[1:] - y[:-1])
    ub = 0.5 * (u[1:] + u[:-1])
    du = 0.5 * (u[1:] - u[:-1])
    ch = np.cosh(dy)
    sh = np.sinh(dy)
    a = (dh * ch * ch + ub * ub * sh / ch) / (2.0 * ch)
    b = ub * du * sh * sh / ch
    ref = y[0]
    ybar = 0.5 * (y[:-1] + y[1:]) - ref
    yrel = y - ref
    Ei = np.exp(yrel)
    cp = np.exp(ybar) * (a + b)
    cm = np.exp(-ybar) * (a - b)
    fl = np.empty(n)
    fl[0] = 0.25 * u[0] ** 2
    fl[1:] = (np.cumsum(cp) + 0.25 * u[0] ** 2) / Ei[1:]
    fr = np.empty(n)
    fr[-1] = 0.25 * u[-1] ** 2
    tail = np.cumsum(cm[::-1])[::-1]
    fr[:-1] = (tail + 0.25 * u[-1] ** 2 * np.exp(-(yrel[-1]))) * Ei[:-1]
    return fl + fr, fr - fl


def momentum_solve(diag, rhs):
    """Scaled cyclic-tridiagonal solve, mirroring the jitted kernel.

    Band core goes through LAPACK's pivoted tridiagonal solver; the corner
    entries (0,m-1)=+1, (m-1,0)=-1 enter via the rank-2 Woodbury update.
    """
    m = diag.shape[0]
    if m == 2:
        return rhs / diag
    ab = np.zeros((3, m))
    ab[0, 1:] = -1.0
    ab[1, :] = diag
    ab[2, :-1] = 1.0
    work = np.zeros((m, 3))
    work[:, 0] = rhs
    work[0, 1] = 1.0
    work[m - 1, 2] = 1.0
    sol = scipy.linalg.solve_banded((1, 1), ab, work)
    c00 = sol[0, 1]
    c01 = -1.0 + sol[0, 2]
    c10 = 1.0 + sol[m - 1, 1]
    c11 = sol[m - 1, 2]
    det = c00 * c11 - c01 * c10
    r0, r1 = sol[0, 0], sol[m - 1, 0]
    s0 = (c11 * r0 - c01 * r1) / det
    s1 = (-c10 * r0 + c00 * r1) / det
    return sol[:, 0] - sol[:, 1] * s0 - sol[:, 2] * s1


def ordered_sum(x):
    s = 0.0
    for v in x:
        s += v
    return s
