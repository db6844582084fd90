"""Numba-jitted hot kernels.

Index conventions shared with the numpy lane (see _kernels_numpy):

* Periodic peakon sums work on ghost-extended arrays ``ye``/``ue`` of length
  n+1 with ``ye[0] = y[n-1] - L`` (the boundary peakon) and ``ye[1:]`` the
  peaks. Pair j in {0..n-1} spans [ye[j], ye[j+1]]; ``dh[j]`` is its
  half-interval energy. Output index p in {0..n-1} refers to peak ye[p+1];
  the interaction sign is +1 for j <= p and -1 for j > p.
* The momentum solve operates on the grid-scaled system: tridiagonal with
  sub-diagonal +1, super-diagonal -1, diagonal ``d`` (length 2n), plus
  corner entries (0,2n-1)=+1 and (2n-1,0)=-1.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def pair_coeffs(ye, ue, dh):
    n = ye.shape[0] - 1
    a = np.empty(n)
    b = np.empty(n)
    for j in range(n):
        dy = 0.5 * (ye[j + 1] - ye[j])
        ub = 0.5 * (ue[j + 1] + ue[j])
        du = 0.5 * (ue[j + 1] - ue[j])
        ch = np.cosh(dy)
        sh = np.sinh(dy)
        a[j] = (dh[j] * ch * ch + ub * ub * sh / ch) / (2.0 * ch)
        b[j] = ub * du * sh * sh / ch
    return a, b


@njit(cache=True)
def pq_periodic_naive(ye, ue, dh, L):
    n = ye.shape[0] - 1
    P = np.zeros(n)
    Q = np.zeros(n)
    shalf = np.sinh(0.5 * L)
    a, b = pair_coeffs(ye, ue, dh)
    for p in range(n):
        yi = ye[p + 1]
        acc_p = 0.0
        acc_q = 0.0
        for j in range(n):
            sigma = 1.0 if j <= p else -1.0
            ybar = 0.5 * (ye[j] + ye[j + 1])
            w = sigma * (yi - ybar) - 0.5 * L
            ew = np.exp(w)
            emw = 1.0 / ew
            ch = 0.5 * (ew + emw)
            sh = 0.5 * (ew - emw)
            acc_p += (ch * a[j] - sigma * sh * b[j]) / shalf
            acc_q += (sigma * sh * a[j] - ch * b[j]) / shalf
        P[p] = acc_p
        Q[p] = acc_q
    return P, Q


@njit(cache=True)
def pq_periodic_fast(ye, ue, dh, L):
    # Geometric-series form of the periodic kernel: P = g- + f_l + f_r + g+,
    # Q = (f_r + g+) - (f_l + g-), evaluated through the O(n) recursions for
    # g_l = g- + f_l (upward) and g_r = g+ + f_r (downward).
    n = ye.shape[0] - 1
    a, b = pair_coeffs(ye, ue, dh)
    C = np.exp(-L) / (1.0 - np.exp(-L))

    # tails at the first/last peak; exponents stay within [-L, L]
    y1 = ye[1]
    yn = ye[n]
    gm1 = 0.0  # g^-_1
    gpn = 0.0  # g^+_n
    for j in range(n):
        ybar = 0.5 * (ye[j] + ye[j + 1])
        gm1 += np.exp(ybar - y1) * (a[j] + b[j])
        gpn += np.exp(yn - ybar) * (a[j] - b[j])
    gm1 *= C
    gpn *= C

    gl = np.empty(n)  # gl[p] = g^- + f^l at peak p
    gr = np.empty(n)  # gr[p] = g^+ + f^r at peak p
    dy0 = 0.5 * (ye[1] - ye[0])
    gl[0] = gm1 + np.exp(-dy0) * (a[0] + b[0])
    for p in range(n - 1):
        dy = 0.5 * (ye[p + 2] - ye[p + 1])  # pair index p+1
        gl[p + 1] = np.exp(-2.0 * dy) * gl[p] + np.exp(-dy) * (a[p + 1] + b[p + 1])
    gr[n - 1] = gpn  # f^r at the last peak is an empty sum
    for p in range(n - 2, -1, -1):
        dy = 0.5 * (ye[p + 2] - ye[p + 1])  # pair index p+1
        gr[p] = np.exp(-2.0 * dy) * gr[p + 1] + np.exp(-dy) * (a[p + 1] - b[p + 1])

    P = np.empty(n)
    Q = np.empty(n)
    for p in range(n):
        P[p] = gl[p] + gr[p]
        Q[p] = gr[p] - gl[p]
    return P, Q


@njit(cache=True)
def pq_line_naive(y, u, dh):
    # Real-line sums; dh holds the n-1 interior half-interval energies.
    n = y.shape[0]
    P = np.zeros(n)
    Q = np.zeros(n)
    for p in range(n):
        t = 0.25 * u[0] * u[0] * np.exp(y[0] - y[p])
        acc_p = t
        acc_q = -t
        t = 0.25 * u[n - 1] * u[n - 1] * np.exp(y[p] - y[n - 1])
        acc_p += t
        acc_q += t
        for c in range(n - 1):
            dy = 0.5 * (y[c + 1] - y[c])
            ub = 0.5 * (u[c + 1] + u[c])
            du = 0.5 * (u[c + 1] - u[c])
            ch = np.cosh(dy)
            sh = np.sinh(dy)
            aj = (dh[c] * ch * ch + ub * ub * sh / ch) / (2.0 * ch)
            bj = ub * du * sh * sh / ch
            ybar = 0.5 * (y[c] + y[c + 1])
            sigma = 1.0 if c < p else -1.0
            pij = np.exp(-sigma * (y[p] - ybar)) * (aj + sigma * bj)
            acc_p += pij
            acc_q += -sigma * pij
        P[p] = acc_p
        Q[p] = acc_q
    return P, Q


@njit(cache=True)
def pq_line_fast(y, u, dh):
    n = y.shape[0]
    fl = np.empty(n)
    fr = np.empty(n)
    fl[0] = 0.25 * u[0] * u[0]
    fr[n - 1] = 0.25 * u[n - 1] * u[n - 1]
    for p in range(n - 1):
        dy = 0.5 * (y[p + 1] - y[p])
        ub = 0.5 * (u[p + 1] + u[p])
        du = 0.5 * (u[p + 1] - u[p])
        ch = np.cosh(dy)
        sh = np.sinh(dy)
        aj = (dh[p] * ch * ch + ub * ub * sh / ch) / (2.0 * ch)
        bj = ub * du * sh * sh / ch
        decay = np.exp(-2.0 * dy)
        e1 = np.exp(-dy)
        fl[p + 1] = decay * fl[p] + e1 * (aj + bj)
        q = n - 2 - p
        dy = 0.5 * (y[q + 1] - y[q])
        ub = 0.5 * (u[q + 1] + u[q])
        du = 0.5 * (u[q + 1] - u[q])
        ch = np.cosh(dy)
        sh = np.sinh(dy)
        aj = (dh[q] * ch * ch + ub * ub * sh / ch) / (2.0 * ch)
        bj = ub * du * sh * sh / ch
        fr[q] = np.exp(-2.0 * dy) * fr[q + 1] + np.exp(-dy) * (aj - bj)
    P = fl + fr
    Q = fr - fl
    return P, Q


@njit(cache=True)
def tri_lu_pivot(dl, d, du):
    """LU of a tridiagonal matrix with partial pivoting (LAPACK gttrf layout).

    Overwrites the band arrays in place; returns (du2, ipiv)."""
    m = d.shape[0]
    du2 = np.zeros(max(m - 2, 0))
    ipiv = np.empty(m, np.int64)
    for i in range(m):
        ipiv[i] = i
    for i in range(m - 1):
        if abs(d[i]) >= abs(dl[i]):
            if d[i] != 0.0:
                fact = dl[i] / d[i]
                dl[i] = fact
                d[i + 1] = d[i + 1] - fact * du[i]
        else:
            fact = d[i] / dl[i]
            d[i] = dl[i]
            dl[i] = fact
            tmp = du[i]
            du[i] = d[i + 1]
            d[i + 1] = tmp - fact * d[i + 1]
            if i < m - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -fact * du[i + 1]
            ipiv[i] = i + 1
    return du2, ipiv


@njit(cache=True)
def tri_lu_solve(dl, d, du, du2, ipiv, b):
    """Solve with the factorization from tri_lu_pivot; b is (m, k), in place."""
    m = d.shape[0]
    k = b.shape[1]
    for col in range(k):
        for i in range(m - 1):
            if ipiv[i] == i:
                b[i + 1, col] -= dl[i] * b[i, col]
            else:
                tmp = b[i, col]
                b[i, col] = b[i + 1, col]
                b[i + 1, col] = tmp - dl[i] * b[i + 1, col]
        b[m - 1, col] /= d[m - 1]
        if m > 1:
            b[m - 2, col] = (b[m - 2, col] - du[m - 2] * b[m - 1, col]) / d[m - 2]
        for i in range(m - 3, -1, -1):
            b[i, col] = (b[i, col] - du[i] * b[i + 1, col] - du2[i] * b[i + 2, col]) / d[i]
    return b


@njit(cache=True)
def momentum_solve(diag, rhs):
    """Solve the scaled cyclic-tridiagonal momentum system.

    Matrix: tridiag(sub=+1, diag, super=-1) with corners (0,m-1)=+1 and
    (m-1,0)=-1, m = diag.size. Corners enter through a rank-2
    Sherman-Morrison-Woodbury correction of the corner-free band, which is
    provably invertible for nonnegative diagonals.
    """
    m = diag.shape[0]
    if m == 2:
        # n = 1: corners overlap the band and cancel; system is diagonal
        out = np.empty(2)
        out[0] = rhs[0] / diag[0]
        out[1] = rhs[1] / diag[1]
        return out
    dl = np.ones(m - 1)
    du = np.full(m - 1, -1.0)
    d = diag.copy()
    du2, ipiv = tri_lu_pivot(dl, d, du)
    work = np.zeros((m, 3))
    for i in range(m):
        work[i, 0] = rhs[i]
    work[0, 1] = 1.0
    work[m - 1, 2] = 1.0
    tri_lu_solve(dl, d, du, du2, ipiv, work)
    # capacitance: Cinv + U^T B^{-1} U with U = [e_0, e_{m-1}], C = [[0,1],[-1,0]]
    c00 = work[0, 1]
    c01 = -1.0 + work[0, 2]
    c10 = 1.0 + work[m - 1, 1]
    c11 = work[m - 1, 2]
    det = c00 * c11 - c01 * c10
    r0 = work[0, 0]
    r1 = work[m - 1, 0]
    s0 = (c11 * r0 - c01 * r1) / det
    s1 = (-c10 * r0 + c00 * r1) / det
    out = np.empty(m)
    for i in range(m):
        out[i] = work[i, 0] - work[i, 1] * s0 - work[i, 2] * s1
    return out


@njit(cache=True)
def ordered_sum(x):
    s = 0.0
    for i in range(x.shape[0]):
        s += x[i]
    return s


@njit(cache=True)
def bench_pq_periodic(ye, ue, dh, L, reps, fast):
    """Timing helper: repeated kernel evaluation without Python dispatch."""
    acc = 0.0
    for _ in range(reps):
        if fast:
            P, Q = pq_periodic_fast(ye, ue, dh, L)
        else:
            P, Q = pq_periodic_naive(ye, ue, dh, L)
        acc += P[0] + Q[-1]
    return acc
