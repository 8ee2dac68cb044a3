"""numba-compiled versions of the hot kernels (see ``_kernels_numpy``)."""
import math

import numpy as np
from numba import njit

MARGIN_CLAMP = 700.0
EPS = np.finfo(np.float64).eps


@njit(cache=True, nogil=True)
def exp_loss(Z, theta):
    n, d = Z.shape
    total = 0.0
    for i in range(n):
        m = 0.0
        for j in range(d):
            m += Z[i, j] * theta[j]
        m = min(max(m, -MARGIN_CLAMP), MARGIN_CLAMP)
        total += math.exp(-m)
    return total / n


@njit(cache=True, nogil=True)
def _loss_grad_into(Z, theta, g):
    n, d = Z.shape
    total = 0.0
    for j in range(d):
        g[j] = 0.0
    for i in range(n):
        m = 0.0
        for j in range(d):
            m += Z[i, j] * theta[j]
        m = min(max(m, -MARGIN_CLAMP), MARGIN_CLAMP)
        e = math.exp(-m)
        total += e
        for j in range(d):
            g[j] -= e * Z[i, j]
    for j in range(d):
        g[j] /= n
    return total / n


@njit(cache=True, nogil=True)
def exp_loss_grad(Z, theta):
    g = np.empty(Z.shape[1])
    L = _loss_grad_into(Z, theta, g)
    return L, g


@njit(cache=True, nogil=True)
def _quad_into(A, theta_t, x, Adx):
    # returns (x - theta_t)^T A (x - theta_t), writes A (x - theta_t) into Adx
    d = x.shape[0]
    q = 0.0
    for i in range(d):
        s = 0.0
        for j in range(d):
            s += A[i, j] * (x[j] - theta_t[j])
        Adx[i] = s
        q += (x[i] - theta_t[i]) * s
    return q


@njit(cache=True, nogil=True)
def bppa_inner(Z, A, theta_t, eta, step, max_steps, tol, max_halvings):
    d = theta_t.shape[0]
    inv2eta = 0.5 / eta
    x = theta_t.copy()
    gL = np.empty(d)
    Lx = _loss_grad_into(Z, x, gL)
    Adx = np.zeros(d)
    q = 0.0
    phi = Lx
    gphi = gL.copy()
    gn = 0.0
    for j in range(d):
        gn += gphi[j] * gphi[j]
    gn = math.sqrt(gn)

    xt = np.empty(d)
    gLt = np.empty(d)
    Adxt = np.empty(d)
    it = 0
    status = 0
    while it < max_steps:
        if tol >= 0.0 and gn <= tol:
            break
        slack = 64.0 * EPS * phi
        h = step
        accepted = False
        moved = True
        phit = 0.0
        Lt = 0.0
        qt = 0.0
        for _ in range(max_halvings + 1):
            moved = False
            for j in range(d):
                xt[j] = x[j] - h * gphi[j]
                if xt[j] != x[j]:
                    moved = True
            if not moved:
                break
            Lt = _loss_grad_into(Z, xt, gLt)
            qt = _quad_into(A, theta_t, xt, Adxt)
            phit = Lt + inv2eta * qt
            if phit <= phi + slack:
                accepted = True
                break
            h *= 0.5
        if not accepted:
            status = 1 if moved else 2
            break
        gn = 0.0
        for j in range(d):
            x[j] = xt[j]
            gL[j] = gLt[j]
            Adx[j] = Adxt[j]
            gphi[j] = gL[j] + Adx[j] / eta
            gn += gphi[j] * gphi[j]
        gn = math.sqrt(gn)
        Lx = Lt
        q = qt
        phi = phit
        it += 1
    return x, it, gn, status


@njit(cache=True, nogil=True)
def grid_min_margins(U, Z):
    R = U.shape[0]
    n, d = Z.shape
    out = np.empty(R)
    for k in range(R):
        best = np.inf
        for i in range(n):
            m = 0.0
            for j in range(d):
                m += U[k, j] * Z[i, j]
            if m < best:
                best = m
        out[k] = best
    return out


@njit(cache=True, nogil=True)
def dual_coordinate_ascent(Z, max_sweeps, tol):
    n, d = Z.shape
    alpha = np.zeros(n)
    v = np.zeros(d)
    sq = np.empty(n)
    for i in range(n):
        s = 0.0
        for j in range(d):
            s += Z[i, j] * Z[i, j]
        sq[i] = s
    resid = np.inf
    for sweep in range(1, max_sweeps + 1):
        for i in range(n):
            m = 0.0
            for j in range(d):
                m += Z[i, j] * v[j]
            new = max(0.0, alpha[i] + (1.0 - m) / sq[i])
            delta = new - alpha[i]
            if delta != 0.0:
                for j in range(d):
                    v[j] += delta * Z[i, j]
                alpha[i] = new
        resid = 0.0
        for i in range(n):
            m = 0.0
            for j in range(d):
                m += Z[i, j] * v[j]
            g = 1.0 - m
            r = abs(g) if alpha[i] > 0.0 else max(g, 0.0)
            if r > resid:
                resid = r
        if resid <= tol:
            return v, alpha, sweep, resid
    return v, alpha, max_sweeps, resid
