"""Pure-numpy versions of the hot kernels.

Signatures and return conventions match ``_kernels_numba`` exactly; see
``kernels`` for the dispatch and the status codes.
"""
import math

import numpy as np

MARGIN_CLAMP = 700.0
EPS = np.finfo(np.float64).eps


def exp_loss(Z, theta):
    m = np.clip(Z @ theta, -MARGIN_CLAMP, MARGIN_CLAMP)
    return float(np.exp(-m).mean())


def exp_loss_grad(Z, theta):
    m = np.clip(Z @ theta, -MARGIN_CLAMP, MARGIN_CLAMP)
    e = np.exp(-m)
    n = Z.shape[0]
    return float(e.sum() / n), -(e @ Z) / n


def bppa_inner(Z, A, theta_t, eta, step, max_steps, tol, max_halvings):
    inv2eta = 0.5 / eta
    x = theta_t.copy()
    Lx, gL = exp_loss_grad(Z, x)
    Adx = np.zeros_like(x)
    q = 0.0
    phi = Lx
    gphi = gL.copy()
    gn = math.sqrt(gphi @ gphi)
    it = 0
    status = 0
    while it < max_steps:
        if tol >= 0.0 and gn <= tol:
            break
        # phi is only resolved to ~eps*phi; near the minimizer the true
        # decrease of a step drops below that, so allow rounding-level rises
        slack = 64.0 * EPS * phi
        h = step
        accepted = False
        moved = True
        for _ in range(max_halvings + 1):
            xt = x - h * gphi
            if np.array_equal(xt, x):
                moved = False
                break
            Lt, gLt = exp_loss_grad(Z, xt)
            dxt = xt - theta_t
            Adxt = A @ dxt
            qt = dxt @ Adxt
            phit = Lt + inv2eta * qt
            if phit <= phi + slack:
                accepted = True
                break
            h *= 0.5
        if not accepted:
            status = 1 if moved else 2
            break
        x, Lx, gL, Adx, q, phi = xt, Lt, gLt, Adxt, qt, phit
        gphi = gL + Adx / eta
        gn = math.sqrt(gphi @ gphi)
        it += 1
    return x, it, gn, status


def grid_min_margins(U, Z, chunk=8192):
    out = np.empty(U.shape[0])
    for s in range(0, U.shape[0], chunk):
        out[s:s + chunk] = (U[s:s + chunk] @ Z.T).min(axis=1)
    return out


def dual_coordinate_ascent(Z, max_sweeps, tol):
    n, d = Z.shape
    alpha = np.zeros(n)
    v = np.zeros(d)
    sq = np.einsum("ij,ij->i", Z, Z)
    resid = np.inf
    for sweep in range(1, max_sweeps + 1):
        for i in range(n):
            new = max(0.0, alpha[i] + (1.0 - Z[i] @ v) / sq[i])
            delta = new - alpha[i]
            if delta != 0.0:
                v += delta * Z[i]
                alpha[i] = new
        g = 1.0 - Z @ v
        resid = float(np.where(alpha > 0.0, np.abs(g), np.maximum(g, 0.0)).max())
        if resid <= tol:
            return v, alpha, sweep, resid
    return v, alpha, max_sweeps, resid
