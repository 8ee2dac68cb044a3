"""Maximum-margin classifiers for a given norm.

For a norm N the oracle solves

    maximize  min_i <u, y_i x_i>   subject to  N(u) <= 1.

l2 and Mahalanobis norms reduce (after whitening) to the hard-margin SVM
without bias, solved by dual coordinate ascent. l1 and linf balls are
polyhedral, so the problem is a small LP solved by a dense simplex method.
``grid_oracle`` is a brute-force check for d = 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .data import Dataset
from .linalg import NormSpec, back_sub, cholesky, forward_sub, norm, norm_rows


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class MarginCertificate:
    u_star: np.ndarray
    gamma_star: float
    feasible: bool
    norm: NormSpec
    method: str = ""

    def __repr__(self):
        u = np.array2string(self.u_star, precision=6)
        return (f"MarginCertificate(gamma_star={self.gamma_star:.10g}, u_star={u}, "
                f"feasible={self.feasible}, method={self.method!r})")


def simplex_max(c, A, b, max_pivots: int = 1_000_000, tol: float = 1e-12):
    """Maximize c^T x subject to A x <= b, x >= 0, for b >= 0.

    Dense tableau, slack starting basis, Bland's smallest-index rule for
    both the entering and the leaving variable (no cycling).
    Returns (x, optimal value).
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    m, nv = A.shape
    if np.any(b < 0):
        raise OracleError("simplex_max needs b >= 0 (origin feasible)")
    T = np.zeros((m + 1, nv + m + 1))
    T[:m, :nv] = A
    T[:m, nv:nv + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :nv] = -c
    basis = list(range(nv, nv + m))
    for _ in range(max_pivots):
        neg = np.flatnonzero(T[m, :-1] < -tol)
        if neg.size == 0:
            break
        j = int(neg[0])
        col = T[:m, j]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            raise OracleError("linear program is unbounded")
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        cands = rows[ratios <= best + tol * max(1.0, abs(best))]
        i = int(min(cands, key=lambda r: basis[r]))
        T[i] /= T[i, j]
        for r in range(m + 1):
            if r != i and T[r, j] != 0.0:
                T[r] -= T[r, j] * T[i]
        basis[i] = j
    else:
        raise OracleError(f"simplex did not terminate within {max_pivots} pivots")
    x = np.zeros(nv + m)
    x[basis] = T[:m, -1]
    return x[:nv], float(T[m, -1])


def _polyhedral_lp(Z: np.ndarray, kind: str):
    # variables: p (d), q (d), gamma >= 0;  u = p - q
    n, d = Z.shape
    rows = [np.concatenate([-Z[i], Z[i], [1.0]]) for i in range(n)]
    rhs = [0.0] * n
    if kind == "l1":
        rows.append(np.concatenate([np.ones(2 * d), [0.0]]))
        rhs.append(1.0)
    elif kind == "linf":
        for j in range(2 * d):
            e = np.zeros(2 * d + 1)
            e[j] = 1.0
            rows.append(e)
            rhs.append(1.0)
    else:
        raise OracleError(f"no polyhedral LP for norm {kind!r}")
    c = np.zeros(2 * d + 1)
    c[-1] = 1.0
    x, val = simplex_max(c, np.array(rows), np.array(rhs))
    u = x[:d] - x[d:2 * d]
    return u, val


def _separability_gap(Z):
    """Optimal margin over the linf box; positive iff the data are separable."""
    _, val = _polyhedral_lp(Z, "linf")
    return val


def _sep_tol(Z):
    return 1e-12 * max(1.0, float(np.abs(Z).max()))


def _infeasible(d, N, method):
    return MarginCertificate(np.zeros(d), 0.0, False, N, method)


def _svm_direction(Zw: np.ndarray, max_sweeps: int, tol: float):
    v, _alpha, sweeps, resid = kernels.dual_coordinate_ascent(Zw, max_sweeps, tol)
    if not resid <= tol:
        raise OracleError(f"dual coordinate ascent stalled: KKT residual {resid:.3g} after {sweeps} sweeps")
    return np.asarray(v)


def max_margin(ds: Dataset, N: NormSpec, max_sweeps: int = 1_000_000, kkt_tol: float = 1e-9) -> MarginCertificate:
    """Maximum N*-margin classifier (unit N-norm) and its margin.

    Non-separable data give a certificate with feasible=False and
    gamma_star = 0 (the optimum is attained at u = 0 then).
    For l1/linf the maximizer may not be unique; only gamma_star is
    canonical and u_star is the simplex vertex.
    """
    Z = ds.Z
    d = ds.d
    if N.dim is not None and N.dim != d:
        raise OracleError(f"dimension mismatch: data {d}, norm {N.dim}")
    if N.kind in ("l1", "linf"):
        u, val = _polyhedral_lp(Z, N.kind)
        if val <= _sep_tol(Z):
            return _infeasible(d, N, "simplex")
        u = u / norm(N, u)
        return MarginCertificate(u, float((Z @ u).min()), True, N, "simplex")

    if _separability_gap(Z) <= _sep_tol(Z):
        return _infeasible(d, N, "dual-coordinate-ascent")
    if N.kind == "l2":
        v = _svm_direction(np.ascontiguousarray(Z), max_sweeps, kkt_tol)
        u = v / math.sqrt(v @ v)
    else:
        # metric B = R R^T; with w = R^T u the constraint is |w|_2 <= 1 and
        # <u, z> = <w, R^{-1} z>
        R = cholesky(N.metric())
        Zw = np.ascontiguousarray(forward_sub(R, Z.T).T)
        v = _svm_direction(Zw, max_sweeps, kkt_tol)
        w = v / math.sqrt(v @ v)
        u = back_sub(R, w)
        u = u / norm(N, u)
    return MarginCertificate(u, float((Z @ u).min()), True, N, "dual-coordinate-ascent")


def grid_oracle(ds: Dataset, N: NormSpec, resolution: int = 100_000) -> MarginCertificate:
    """Brute-force search over `resolution` equally spaced directions (d = 2 only)."""
    if ds.d != 2:
        raise OracleError(f"grid oracle needs d = 2, got d = {ds.d}")
    phi = 2.0 * np.pi * np.arange(resolution) / resolution
    U = np.column_stack([np.cos(phi), np.sin(phi)])
    U /= norm_rows(N, U)[:, None]
    mins = np.asarray(kernels.grid_min_margins(U, np.ascontiguousarray(ds.Z)))
    k = int(np.argmax(mins))
    gamma = float(mins[k])
    if gamma <= 0.0:
        return _infeasible(2, N, "grid")
    return MarginCertificate(U[k].copy(), gamma, True, N, "grid")
