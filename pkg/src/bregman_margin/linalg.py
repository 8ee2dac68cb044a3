"""Small dense kernels and the norm family used throughout the package.

Everything here assumes desk-scale dimensions (d <= 64). Cholesky and the
Jacobi eigen-solver are written out by hand so that numpy.linalg can serve
as an independent check in the tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

NORM_KINDS = ("l1", "l2", "linf", "mahalanobis")

_ABS_FLOOR = 1e-14


class LinalgError(ValueError):
    pass


class NotPositiveDefiniteError(LinalgError):
    def __init__(self, pivot: int, value: float):
        super().__init__(f"matrix is not positive definite: pivot {pivot} is {value!r}")
        self.pivot = pivot
        self.value = value


class EigenConvergenceError(LinalgError):
    pass


def as_vec(v, d: Optional[int] = None) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise LinalgError(f"expected a 1-d vector, got shape {v.shape}")
    if d is not None and v.shape[0] != d:
        raise LinalgError(f"dimension mismatch: expected {d}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise LinalgError("vector has non-finite entries")
    return v


def as_spd(A, check: bool = True) -> np.ndarray:
    """Validate a symmetric positive definite matrix and return a symmetrized copy."""
    A = np.array(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise LinalgError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise LinalgError("matrix has non-finite entries")
    scale = max(np.abs(A).max(initial=0.0), _ABS_FLOOR)
    if np.abs(A - A.T).max(initial=0.0) > 1e-12 * scale:
        raise LinalgError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    if check:
        cholesky(A)
    return A


def cholesky(A) -> np.ndarray:
    """Lower-triangular R with R @ R.T == A.

    Raises NotPositiveDefiniteError naming the first pivot that is not
    strictly positive.
    """
    A = np.asarray(A, dtype=np.float64)
    d = A.shape[0]
    R = np.zeros_like(A)
    for j in range(d):
        s = A[j, j] - R[j, :j] @ R[j, :j]
        if not s > 0.0:
            raise NotPositiveDefiniteError(j, float(s))
        R[j, j] = math.sqrt(s)
        for i in range(j + 1, d):
            R[i, j] = (A[i, j] - R[i, :j] @ R[j, :j]) / R[j, j]
    return R


def forward_sub(R: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve R x = b for lower-triangular R (b may be a matrix)."""
    b = np.asarray(b, dtype=np.float64)
    x = np.zeros_like(b)
    for i in range(R.shape[0]):
        x[i] = (b[i] - R[i, :i] @ x[:i]) / R[i, i]
    return x


def back_sub(R: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve R.T x = b for lower-triangular R."""
    b = np.asarray(b, dtype=np.float64)
    d = R.shape[0]
    x = np.zeros_like(b)
    for i in range(d - 1, -1, -1):
        x[i] = (b[i] - R[i + 1:, i] @ x[i + 1:]) / R[i, i]
    return x


def cho_solve(R: np.ndarray, b) -> np.ndarray:
    return back_sub(R, forward_sub(R, b))


def solve_spd(A, b) -> np.ndarray:
    A = as_spd(A, check=False)
    b = as_vec(b, A.shape[0])
    return cho_solve(cholesky(A), b)


def spd_inverse(A) -> np.ndarray:
    A = as_spd(A, check=False)
    inv = cho_solve(cholesky(A), np.eye(A.shape[0]))
    return 0.5 * (inv + inv.T)


def jacobi_eigenvalues(A, max_sweeps: int = 100) -> np.ndarray:
    """All eigenvalues of a symmetric matrix by cyclic Jacobi rotations."""
    A = np.array(A, dtype=np.float64)
    d = A.shape[0]
    if d > 64:
        raise LinalgError(f"jacobi solver supports d <= 64, got {d}")
    fro = np.linalg.norm(A)
    tol = 1e-12 * max(fro, _ABS_FLOOR)
    for _ in range(max_sweeps + 1):
        off = math.sqrt(np.sum((A - np.diag(np.diag(A))) ** 2))
        if off <= tol:
            return np.diag(A).copy()
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if abs(apq) <= 1e-18 * fro:
                    # negligible next to the tolerance; rotating on it overflows tau
                    A[p, q] = A[q, p] = 0.0
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # A <- J^T A J with J the (p, q) rotation
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap = A[p, :].copy()
                aq = A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
    raise EigenConvergenceError(f"jacobi did not converge in {max_sweeps} sweeps")


def extreme_eigs(A) -> tuple[float, float]:
    ev = jacobi_eigenvalues(as_spd(A, check=False))
    return float(ev.min()), float(ev.max())


@dataclass(frozen=True, eq=False)
class NormSpec:
    """A norm on R^d together with its closed-form dual.

    ``mahalanobis`` is ``sqrt(v^T A v)``; with ``inverse=True`` it is
    ``sqrt(v^T A^{-1} v)`` instead, which is how the dual of a Mahalanobis
    norm is represented without inverting A.
    """

    kind: str
    matrix: Optional[np.ndarray] = None
    inverse: bool = False

    def __post_init__(self):
        if self.kind not in NORM_KINDS:
            raise LinalgError(f"unknown norm kind {self.kind!r}")
        if self.kind == "mahalanobis":
            if self.matrix is None:
                raise LinalgError("mahalanobis norm needs a matrix")
            A = as_spd(self.matrix)
            A.setflags(write=False)
            object.__setattr__(self, "matrix", A)
            object.__setattr__(self, "_factor", cholesky(A))
        elif self.matrix is not None or self.inverse:
            raise LinalgError(f"{self.kind} norm takes no matrix")

    @classmethod
    def l1(cls):
        return cls("l1")

    @classmethod
    def l2(cls):
        return cls("l2")

    @classmethod
    def linf(cls):
        return cls("linf")

    @classmethod
    def mahalanobis(cls, A, inverse: bool = False):
        return cls("mahalanobis", np.asarray(A, dtype=np.float64), inverse)

    @property
    def dim(self) -> Optional[int]:
        return None if self.matrix is None else self.matrix.shape[0]

    def dual(self) -> "NormSpec":
        if self.kind == "l1":
            return NormSpec("linf")
        if self.kind == "linf":
            return NormSpec("l1")
        if self.kind == "l2":
            return NormSpec("l2")
        return NormSpec("mahalanobis", self.matrix, not self.inverse)

    def metric(self) -> np.ndarray:
        """The matrix M with norm(v) = sqrt(v^T M v) (mahalanobis only)."""
        if self.kind != "mahalanobis":
            raise LinalgError(f"{self.kind} norm has no metric matrix")
        return spd_inverse(self.matrix) if self.inverse else self.matrix

    def __call__(self, v) -> float:
        return norm(self, v)

    def __eq__(self, other):
        if not isinstance(other, NormSpec) or self.kind != other.kind:
            return False
        if self.kind != "mahalanobis":
            return True
        return self.inverse == other.inverse and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.kind, self.inverse))

    def __repr__(self):
        if self.kind == "mahalanobis":
            tag = "inv" if self.inverse else ""
            return f"NormSpec(mahalanobis{tag}, d={self.dim})"
        return f"NormSpec({self.kind})"


def norm(N: NormSpec, v) -> float:
    v = as_vec(v, N.dim)
    if N.kind == "l1":
        return float(np.abs(v).sum())
    if N.kind == "l2":
        return float(math.sqrt(v @ v))
    if N.kind == "linf":
        return float(np.abs(v).max(initial=0.0))
    R = N._factor
    if N.inverse:
        # v^T A^{-1} v = |R^{-1} v|^2
        w = forward_sub(R, v)
    else:
        # v^T A v = |R^T v|^2
        w = R.T @ v
    return float(math.sqrt(w @ w))


def dual_norm(N: NormSpec, v) -> float:
    return norm(N.dual(), v)


def norm_rows(N: NormSpec, X: np.ndarray) -> np.ndarray:
    """Row-wise norms, vectorized over a 2-d array."""
    X = np.asarray(X, dtype=np.float64)
    if N.kind == "l1":
        return np.abs(X).sum(axis=1)
    if N.kind == "l2":
        return np.sqrt(np.einsum("ij,ij->i", X, X))
    if N.kind == "linf":
        return np.abs(X).max(axis=1)
    M = N.metric()
    return np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", X, M, X), 0.0))
