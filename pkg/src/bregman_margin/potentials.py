"""Distance-generating functions and their Bregman divergences.

Only the quadratic family w(theta) = <theta, A theta> is implemented (note:
no 1/2 factor, so w is 2-strongly convex and 2-smooth in its own
Mahalanobis norm). The method set is what a non-quadratic potential would
have to provide as well.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .linalg import (
    LinalgError,
    NormSpec,
    as_spd,
    as_vec,
    cho_solve,
    cholesky,
    extreme_eigs,
    forward_sub,
)


class QuadraticPotential:
    """w(theta) = <theta, A theta> for a symmetric positive definite A."""

    def __init__(self, A):
        A = as_spd(A)
        A.setflags(write=False)
        self.A = A
        self.dim = A.shape[0]

    @classmethod
    def identity(cls, d: int, scale: float = 1.0):
        return cls(scale * np.eye(d))

    @cached_property
    def factor(self) -> np.ndarray:
        return cholesky(self.A)

    @cached_property
    def A_inv(self) -> np.ndarray:
        inv = cho_solve(self.factor, np.eye(self.dim))
        return 0.5 * (inv + inv.T)

    def _v(self, v):
        return as_vec(v, self.dim)

    def value(self, theta) -> float:
        theta = self._v(theta)
        return float(theta @ self.A @ theta)

    def grad(self, theta) -> np.ndarray:
        return 2.0 * (self.A @ self._v(theta))

    def inv_grad(self, z) -> np.ndarray:
        """The point theta with grad(theta) == z, i.e. A^{-1} z / 2."""
        return 0.5 * cho_solve(self.factor, self._v(z))

    def conjugate(self, z) -> float:
        # w*(z) = <z, A^{-1} z> / 4
        z = self._v(z)
        r = forward_sub(self.factor, z)
        return float(r @ r) / 4.0

    def bregman(self, x, y) -> float:
        delta = self._v(x) - self._v(y)
        return max(float(delta @ self.A @ delta), 0.0)

    def bregman_conjugate(self, zx, zy) -> float:
        """D_{w*}(zx, zy) = <zx - zy, A^{-1}(zx - zy)> / 4."""
        delta = self._v(zx) - self._v(zy)
        r = forward_sub(self.factor, delta)
        return float(r @ r) / 4.0

    def __repr__(self):
        return f"QuadraticPotential(d={self.dim})"


@dataclass(frozen=True)
class ConvexityProfile:
    mu_w: float
    L_w: float
    mu_2: float

    @property
    def condition(self) -> float:
        return self.L_w / self.mu_w

    @property
    def margin_fraction(self) -> float:
        return math.sqrt(self.mu_w / self.L_w)


def convexity_profile(P: QuadraticPotential, N: NormSpec) -> ConvexityProfile:
    """Strong convexity / smoothness constants of P relative to the norm N.

    For l1 and linf these come from norm equivalence with l2 and carry a
    factor d; they are valid but not tight for general A.
    """
    if not isinstance(P, QuadraticPotential):
        raise LinalgError(f"unsupported potential/norm pair ({type(P).__name__}, {N.kind})")
    d = P.dim
    lo, hi = extreme_eigs(P.A)
    mu_2 = 2.0 * lo
    if N.kind == "l2":
        return ConvexityProfile(2.0 * lo, 2.0 * hi, mu_2)
    if N.kind == "l1":
        # |v|_1^2 / d <= |v|_2^2 <= |v|_1^2
        return ConvexityProfile(2.0 * lo / d, 2.0 * hi, mu_2)
    if N.kind == "linf":
        # |v|_inf^2 <= |v|_2^2 <= d |v|_inf^2
        return ConvexityProfile(2.0 * lo, 2.0 * hi * d, mu_2)
    if N.kind == "mahalanobis":
        if N.dim != d:
            raise LinalgError(f"dimension mismatch: potential {d}, norm {N.dim}")
        # whiten by the norm's metric B = R R^T: M = R^{-1} A R^{-T}
        R = cholesky(N.metric())
        W = forward_sub(R, P.A)
        M = forward_sub(R, W.T)
        lo_m, hi_m = extreme_eigs(0.5 * (M + M.T))
        return ConvexityProfile(2.0 * lo_m, 2.0 * hi_m, mu_2)
    raise LinalgError(f"unsupported potential/norm pair (quadratic, {N.kind})")
