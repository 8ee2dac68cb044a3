"""Closed-form theoretical quantities: loss-decay bounds, margin floors,
per-step contraction coefficients and order-of-magnitude iteration counts.

``t0_estimates`` sets every hidden constant to 1; its values are estimates
for orientation only and should never be used as pass/fail thresholds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


class BoundError(ValueError):
    pass


@dataclass(frozen=True)
class BoundInputs:
    gamma: float
    mu_w: float
    L_w: float
    mu_2: float = 1.0
    D_dual: float = 1.0
    D_2: float = 1.0
    eta: float = 1.0
    eps: float = 0.1

    def __post_init__(self):
        if not self.gamma > 0:
            raise BoundError("gamma must be positive")
        if not 0 < self.mu_w <= self.L_w:
            raise BoundError("need 0 < mu_w <= L_w")
        for name in ("mu_2", "eta", "eps"):
            if not getattr(self, name) > 0:
                raise BoundError(f"{name} must be positive")
        if self.D_dual < 0 or self.D_2 < 0:
            raise BoundError("D_dual and D_2 must be non-negative")


def loss_upper_bound_const(gamma: float, eta: float, L_w: float, t) -> float:
    """1/(g eta t) + L_w log^2(g eta t) / (4 g^2 eta t), valid once g eta t > 1."""
    x = gamma * eta * t
    if not x > 1.0:
        raise BoundError(f"bound needs gamma*eta*t > 1, got {x:g}")
    return 1.0 / x + L_w * math.log(x) ** 2 / (4.0 * gamma * x)


def margin_floor(gamma: float, mu_w: float, L_w: float) -> float:
    return math.sqrt(mu_w / L_w) * gamma


def _crossing(f, tol: float = 1e-15, max_iter: int = 200) -> float:
    # root of the increasing function f on (0, 1) with f(0) < 0 < f(1)
    lo, hi = 0.0, 1.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def contraction_beta(alpha: float, gamma: float, L_w: float) -> float:
    """min over beta of max{beta, exp(-2 alpha beta^2 gamma^2 / L_w)}.

    The first branch increases and the second decreases in beta, so the
    optimum sits at their crossing.
    """
    if not (alpha > 0 and gamma > 0 and L_w > 0):
        raise BoundError("alpha, gamma, L_w must be positive")
    c = 2.0 * alpha * gamma * gamma / L_w
    return _crossing(lambda b: b - math.exp(-c * b * b))


def contraction_beta_lower(alpha: float, D_dual: float, mu_w: float) -> float:
    """max over beta of min{beta, exp(-2 alpha D^2 beta / mu_w)} (branch crossing)."""
    if not (alpha > 0 and D_dual > 0 and mu_w > 0):
        raise BoundError("alpha, D_dual, mu_w must be positive")
    c = 2.0 * alpha * D_dual * D_dual / mu_w
    return _crossing(lambda b: b - math.exp(-c * b))


REGIMES = ("const_bppa", "vary_bppa", "const_md", "vary_md")


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def t0_estimates(b: BoundInputs, regime: str) -> float:
    g, eps = b.gamma, b.eps
    if regime == "const_bppa":
        ratio = b.D_dual ** 2 / (eps ** 2 * g ** 2)
        return max(ratio, _safe_exp(ratio * math.sqrt(b.L_w / b.mu_w)) / (g ** 2 * b.eta))
    if regime == "vary_bppa":
        return (b.L_w / (g * math.sqrt(b.mu_w) * eps)) ** 8
    if regime == "const_md":
        expo = (b.D_dual ** 1.5 * b.D_2 * b.L_w * b.eta
                / (g ** 2 * math.sqrt(b.mu_w) * b.mu_2 ** 1.5 * eps ** 1.5))
        return _safe_exp(expo * math.log(1.0 / eps))
    if regime == "vary_md":
        return (b.D_2 * b.L_w / (g * b.mu_2 * math.sqrt(b.mu_w) * eps)) ** 4
    raise BoundError(f"unknown regime {regime!r}; expected one of {REGIMES}")
