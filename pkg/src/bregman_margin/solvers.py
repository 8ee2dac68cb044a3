"""Mirror descent and (inexact) Bregman proximal point on the exponential loss.

Both methods start from theta_0 = 0. With the quadratic potential
w(theta) = <theta, A theta> the mirror step is

    grad w(theta_{t+1}) = grad w(theta_t) - 2 eta_t grad L(theta_t)

(the 2 comes from the 1/(2 eta) weight on the divergence), and the proximal
step minimizes phi_t(theta) = L(theta) + D_w(theta, theta_t) / (2 eta_t)
by warm-started gradient descent with backtracking.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .data import Dataset, stats
from .linalg import NormSpec, as_vec, norm
from .loss import loss_grad
from .oracle import max_margin
from .potentials import QuadraticPotential, convexity_profile
from .telemetry import Trajectory, alignment

ALGORITHMS = ("md", "bppa")


class ScheduleError(ValueError):
    pass


class NotSeparableError(ValueError):
    pass


class InnerSolveError(RuntimeError):
    """Backtracking in the proximal subproblem could not decrease phi_t."""

    def __init__(self, t, theta, iters, grad_norm):
        super().__init__(f"inner solve failed at outer step t={t}: backtracking exhausted "
                         f"after {iters} inner steps (|grad phi|={grad_norm:.3g})")
        self.t = t
        self.theta = theta
        self.iters = iters
        self.grad_norm = grad_norm


# -- stepsize schedules -------------------------------------------------------

def _check_eta(eta, t):
    if not (eta > 0 and math.isfinite(eta)):
        raise ScheduleError(f"stepsize at t={t} is not positive and finite: {eta!r}")
    return eta


@dataclass(frozen=True)
class Constant:
    eta: float = 1.0

    def validate(self, cap):
        _check_eta(self.eta, 0)

    def stepsize(self, t, loss, cap):
        return self.eta


@dataclass(frozen=True)
class ConstantCappedMD:
    """Constant stepsize that must not exceed mu_2 / (2 D_2)."""

    eta: float

    def validate(self, cap):
        _check_eta(self.eta, 0)
        if self.eta > cap:
            raise ScheduleError(f"constant stepsize {self.eta:g} exceeds the cap mu_2/(2 D_2) = {cap:.6g}")

    def stepsize(self, t, loss, cap):
        return self.eta


@dataclass(frozen=True)
class VaryingBPPA:
    """eta_t = alpha_t / L(theta_t) with alpha_t = 1/sqrt(t+1)."""

    def validate(self, cap):
        pass

    def alpha(self, t, cap):
        return 1.0 / math.sqrt(t + 1)

    def stepsize(self, t, loss, cap):
        return _check_eta(self.alpha(t, cap) / loss, t)


@dataclass(frozen=True)
class VaryingMD(VaryingBPPA):
    """eta_t = alpha_t / L(theta_t) with alpha_t = min{mu_2/(2 D_2), 1/sqrt(t+1)}."""

    def alpha(self, t, cap):
        return min(cap, 1.0 / math.sqrt(t + 1))


# -- inner solver settings ----------------------------------------------------

@dataclass(frozen=True)
class FixedSteps:
    k: int = 128
    step_scale: float = 0.2
    max_halvings: int = 30

    def __post_init__(self):
        if self.k < 1 or not 0 < self.step_scale <= 1:
            raise ValueError("need k >= 1 and 0 < step_scale <= 1")

    def budget(self, loss):
        return self.k, -1.0


@dataclass(frozen=True)
class ToleranceStop:
    """Run inner gradient descent until |grad phi_t|_2 <= delta_t.

    With ``relative`` (default) delta_t = delta * L(theta_t); otherwise
    delta_t = delta * max(1, L(theta_t)).
    """

    delta: float = 1e-10
    step_scale: float = 0.2
    max_steps: int = 100_000
    relative: bool = True
    max_halvings: int = 30

    def __post_init__(self):
        if not self.delta > 0 or not 0 < self.step_scale <= 1 or self.max_steps < 1:
            raise ValueError("need delta > 0, 0 < step_scale <= 1, max_steps >= 1")

    def budget(self, loss):
        scale = loss if self.relative else max(1.0, loss)
        return self.max_steps, self.delta * scale


# -- single steps -------------------------------------------------------------

def md_step(ds: Dataset, P: QuadraticPotential, theta, eta) -> np.ndarray:
    theta = as_vec(theta, ds.d)
    grad = loss_grad(ds, theta).gradient
    return P.inv_grad(P.grad(theta) - 2.0 * eta * grad)


def bppa_step(ds: Dataset, P: QuadraticPotential, theta, eta, cfg=None, t=None):
    """Approximate proximal step. Returns (theta_next, inner_iters, final |grad phi|)."""
    cfg = cfg or FixedSteps()
    theta = as_vec(theta, ds.d)
    if not eta > 0:
        raise ScheduleError(f"stepsize must be positive, got {eta!r}")
    L0 = kernels.exp_loss(ds.Z, theta)
    max_steps, tol = cfg.budget(L0)
    x, iters, gn, status = kernels.bppa_inner(ds.Z, P.A, theta, float(eta), cfg.step_scale * eta,
                                              int(max_steps), float(tol), int(cfg.max_halvings))
    if status == kernels.STATUS_BACKTRACK_FAILED:
        raise InnerSolveError(t, np.asarray(x), int(iters), float(gn))
    return np.asarray(x), int(iters), float(gn)


# -- full runs ----------------------------------------------------------------

def run(ds: Dataset, P: QuadraticPotential, N: NormSpec, algo: str, schedule, T: int,
        inner=None, recorder: Trajectory | None = None, reference=None,
        check_separable: bool = True, certificate=None) -> Trajectory:
    """Run MD or BPPA for T outer steps from theta_0 = 0 and record every iterate.

    Alignment is measured against ``reference`` (l2 cosine), defaulting to
    the oracle's max-margin direction for N.
    """
    if algo not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algo!r}; expected one of {ALGORITHMS}")
    if T < 0:
        raise ValueError("T must be non-negative")
    if P.dim != ds.d:
        raise ValueError(f"dimension mismatch: data {ds.d}, potential {P.dim}")
    inner = inner or FixedSteps()

    cap = convexity_profile(P, N).mu_2 / (2.0 * stats(ds, N).D_2)
    schedule.validate(cap)

    if certificate is None and check_separable:
        certificate = max_margin(ds, N)
        if not certificate.feasible:
            raise NotSeparableError("dataset is not linearly separable")
    if reference is None and certificate is not None:
        reference = certificate.u_star
    ref = None if reference is None else as_vec(reference, ds.d)

    traj = recorder if recorder is not None else Trajectory()
    traj.meta.update(algo=algo, schedule=repr(schedule), T=T)
    if certificate is not None:
        traj.meta["gamma_star"] = certificate.gamma_star
    Z = ds.Z

    def record(t, theta, L, eta, iters):
        n2 = math.sqrt(theta @ theta)
        if n2 == 0.0:
            traj.record(t, eta, L, 0.0, 0.0, math.nan, math.nan, iters)
            return
        nN = norm(N, theta)
        marg = float((Z @ theta).min()) / nN
        align = alignment(theta, ref) if ref is not None else math.nan
        traj.record(t, eta, L, nN, n2, marg, align, iters)

    theta = np.zeros(ds.d)
    L, g = kernels.exp_loss_grad(Z, theta)
    for t in range(T):
        eta = schedule.stepsize(t, L, cap)
        if algo == "md":
            nxt = P.inv_grad(P.grad(theta) - 2.0 * eta * np.asarray(g))
            iters = 0
        else:
            nxt, iters, _ = bppa_step(ds, P, theta, eta, inner, t=t)
        record(t, theta, L, eta, iters)
        theta = nxt
        L, g = kernels.exp_loss_grad(Z, theta)
    record(T, theta, L, math.nan, 0)
    traj.theta = theta
    return traj
