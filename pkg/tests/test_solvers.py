import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bregman_margin import kernels
from bregman_margin.bounds import contraction_beta, contraction_beta_lower, loss_upper_bound_const
from bregman_margin.data import Dataset, gen_tightness
from bregman_margin.linalg import NormSpec, spd_inverse
from bregman_margin.loss import loss, loss_grad
from bregman_margin.potentials import QuadraticPotential
from bregman_margin.solvers import (Constant, ConstantCappedMD, FixedSteps, InnerSolveError,
                                    NotSeparableError, ScheduleError, ToleranceStop, VaryingBPPA,
                                    VaryingMD, bppa_step, md_step, run)

from conftest import random_spd

L2 = NormSpec.l2()


def test_md_step_examples(four, ident2):
    np.testing.assert_allclose(md_step(four, ident2, [0, 0], 1.0), [0.6875, 1], rtol=1e-15)
    P = QuadraticPotential(np.diag([2.0, 2.0]))
    np.testing.assert_allclose(md_step(four, P, [0, 0], 1.0), [0.34375, 0.5], rtol=1e-15)


def test_md_fixed_point_when_gradient_vanishes(ident2):
    # margins beyond the clamp give an exactly zero gradient
    ds = Dataset([[1.0, 0.0]], [1])
    theta = np.array([1e4, 0.0])
    np.testing.assert_array_equal(md_step(ds, ident2, theta, 1.0), theta)


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 5))
def test_md_matches_closed_form(seed, eta):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 5))
    ds = Dataset(rng.uniform(-2, 2, (6, d)), rng.choice([-1, 1], 6))
    P = QuadraticPotential(random_spd(rng, d))
    theta = rng.standard_normal(d)
    expect = theta - eta * spd_inverse(P.A) @ loss_grad(ds, theta).gradient
    np.testing.assert_allclose(md_step(ds, P, theta, eta), expect, rtol=1e-12, atol=1e-12)


def test_bppa_stop_at_start(four, ident2):
    x, iters, _ = bppa_step(four, ident2, [0.3, 0.2], 1.0, ToleranceStop(delta=10.0, relative=False))
    assert iters == 0
    np.testing.assert_array_equal(x, [0.3, 0.2])


def test_bppa_scalar_against_root(ident2):
    # one point z = 1 in R^1, A = 1: phi'(x) = -exp(-x) + (x - theta)/eta = 0
    ds = Dataset([[1.0]], [1])
    P = QuadraticPotential([[1.0]])
    theta, eta = 0.4, 2.0
    f = lambda x: -math.exp(-x) + (x - theta) / eta
    lo, hi = theta, theta + eta
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if f(mid) < 0 else (lo, mid)
    x, _, gn = bppa_step(ds, P, [theta], eta, ToleranceStop(delta=1e-13, relative=False))
    assert x[0] == pytest.approx(0.5 * (lo + hi), abs=1e-12)
    assert gn <= 1e-13


@given(st.integers(0, 2**32 - 1))
def test_bppa_decreases_phi(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 5))
    ds = Dataset(rng.uniform(-2, 2, (6, d)), rng.choice([-1, 1], 6))
    P = QuadraticPotential(random_spd(rng, d, 100))
    theta = rng.standard_normal(d)
    eta = float(rng.uniform(0.05, 20))
    x, _, _ = bppa_step(ds, P, theta, eta, FixedSteps(16, 1.0))
    phi = lambda v: loss(ds, v) + P.bregman(v, theta) / (2 * eta)
    assert phi(x) <= phi(theta)


def test_bppa_rejects_bad_eta(four, ident2):
    with pytest.raises(ScheduleError):
        bppa_step(four, ident2, [0, 0], 0.0)


def test_inner_failure_is_reported(four, ident2, monkeypatch):
    def broken(Z, A, theta_t, *args):
        return theta_t.copy(), 3, 1.5, kernels.STATUS_BACKTRACK_FAILED
    monkeypatch.setattr(kernels, "bppa_inner", broken)
    with pytest.raises(InnerSolveError) as info:
        run(four, ident2, L2, "bppa", Constant(1.0), 5)
    assert info.value.t == 0 and info.value.iters == 3


def test_inner_config_validation():
    with pytest.raises(ValueError):
        FixedSteps(0)
    with pytest.raises(ValueError):
        FixedSteps(10, 1.5)
    with pytest.raises(ValueError):
        ToleranceStop(delta=0)
    assert ToleranceStop(1e-10).budget(1e-20)[1] == pytest.approx(1e-30)
    assert ToleranceStop(1e-10, relative=False).budget(1e-20)[1] == 1e-10


def test_schedules():
    assert Constant(0.3).stepsize(7, 0.5, 1.0) == 0.3
    assert VaryingBPPA().stepsize(3, 0.5, 1.0) == pytest.approx(1.0)
    assert VaryingMD().stepsize(0, 0.5, 0.25) == pytest.approx(0.5)
    assert VaryingMD().stepsize(99, 1.0, 0.25) == pytest.approx(0.1)
    with pytest.raises(ScheduleError, match="0.447"):
        ConstantCappedMD(1.0).validate(2 / (2 * math.sqrt(5)))
    with pytest.raises(ScheduleError):
        Constant(-1.0).validate(1.0)


def test_capped_md_rejected_in_run(four, ident2):
    with pytest.raises(ScheduleError, match="cap"):
        run(four, ident2, L2, "md", ConstantCappedMD(1.0), 10)


def test_run_zero_steps(four, ident2):
    tr = run(four, ident2, L2, "md", Constant(1.0), 0)
    assert len(tr) == 1
    row = tr.final
    assert row["t"] == 0 and row["loss"] == 1 and row["norm_2"] == 0
    assert math.isnan(row["alignment"])
    np.testing.assert_array_equal(tr.theta, [0, 0])


def test_run_rejects_non_separable(four, ident2):
    bad = four.concat(Dataset(four.X, -four.y))
    with pytest.raises(NotSeparableError):
        run(bad, ident2, L2, "md", Constant(1.0), 3)
    tr = run(bad, ident2, L2, "md", Constant(1.0), 3, check_separable=False)
    assert len(tr) == 4


def test_run_validates_inputs(four, ident2):
    with pytest.raises(ValueError):
        run(four, ident2, L2, "sgd", Constant(1.0), 3)
    with pytest.raises(ValueError):
        run(four, QuadraticPotential.identity(3), L2, "md", Constant(1.0), 3)


def test_run_is_deterministic(four, ident2):
    a = run(four, ident2, L2, "bppa", VaryingBPPA(), 50)
    b = run(four, ident2, L2, "bppa", VaryingBPPA(), 50)
    assert a == b


def test_first_row_records_first_step(four, ident2):
    tr = run(four, ident2, L2, "md", Constant(1.0), 1)
    assert tr.rows[0][1] == 1.0 and math.isnan(tr.rows[1][1])
    np.testing.assert_allclose(tr.theta, [0.6875, 1])


@pytest.mark.parametrize("algo", ["md", "bppa"])
def test_direction_converges_with_long_horizon(four, ident2, algo):
    # the approach to (0, 1) is logarithmically slow; by T = 4000 it is past 0.99
    tr = run(four, ident2, L2, algo, Constant(1.0), 4000)
    assert tr.final["alignment"] >= 0.99


@pytest.mark.parametrize("algo, schedule", [
    ("bppa", Constant(1.0)), ("bppa", Constant(5.0)),
    ("md", ConstantCappedMD(1 / math.sqrt(5))),
])
def test_monotone_and_bounded(four, ident2, algo, schedule):
    tr = run(four, ident2, L2, algo, schedule, 600)
    L = tr.column("loss")
    assert np.all(np.diff(L) <= 0)
    eta = schedule.eta
    for t in range(1, 601):
        if eta * t > 1:
            assert L[t] <= loss_upper_bound_const(1.0, eta, 2.0, t)


def test_varying_bppa_contraction_sandwich(four, ident2):
    tr = run(four, ident2, L2, "bppa", VaryingBPPA(), 200, inner=ToleranceStop(1e-10))
    L = tr.column("loss")
    for t in range(200):
        alpha = 1 / math.sqrt(t + 1)
        r = L[t + 1] / L[t]
        assert r <= contraction_beta(alpha, 1.0, 2.0) + 1e-6
        assert r >= contraction_beta_lower(alpha, math.sqrt(5), 2.0) - 1e-6


@pytest.mark.parametrize("m", [4, 9, 16])
def test_tightness_margin_between_floor_and_ceiling(m):
    ds, _ = gen_tightness(m)
    P = QuadraticPotential.identity(m, 0.5)
    tr = run(ds, P, NormSpec.l1(), "md", Constant(1.0), 5000)
    margin = tr.final["margin_N"]
    # gamma = 1 over the l1 ball, mu_w = 1/m, L_w = 1
    floor = math.sqrt(1 / m)
    assert 0.9 * floor <= margin <= 2 * floor


def test_reference_override(four, ident2):
    tr = run(four, ident2, L2, "md", Constant(1.0), 10, reference=[1.0, 0.0])
    theta = tr.theta
    assert tr.final["alignment"] == pytest.approx(theta[0] / np.linalg.norm(theta))
