import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bregman_margin.data import Dataset, gen_tightness
from bregman_margin.linalg import NormSpec
from bregman_margin.loss import loss, loss_grad, normalized_margin

seeds = st.integers(0, 2**32 - 1)


def random_ds(rng, n=None, d=None):
    n = n or int(rng.integers(1, 12))
    d = d or int(rng.integers(1, 6))
    return Dataset(rng.uniform(-2, 2, (n, d)), rng.choice([-1, 1], n))


def test_loss_examples(four):
    assert loss(four, [0, 0]) == 1
    assert loss(four, [0, 1]) == pytest.approx(math.exp(-1), rel=1e-15)
    assert loss(Dataset([[1.0, 0.0]], [1]), [math.log(2), 0]) == pytest.approx(0.5, rel=1e-15)


def test_grad_examples(four):
    np.testing.assert_allclose(loss_grad(four, [0, 0]).gradient, [-0.6875, -1], rtol=1e-15)
    np.testing.assert_array_equal(loss_grad(Dataset([[1.0, 0.0]], [1]), [0, 0]).gradient, [-1, 0])
    ev = loss_grad(four, [0, 1e6])
    assert ev.value < 1e-300 and np.all(np.abs(ev.gradient) < 1e-300)


def test_clamp_keeps_values_finite(four):
    assert math.isfinite(loss(four, [0, -1e6]))
    assert np.all(np.isfinite(loss_grad(four, [0, -1e6]).gradient))


def test_normalized_margin_examples(four):
    assert normalized_margin(four, [0, 1], NormSpec.l2()) == 1
    assert normalized_margin(four, [0, 2], NormSpec.l2()) == 1
    ds, z = gen_tightness(4)
    assert normalized_margin(ds, z, NormSpec.l1()) == pytest.approx(0.7, rel=1e-15)
    with pytest.raises(ValueError):
        normalized_margin(four, [0, 0], NormSpec.l2())


@given(seeds, st.floats(1e-3, 1e3))
def test_margin_scale_invariance(seed, c):
    rng = np.random.default_rng(seed)
    ds = random_ds(rng)
    theta = rng.standard_normal(ds.d)
    for N in (NormSpec.l1(), NormSpec.l2(), NormSpec.linf()):
        a = normalized_margin(ds, theta, N)
        assert normalized_margin(ds, c * theta, N) == pytest.approx(a, rel=1e-14, abs=1e-14)


@given(seeds)
def test_loss_convex_on_segments(seed):
    rng = np.random.default_rng(seed)
    ds = random_ds(rng)
    a, b = rng.standard_normal(ds.d), rng.standard_normal(ds.d)
    assert loss(ds, 0.5 * (a + b)) <= 0.5 * (loss(ds, a) + loss(ds, b)) + 1e-12


def test_grad_vs_finite_differences():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        ds = random_ds(rng)
        theta = rng.standard_normal(ds.d)
        g = loss_grad(ds, theta).gradient
        h = 1e-5 * (1 + np.linalg.norm(theta))
        fd = np.array([(loss(ds, theta + h * e) - loss(ds, theta - h * e)) / (2 * h)
                       for e in np.eye(ds.d)])
        assert np.linalg.norm(fd - g) <= 1e-6 * max(np.linalg.norm(g), 1e-3)
