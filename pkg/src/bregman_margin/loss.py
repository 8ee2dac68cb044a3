"""Exponential empirical loss and normalized margins."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .data import Dataset
from .linalg import NormSpec, as_vec, norm


@dataclass(frozen=True)
class LossEval:
    value: float
    gradient: np.ndarray


def loss(ds: Dataset, theta) -> float:
    """(1/n) sum_i exp(-<theta, y_i x_i>), margins clamped to +-700."""
    return float(kernels.exp_loss(ds.Z, as_vec(theta, ds.d)))


def loss_grad(ds: Dataset, theta) -> LossEval:
    value, grad = kernels.exp_loss_grad(ds.Z, as_vec(theta, ds.d))
    return LossEval(float(value), np.asarray(grad))


def margins(ds: Dataset, theta) -> np.ndarray:
    return ds.Z @ as_vec(theta, ds.d)


def normalized_margin(ds: Dataset, theta, N: NormSpec) -> float:
    """min_i <theta, y_i x_i> / ||theta||."""
    theta = as_vec(theta, ds.d)
    scale = norm(N, theta)
    if scale == 0.0:
        raise ValueError("normalized margin is undefined at theta = 0")
    return float((ds.Z @ theta).min() / scale)
