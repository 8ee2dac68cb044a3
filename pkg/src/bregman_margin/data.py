"""Datasets, generators and file I/O."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .linalg import NormSpec, NotPositiveDefiniteError, as_vec, cholesky, norm_rows


class DataError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Dataset:
    """Labeled points: X has shape (n, d), y holds labels in {+1, -1}."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64)
        y = np.array(self.y, dtype=np.float64).reshape(-1)
        if X.ndim != 2 or X.shape[0] < 1:
            raise DataError(f"X must be a non-empty (n, d) array, got shape {X.shape}")
        if y.shape[0] != X.shape[0]:
            raise DataError(f"{X.shape[0]} points but {y.shape[0]} labels")
        if not np.all((y == 1.0) | (y == -1.0)):
            raise DataError("labels must be +1 or -1")
        if not np.all(np.isfinite(X)):
            raise DataError("features must be finite")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        Z = y[:, None] * X
        Z.setflags(write=False)
        object.__setattr__(self, "Z", Z)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def signed_points(self) -> np.ndarray:
        return self.Z

    def scaled(self, c: float) -> "Dataset":
        return Dataset(c * self.X, self.y)

    def concat(self, other: "Dataset") -> "Dataset":
        return Dataset(np.vstack([self.X, other.X]), np.concatenate([self.y, other.y]))

    def to_json(self) -> list[dict]:
        return [{"x": [float(v) for v in x], "y": int(y)} for x, y in zip(self.X, self.y)]

    @classmethod
    def from_json(cls, rows) -> "Dataset":
        if not rows:
            raise DataError("empty dataset")
        try:
            X = [list(map(float, r["x"])) for r in rows]
            y = [int(r["y"]) for r in rows]
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed dataset record: {exc}") from None
        if len({len(x) for x in X}) != 1:
            raise DataError("points have differing dimensions")
        return cls(np.array(X), np.array(y))


def signed_points(ds: Dataset) -> np.ndarray:
    return ds.Z


def check_separable(ds: Dataset, u) -> bool:
    u = as_vec(u, ds.d)
    return bool(np.all(ds.Z @ u > 0.0))


@dataclass(frozen=True)
class DatasetStats:
    D_dual: float
    D_2: float


def stats(ds: Dataset, N: NormSpec) -> DatasetStats:
    """Largest dual-norm and l2-norm of the feature vectors."""
    D_dual = float(norm_rows(N.dual(), ds.X).max())
    D_2 = float(norm_rows(NormSpec.l2(), ds.X).max())
    return DatasetStats(D_dual, D_2)


def fixture_four_point() -> Dataset:
    X = np.array([[-0.5, 1.0], [-0.5, -1.0], [-0.75, -1.0], [2.0, 1.0]])
    y = np.array([1, -1, -1, 1])
    return Dataset(X, y)


@dataclass(frozen=True)
class SpheresConfig:
    n_labeled: int = 2
    m_unlabeled: int = 100
    d: int = 2
    r: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not self.r > 0:
            raise DataError(f"radius must be positive, got {self.r}")
        if self.d < 2:
            raise DataError(f"dimension must be >= 2, got {self.d}")
        if self.n_labeled < 1 or self.m_unlabeled < 0:
            raise DataError("need n_labeled >= 1 and m_unlabeled >= 0")
        if self.seed < 0:
            raise DataError("seed must be non-negative")


def make_rng(seed: int) -> np.random.Generator:
    """Philox (counter-based, 64-bit) generator; reproducible across platforms."""
    return np.random.Generator(np.random.Philox(int(seed)))


def unit_sphere(rng: np.random.Generator, d: int) -> np.ndarray:
    while True:
        g = rng.standard_normal(d)
        s = math.sqrt(g @ g)
        if s > 0.0:
            return g / s


def _coin(rng: np.random.Generator) -> float:
    # low bit of the next raw draw: 1 -> +1, 0 -> -1
    return 1.0 if rng.bit_generator.random_raw() & 1 else -1.0


def _sphere_draw(rng, mu, r):
    y = _coin(rng)
    return y * mu + r * unit_sphere(rng, mu.shape[0]), y


def gen_spheres(cfg: SpheresConfig):
    """Mixture of two spheres of radius r centred at +mu and -mu.

    Returns (labeled Dataset, unlabeled points of shape (m, d), mu).
    """
    rng = make_rng(cfg.seed)
    mu = unit_sphere(rng, cfg.d)
    X = np.empty((cfg.n_labeled, cfg.d))
    y = np.empty(cfg.n_labeled)
    for i in range(cfg.n_labeled):
        X[i], y[i] = _sphere_draw(rng, mu, cfg.r)
    U = np.empty((cfg.m_unlabeled, cfg.d))
    for j in range(cfg.m_unlabeled):
        U[j], _ = _sphere_draw(rng, mu, cfg.r)
    return Dataset(X, y), U, mu


def empirical_covariance(pts) -> np.ndarray:
    """(1/m) sum_j x_j x_j^T, required to be positive definite."""
    P = np.asarray(pts, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] == 0:
        raise DataError("need a non-empty (m, d) array of points")
    S = P.T @ P / P.shape[0]
    S = 0.5 * (S + S.T)
    try:
        cholesky(S)
    except NotPositiveDefiniteError as exc:
        raise DataError(f"empirical covariance is not positive definite (pivot {exc.pivot})") from None
    return S


def tightness_vector(m: int) -> np.ndarray:
    z = np.full(m, 1.0 / math.sqrt(m))
    z[0] = 1.0
    return z


def gen_tightness(m: int):
    """Two-point family {(z, +1), (-z, -1)} in R^m, z = (1, 1/sqrt(m), ...).

    Both signed points equal z.
    """
    if m < 1:
        raise DataError(f"m must be >= 1, got {m}")
    z = tightness_vector(m)
    return Dataset(np.vstack([z, -z]), np.array([1, -1])), z


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_csv(path) -> Dataset:
    """d feature columns followed by a +1/-1 label column.

    A single header line is skipped when its first field is not numeric.
    """
    path = Path(path)
    lines = path.read_text().splitlines()
    rows, labels = [], []
    width = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if lineno == 1 and not _is_number(fields[0]):
            continue
        if len(fields) < 2:
            raise DataError(f"{path}:{lineno}: need at least one feature and a label")
        try:
            vals = [float(f) for f in fields]
        except ValueError:
            raise DataError(f"{path}:{lineno}: non-numeric field") from None
        label = vals[-1]
        if label not in (1.0, -1.0):
            raise DataError(f"{path}:{lineno}: label must be +1 or -1, got {fields[-1]}")
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise DataError(f"{path}:{lineno}: expected {width} fields, got {len(vals)}")
        if not all(math.isfinite(v) for v in vals):
            raise DataError(f"{path}:{lineno}: non-finite value")
        rows.append(vals[:-1])
        labels.append(label)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return Dataset(np.array(rows), np.array(labels))


def save_csv(ds: Dataset, path) -> None:
    with open(path, "w") as fh:
        for x, y in zip(ds.X, ds.y):
            fh.write(",".join(repr(float(v)) for v in x) + f",{int(y)}\n")


def load_json(path) -> Dataset:
    with open(path) as fh:
        return Dataset.from_json(json.load(fh))


def save_json(ds: Dataset, path) -> None:
    with open(path, "w") as fh:
        json.dump(ds.to_json(), fh)
