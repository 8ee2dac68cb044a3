"""Per-iteration trajectories and their CSV/JSON export."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .linalg import as_vec

COLUMNS = ("t", "eta", "loss", "norm_N", "norm_2", "margin_N", "alignment", "inner_iters")
_INT_COLUMNS = ("t", "inner_iters")


class TelemetryError(OSError):
    pass


def alignment(theta, u) -> float:
    """Cosine between theta and u (always l2-normalized)."""
    theta = as_vec(theta)
    u = as_vec(u, theta.shape[0])
    nt = math.sqrt(theta @ theta)
    nu = math.sqrt(u @ u)
    if nt == 0.0 or nu == 0.0:
        raise ValueError("alignment is undefined for a zero vector")
    return float(min(1.0, max(-1.0, (theta @ u) / (nt * nu))))


class Trajectory:
    """Rows of (t, eta, loss, norm_N, norm_2, margin_N, alignment, inner_iters).

    Row t describes theta_t; ``eta`` and ``inner_iters`` are those of the
    step taken from theta_t (NaN and 0 on the last row). Quantities that are
    undefined at theta = 0 are NaN.
    """

    def __init__(self, rows=None, meta=None):
        self.rows: list[tuple] = []
        self.meta = dict(meta or {})
        self.theta = None
        for r in rows or ():
            self.record(**r) if isinstance(r, dict) else self.record(*r)

    def record(self, t, eta, loss, norm_N, norm_2, margin_N, alignment, inner_iters=0):
        if self.rows and t <= self.rows[-1][0]:
            raise ValueError(f"t must increase strictly, got {t} after {self.rows[-1][0]}")
        self.rows.append((int(t), float(eta), float(loss), float(norm_N), float(norm_2),
                          float(margin_N), float(alignment), int(inner_iters)))

    def set_last(self, **fields):
        row = list(self.rows[-1])
        for k, v in fields.items():
            row[COLUMNS.index(k)] = v
        self.rows[-1] = tuple(row)

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        i = COLUMNS.index(name)
        dtype = np.int64 if name in _INT_COLUMNS else np.float64
        return np.array([r[i] for r in self.rows], dtype=dtype)

    def as_dicts(self) -> list[dict]:
        return [dict(zip(COLUMNS, r)) for r in self.rows]

    @property
    def final(self) -> dict:
        return dict(zip(COLUMNS, self.rows[-1]))

    def __eq__(self, other):
        if not isinstance(other, Trajectory) or len(self) != len(other):
            return False
        a = np.array(self.rows, dtype=np.float64)
        b = np.array(other.rows, dtype=np.float64)
        return bool(np.array_equal(a, b, equal_nan=True))


def _fmt(name, v):
    if name in _INT_COLUMNS:
        return str(int(v))
    return "%.17g" % v


def export(traj: Trajectory, fmt: str, path) -> None:
    path = Path(path)
    fmt = fmt.lower()
    try:
        if fmt == "csv":
            with open(path, "w", newline="") as fh:
                fh.write(",".join(COLUMNS) + "\n")
                for r in traj.rows:
                    fh.write(",".join(_fmt(c, v) for c, v in zip(COLUMNS, r)) + "\n")
        elif fmt == "json":
            rows = [{c: (None if isinstance(v, float) and math.isnan(v) else v)
                     for c, v in zip(COLUMNS, r)} for r in traj.rows]
            with open(path, "w") as fh:
                json.dump(rows, fh)
        else:
            raise ValueError(f"unknown trajectory format {fmt!r}")
    except OSError as exc:
        raise TelemetryError(f"cannot write trajectory to {path}: {exc.strerror or exc}") from exc


def read_csv(path) -> Trajectory:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        traj = Trajectory()
        for row in reader:
            traj.record(*[int(v) if c in _INT_COLUMNS else float(v) for c, v in zip(COLUMNS, row)])
    return traj


def read_json(path) -> Trajectory:
    with open(path) as fh:
        rows = json.load(fh)
    traj = Trajectory()
    for r in rows:
        traj.record(**{c: (math.nan if r[c] is None else r[c]) for c in COLUMNS})
    return traj
