"""Command line entry point: run / repro / oracle / bounds.

Configs are TOML documents; nested tables are flattened to dotted keys
(``schedule.kind``, ``solver.inner.k``) and every key is checked against
a fixed schema before anything runs.

Exit codes: 0 ok, 2 config or usage error, 3 infeasible problem,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import bounds as bnd
from .data import (DataError, Dataset, SpheresConfig, empirical_covariance, fixture_four_point,
                   gen_spheres, gen_tightness, load_csv, load_json)
from .linalg import LinalgError, NormSpec, as_spd, spd_inverse
from .oracle import OracleError, max_margin
from .potentials import QuadraticPotential, convexity_profile
from .solvers import (Constant, ConstantCappedMD, FixedSteps, InnerSolveError, NotSeparableError,
                      ScheduleError, ToleranceStop, VaryingBPPA, VaryingMD, run)
from .telemetry import TelemetryError, export

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


class Infeasible(RuntimeError):
    pass


# -- config -------------------------------------------------------------------

# key -> (type check, default); a default of REQUIRED must be given
REQUIRED = object()
_NUM = (int, float)
SCHEMA = {
    "dataset.kind": (str, REQUIRED),
    "dataset.path": (str, None),
    "dataset.m": (int, None),
    "dataset.n_labeled": (int, 2),
    "dataset.m_unlabeled": (int, 100),
    "dataset.d": (int, 2),
    "dataset.r": (_NUM, 0.8),
    "potential.kind": (str, "identity"),
    "potential.scale": (_NUM, 1.0),
    "potential.matrix": (list, None),
    "potential.divergence": (str, None),
    "norm.kind": (str, "l2"),
    "norm.matrix": (list, None),
    "algo": (str, REQUIRED),
    "schedule.kind": (str, "constant"),
    "schedule.eta": (_NUM, 1.0),
    "T": (int, REQUIRED),
    "solver.inner.mode": (str, "fixed"),
    "solver.inner.k": (int, 128),
    "solver.inner.step_scale": (_NUM, 0.2),
    "solver.inner.delta": (_NUM, 1e-10),
    "solver.inner.relative": (bool, True),
    "solver.inner.max_steps": (int, 100_000),
    "reference": (str, "auto"),
    "check_separable": (bool, True),
    "seed": (int, 0),
    "output.trajectory": (str, None),
    "output.format": (str, "csv"),
    "output.summary": (str, None),
}

_CHOICES = {
    "dataset.kind": ("fixture", "csv", "json", "spheres", "tightness"),
    "potential.kind": ("identity", "matrix", "spheres"),
    "potential.divergence": ("D1", "D2", "D3"),
    "norm.kind": ("l1", "l2", "linf", "mahalanobis", "potential"),
    "algo": ("md", "bppa"),
    "schedule.kind": ("constant", "constant_capped", "varying", "varying_capped"),
    "solver.inner.mode": ("fixed", "tolerance"),
    "reference": ("auto", "oracle", "mu"),
    "output.format": ("csv", "json"),
}


def flatten(doc: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in doc.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(flatten(v, key + "."))
        else:
            out[key] = v
    return out


def validate(flat: dict) -> dict:
    """Check keys, types and enum values; return the config with defaults filled in."""
    for key in flat:
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
    cfg = {}
    for key, (typ, default) in SCHEMA.items():
        if key not in flat:
            if default is REQUIRED:
                raise ConfigError(f"missing required config key {key!r}")
            cfg[key] = default
            continue
        v = flat[key]
        bad = isinstance(v, bool) and typ is not bool
        if bad or not isinstance(v, typ):
            raise ConfigError(f"config key {key!r} has wrong type {type(v).__name__}")
        if key in _CHOICES and v not in _CHOICES[key]:
            raise ConfigError(f"config key {key!r}: {v!r} not in {_CHOICES[key]}")
        cfg[key] = v

    kind = cfg["dataset.kind"]
    if kind in ("csv", "json") and not cfg["dataset.path"]:
        raise ConfigError("config key 'dataset.path' is required for csv/json datasets")
    if kind == "tightness" and (cfg["dataset.m"] is None or cfg["dataset.m"] < 1):
        raise ConfigError("config key 'dataset.m' must be a positive integer for tightness datasets")
    if cfg["potential.kind"] == "matrix" and cfg["potential.matrix"] is None:
        raise ConfigError("config key 'potential.matrix' is required for potential.kind = 'matrix'")
    if cfg["potential.kind"] == "spheres":
        if kind != "spheres":
            raise ConfigError("config key 'potential.kind' = 'spheres' needs dataset.kind = 'spheres'")
        if cfg["potential.divergence"] is None:
            raise ConfigError("config key 'potential.divergence' is required for spheres potentials")
    if cfg["norm.kind"] == "mahalanobis" and cfg["norm.matrix"] is None:
        raise ConfigError("config key 'norm.matrix' is required for norm.kind = 'mahalanobis'")
    if cfg["reference"] == "mu" and kind != "spheres":
        raise ConfigError("config key 'reference' = 'mu' needs dataset.kind = 'spheres'")
    if cfg["T"] < 0:
        raise ConfigError("config key 'T' must be non-negative")
    if cfg["seed"] < 0:
        raise ConfigError("config key 'seed' must be non-negative")
    if not cfg["potential.scale"] > 0:
        raise ConfigError("config key 'potential.scale' must be positive")
    return cfg


def load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return validate(flatten(doc))


def _matrix(value, key, d):
    try:
        A = np.array(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise ConfigError(f"config key {key!r} is not a numeric matrix") from None
    if A.shape != (d, d):
        raise ConfigError(f"config key {key!r} must be {d}x{d}, got shape {A.shape}")
    try:
        return as_spd(A)
    except LinalgError as exc:
        raise ConfigError(f"config key {key!r}: {exc}") from None


def build_dataset(cfg):
    """Returns (dataset, extras) where extras may hold 'mu' and 'unlabeled'."""
    kind = cfg["dataset.kind"]
    if kind == "fixture":
        return fixture_four_point(), {}
    if kind == "csv":
        return load_csv(cfg["dataset.path"]), {}
    if kind == "json":
        try:
            return load_json(cfg["dataset.path"]), {}
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DataError(f"{cfg['dataset.path']}: {exc}") from None
    if kind == "tightness":
        return gen_tightness(cfg["dataset.m"])[0], {}
    sc = SpheresConfig(cfg["dataset.n_labeled"], cfg["dataset.m_unlabeled"], cfg["dataset.d"],
                       float(cfg["dataset.r"]), cfg["seed"])
    ds, U, mu = gen_spheres(sc)
    return ds, {"mu": mu, "unlabeled": U}


def spheres_matrix(divergence: str, U) -> np.ndarray:
    d = U.shape[1]
    if divergence == "D1":
        return np.eye(d)
    S = empirical_covariance(U)
    return S if divergence == "D2" else spd_inverse(S)


def build_potential(cfg, ds, extras) -> QuadraticPotential:
    kind = cfg["potential.kind"]
    scale = float(cfg["potential.scale"])
    if kind == "identity":
        return QuadraticPotential.identity(ds.d, scale)
    if kind == "matrix":
        return QuadraticPotential(scale * _matrix(cfg["potential.matrix"], "potential.matrix", ds.d))
    return QuadraticPotential(scale * spheres_matrix(cfg["potential.divergence"], extras["unlabeled"]))


def build_norm(cfg, ds, P) -> NormSpec:
    kind = cfg["norm.kind"]
    if kind == "mahalanobis":
        return NormSpec.mahalanobis(_matrix(cfg["norm.matrix"], "norm.matrix", ds.d))
    if kind == "potential":
        return NormSpec.mahalanobis(P.A)
    return getattr(NormSpec, kind)()


def build_schedule(cfg):
    kind, eta = cfg["schedule.kind"], float(cfg["schedule.eta"])
    if kind == "constant":
        return Constant(eta)
    if kind == "constant_capped":
        return ConstantCappedMD(eta)
    if kind == "varying":
        return VaryingBPPA()
    return VaryingMD()


def build_inner(cfg):
    try:
        if cfg["solver.inner.mode"] == "fixed":
            return FixedSteps(cfg["solver.inner.k"], float(cfg["solver.inner.step_scale"]))
        return ToleranceStop(float(cfg["solver.inner.delta"]), float(cfg["solver.inner.step_scale"]),
                             cfg["solver.inner.max_steps"], cfg["solver.inner.relative"])
    except ValueError as exc:
        raise ConfigError(f"solver.inner: {exc}") from None


def _clean(v):
    return None if isinstance(v, float) and not math.isfinite(v) else v


def execute(cfg: dict):
    """Run one configured experiment; returns (trajectory, summary dict)."""
    ds, extras = build_dataset(cfg)
    P = build_potential(cfg, ds, extras)
    N = build_norm(cfg, ds, P)
    schedule = build_schedule(cfg)
    inner = build_inner(cfg)

    certificate = None
    if cfg["check_separable"]:
        certificate = max_margin(ds, N)
        if not certificate.feasible:
            raise Infeasible("dataset is not linearly separable")
    ref_kind = cfg["reference"]
    if ref_kind == "auto":
        ref_kind = "mu" if "mu" in extras else "oracle"
    if ref_kind == "mu":
        reference = extras["mu"]
    else:
        if certificate is None:
            certificate = max_margin(ds, N)
        reference = certificate.u_star if certificate.feasible else None

    traj = run(ds, P, N, cfg["algo"], schedule, cfg["T"], inner=inner, reference=reference,
               check_separable=False, certificate=certificate)
    fin = traj.final
    summary = {
        "final_loss": fin["loss"],
        "final_margin": _clean(fin["margin_N"]),
        "final_alignment": _clean(fin["alignment"]),
        "gamma_star": None if certificate is None else certificate.gamma_star,
        "T": cfg["T"],
        "algo": cfg["algo"],
    }
    return traj, {k: _clean(v) for k, v in summary.items()}


# -- repro --------------------------------------------------------------------

SYNTHETIC4 = (
    ("md_constant", "md", "constant"),
    ("md_varying", "md", "varying"),
    ("bppa_constant", "bppa", "constant"),
    ("bppa_varying", "bppa", "varying"),
)
SPHERE_SEEDS = tuple(range(8))
SPHERES_T = 2000
TIGHTNESS_M = (4, 9, 16, 25)


def _write_traj(traj, out: Path | None, name: str, fmt: str):
    if out is not None:
        export(traj, fmt, out / f"{name}.{fmt}")


def repro_synthetic4(out, fmt, T=1200):
    results = {}
    for name, algo, sched in SYNTHETIC4:
        cfg = validate({"dataset.kind": "fixture", "algo": algo, "T": T, "schedule.kind": sched,
                        "schedule.eta": 1.0})
        traj, summary = execute(cfg)
        _write_traj(traj, out, name, fmt)
        results[name] = summary
    return results


def _sphere_seed(args):
    seed, T = args
    aligns = {}
    trajs = {}
    for div in ("D1", "D2", "D3"):
        cfg = validate({"dataset.kind": "spheres", "seed": seed, "potential.kind": "spheres",
                        "potential.divergence": div, "algo": "bppa", "T": T,
                        "schedule.kind": "constant", "schedule.eta": 1.0, "reference": "mu"})
        traj, summary = execute(cfg)
        aligns[div] = summary["final_alignment"]
        trajs[div] = traj
    return seed, aligns, trajs


def repro_spheres(out, fmt, jobs=1, seeds=SPHERE_SEEDS, T=SPHERES_T):
    work = [(s, T) for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_sphere_seed, work))
    else:
        done = [_sphere_seed(w) for w in work]
    done.sort(key=lambda r: r[0])
    per_seed = []
    for seed, aligns, trajs in done:
        for div, traj in trajs.items():
            _write_traj(traj, out, f"spheres_seed{seed}_{div}", fmt)
        per_seed.append({"seed": seed, **aligns})
    means = {div: float(np.mean([r[div] for r in per_seed])) for div in ("D1", "D2", "D3")}
    return {"T": T, "per_seed": per_seed, "mean_alignment": means}


def tightness_ratio(m: int, T: int = 5000):
    """Final l1-normalized margin over the l1-ball optimum for MD with Quadratic(I/2)."""
    cfg = validate({"dataset.kind": "tightness", "dataset.m": m, "potential.kind": "identity",
                    "potential.scale": 0.5, "norm.kind": "l1", "algo": "md", "T": T,
                    "schedule.kind": "constant", "schedule.eta": 1.0})
    traj, summary = execute(cfg)
    return summary["final_margin"] / summary["gamma_star"], traj


def tightness_formula(m: int) -> float:
    return (2.0 - 1.0 / m) / (math.sqrt(m) - 1.0 / math.sqrt(m) + 1.0)


def repro_tightness(out, fmt, ms=TIGHTNESS_M, T=5000):
    rows = []
    for m in ms:
        ratio, traj = tightness_ratio(m, T)
        _write_traj(traj, out, f"tightness_m{m}", fmt)
        rows.append({"m": m, "ratio": ratio, "predicted": tightness_formula(m),
                     "ceiling": 2.0 / math.sqrt(m)})
    return {"T": T, "rows": rows}


# -- commands -----------------------------------------------------------------

def _dump(obj, path=None):
    text = json.dumps(obj, indent=2, allow_nan=False)
    if path:
        Path(path).write_text(text + "\n")
    print(text)


def cmd_run(args):
    cfg = load_config(args.config)
    traj, summary = execute(cfg)
    if cfg["output.trajectory"]:
        export(traj, cfg["output.format"], cfg["output.trajectory"])
    _dump(summary, cfg["output.summary"])
    return EXIT_OK


def cmd_repro(args):
    out = Path(args.out) if args.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    if args.name == "synthetic4":
        res = repro_synthetic4(out, args.format)
    elif args.name == "spheres":
        res = repro_spheres(out, args.format, jobs=args.jobs)
    else:
        res = repro_tightness(out, args.format)
    _dump(res, out / f"{args.name}_summary.json" if out else None)
    return EXIT_OK


def cmd_oracle(args):
    flat = {"dataset.kind": args.dataset, "algo": "md", "T": 0, "norm.kind": args.norm,
            "seed": args.seed}
    if args.path:
        flat["dataset.path"] = args.path
    if args.m is not None:
        flat["dataset.m"] = args.m
    if args.matrix:
        try:
            flat["norm.matrix"] = json.loads(args.matrix)
        except json.JSONDecodeError:
            raise ConfigError("--matrix must be a JSON array of rows") from None
    if args.norm == "potential":
        raise ConfigError("--norm potential is only meaningful in run configs")
    cfg = validate(flat)
    ds, _ = build_dataset(cfg)
    N = build_norm(cfg, ds, None)
    cert = max_margin(ds, N)
    if not cert.feasible:
        print("infeasible: dataset is not linearly separable", file=sys.stderr)
        _dump({"feasible": False, "gamma_star": 0.0, "u_star": None, "norm": N.kind})
        return EXIT_INFEASIBLE
    _dump({"feasible": True, "gamma_star": cert.gamma_star, "u_star": cert.u_star.tolist(),
           "norm": N.kind, "method": cert.method})
    return EXIT_OK


def cmd_bounds(args):
    b = bnd.BoundInputs(args.gamma, args.mu_w, args.L_w, args.mu_2, args.D_dual, args.D_2,
                        args.eta, args.eps)
    curve = []
    for t in args.t:
        if b.gamma * b.eta * t > 1.0:
            curve.append({"t": t, "loss_bound": bnd.loss_upper_bound_const(b.gamma, b.eta, b.L_w, t)})
    res = {
        "loss_bound": curve,
        "margin_floor": bnd.margin_floor(b.gamma, b.mu_w, b.L_w),
        "beta": bnd.contraction_beta(args.alpha, b.gamma, b.L_w),
        "t0": {r: _clean(bnd.t0_estimates(b, r)) for r in bnd.REGIMES},
    }
    if b.D_dual > 0:
        res["beta_lower"] = bnd.contraction_beta_lower(args.alpha, b.D_dual, b.mu_w)
    _dump(res)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser():
    p = _Parser(prog="bregman-margin", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run one experiment from a TOML config")
    r.add_argument("config")
    r.set_defaults(func=cmd_run)

    rp = sub.add_parser("repro", help="reproduce a packaged experiment")
    rp.add_argument("name", choices=("synthetic4", "spheres", "tightness"))
    rp.add_argument("--out", help="directory for trajectories and the summary")
    rp.add_argument("--format", choices=("csv", "json"), default="csv")
    rp.add_argument("--jobs", type=int, default=1, help="worker processes (spheres only)")
    rp.set_defaults(func=cmd_repro)

    o = sub.add_parser("oracle", help="maximum-margin classifier for a dataset and norm")
    o.add_argument("--dataset", default="fixture", choices=_CHOICES["dataset.kind"])
    o.add_argument("--path")
    o.add_argument("--m", type=int)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--norm", default="l2", choices=_CHOICES["norm.kind"])
    o.add_argument("--matrix", help="JSON matrix for the mahalanobis norm")
    o.set_defaults(func=cmd_oracle)

    b = sub.add_parser("bounds", help="evaluate the closed-form bounds")
    b.add_argument("--gamma", type=float, required=True)
    b.add_argument("--eta", type=float, default=1.0)
    b.add_argument("--L-w", dest="L_w", type=float, default=1.0)
    b.add_argument("--mu-w", dest="mu_w", type=float, default=None)
    b.add_argument("--mu-2", dest="mu_2", type=float, default=1.0)
    b.add_argument("--D-dual", dest="D_dual", type=float, default=1.0)
    b.add_argument("--D-2", dest="D_2", type=float, default=1.0)
    b.add_argument("--eps", type=float, default=0.1)
    b.add_argument("--alpha", type=float, default=1.0)
    b.add_argument("--t", type=float, nargs="+", default=[10, 100, 1000])
    b.set_defaults(func=cmd_bounds)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "cmd", None) == "bounds" and args.mu_w is None:
            args.mu_w = args.L_w
        return args.func(args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (ConfigError, ScheduleError, DataError, TelemetryError, bnd.BoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (Infeasible, NotSeparableError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InnerSolveError, OracleError, LinalgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
