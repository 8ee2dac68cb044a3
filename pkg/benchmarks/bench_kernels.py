"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel is warmed up once (so compilation is excluded) and the best of
``--repeat`` runs is reported, along with the max deviation between the two
backends' outputs.
"""
import argparse
import time

import numpy as np

from bregman_margin import fixture_four_point, kernels
from bregman_margin.data import SpheresConfig, gen_spheres


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases():
    rng = np.random.default_rng(0)
    Z4 = np.ascontiguousarray(fixture_four_point().Z)
    Zbig = rng.uniform(-1, 1, (2000, 16))
    theta = rng.standard_normal(16) * 0.1
    A = np.eye(2)
    ds, _, mu = gen_spheres(SpheresConfig(seed=0))
    Zs = np.ascontiguousarray(ds.Z)
    phi = 2 * np.pi * np.arange(100_000) / 100_000
    U = np.column_stack([np.cos(phi), np.sin(phi)])
    w = rng.standard_normal(8)
    X = rng.standard_normal((60, 8))
    Zsvm = np.ascontiguousarray(X * np.sign(X @ w)[:, None] + 0.2 * w)
    return [
        ("exp_loss_grad n=2000 d=16 (x200)",
         lambda k: [k.exp_loss_grad(Zbig, theta) for _ in range(200)][-1][1]),
        ("bppa_inner fixture, 128 fixed steps (x100)",
         lambda k: [k.bppa_inner(Z4, A, np.zeros(2), 1.0, 0.2, 128, -1.0, 30) for _ in range(100)][-1][0]),
        ("bppa_inner spheres, tol 1e-10 (x100)",
         lambda k: [k.bppa_inner(Zs, A, mu, 5.0, 1.0, 100_000, 1e-10, 30) for _ in range(100)][-1][0]),
        ("grid_min_margins 1e5 directions",
         lambda k: k.grid_min_margins(U, Z4)),
        ("dual_coordinate_ascent n=60 d=8",
         lambda k: k.dual_coordinate_ascent(Zsvm, 1_000_000, 1e-9)[0]),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = kernels.implementations()
    if "numba" not in impls:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'kernel':45s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s} {'max dev':>9s}")
    for name, fn in cases():
        t_np, out_np = best_of(lambda: fn(impls["numpy"]), args.repeat)
        t_nb, out_nb = best_of(lambda: fn(impls["numba"]), args.repeat)
        dev = float(np.max(np.abs(np.asarray(out_np) - np.asarray(out_nb))))
        print(f"{name:45s} {t_np * 1e3:8.2f}ms {t_nb * 1e3:8.2f}ms {t_np / t_nb:7.1f}x {dev:9.1e}")


if __name__ == "__main__":
    main()
