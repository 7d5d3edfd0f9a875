"""Time every hot kernel under the numba and pure-numpy backends.

    python benchmarks/bench_kernels.py [--repeats 7]

Inputs are sized like the default scenario (roads of ~500 samples, K=6).
The first numba call per kernel compiles and is excluded from the timings.
"""

import argparse
import itertools
import time

import numpy as np

from roadloc import kernels


def make_inputs(rng):
    k, n = 6, 500
    g = np.cumsum(rng.normal(0, 0.3, (n, k)), axis=0) * 0.01
    centered = g - g.mean(axis=0)
    zero = np.zeros((1, k))
    s1 = np.concatenate([zero, np.cumsum(centered, axis=0)])
    s2 = np.concatenate([zero, np.cumsum(centered**2, axis=0)])
    bounds = np.arange(n + 1, dtype=np.int64)

    codes = rng.integers(0, 8, (2000, 30)).astype(np.int64)
    radices = np.full(30, 8, dtype=np.int64)
    labels = rng.integers(0, 4, 2000).astype(np.int64)
    subsets = np.array(list(itertools.combinations(range(30), 3)), dtype=np.int64)

    rsrp = -80 + np.cumsum(rng.normal(0, 0.5, (n, k)), axis=0)
    grad = np.diff(rsrp, axis=0)

    pts = rng.uniform(0, 600, (2000, 2))
    omega = rng.normal(0, 0.05, (256, 2))
    phase = rng.uniform(0, 2 * np.pi, 256)

    coeffs = rng.normal(0, 1, (k, 4))
    t = np.linspace(0, 1, 1001)
    o = rng.normal(0, 1, k)
    pred = rng.normal(-80, 10, (18000, k))
    return {
        "bottom_up_merge": (s1, s2, bounds, 10, 1.5, 0, False),
        "subset_gains": (codes, radices, labels, 4, subsets),
        "sliding_features": (rsrp, grad, 10),
        "shadow_field": (pts, omega, phase),
        "poly_residuals": (coeffs, t, o),
        "scan_residuals": (pred, o),
    }


def best_of(fn, args, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times) * 1e3


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=7)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    inputs = make_inputs(np.random.default_rng(args.seed))
    np_mod = kernels.backend("numpy")
    try:
        nb_mod = kernels.backend("numba")
    except RuntimeError:
        nb_mod = None
    print(f"{'kernel':<18}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, a in inputs.items():
        t_np = best_of(getattr(np_mod, name), a, args.repeats)
        if nb_mod is None:
            print(f"{name:<18}{t_np:>12.3f}{'n/a':>12}{'':>10}")
            continue
        fn = getattr(nb_mod, name)
        ref, got = np_mod.__dict__[name](*a), fn(*a)  # also compiles
        if not np.allclose(ref, got, rtol=1e-9, atol=1e-9):
            raise SystemExit(f"{name}: backends disagree")
        t_nb = best_of(fn, a, args.repeats)
        print(f"{name:<18}{t_np:>12.3f}{t_nb:>12.3f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
