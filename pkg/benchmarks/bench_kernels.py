"""Time the numba and numpy backends of the variate kernels.

Usage: python3 benchmarks/bench_kernels.py [--n 200000] [--repeat 5]

Each kernel is warmed up once per backend (so JIT compilation is excluded)
and the best of ``--repeat`` runs is reported.
"""
import argparse
import time

import numpy as np

from hougaard import _kernels as K


def cases(n):
    tau_small = np.full(n, 0.5)
    tau_large = np.full(n, 50.0)
    return {
        "inverse_gaussian": lambda g: K.inverse_gaussian(g, np.full(n, 2.0), np.full(n, 3.0)),
        "positive_stable a=0.5": lambda g: K.positive_stable(g, 0.5, n),
        "tilted_stable naive": lambda g: K.tilted_stable(g, 0.5, tau_small),
        "tilted_stable double rejection": lambda g: K.tilted_stable(g, 0.5, tau_large),
        "cms_stable a=1.5": lambda g: K.cms_stable(g, 1.5, 0.5, n),
        "compound_poisson_gamma": lambda g: K.compound_poisson_gamma(g, np.full(n, 3.0), 2.0, np.full(n, 0.5)),
    }


def best_time(fn, repeat):
    best = np.inf
    for r in range(repeat):
        g = np.random.Generator(np.random.PCG64(r))
        t0 = time.perf_counter()
        fn(g)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not installed")
    old = K.backend()
    results = {}
    try:
        for name in ("numba", "numpy"):
            K.set_backend(name)
            for label, fn in cases(args.n).items():
                fn(np.random.Generator(np.random.PCG64(0)))
                results.setdefault(label, {})[name] = best_time(fn, args.repeat)
    finally:
        K.set_backend(old)
    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'kernel':34s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for label, t in results.items():
        print(f"{label:34s} {1e3 * t['numba']:10.2f} {1e3 * t['numpy']:10.2f} {t['numpy'] / t['numba']:8.2f}")


if __name__ == "__main__":
    main()
