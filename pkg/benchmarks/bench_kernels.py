"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--cutoff 40] [--repeat 5]

Prints one line per kernel and an end-to-end character expansion timed
under both backends (TAKIFF_KERNELS=numpy selects the fallback).
"""
import argparse
import os
import time

import numpy as np

from takiff import _kernels as K
from takiff.affine import AffWeight
from takiff.algebra import LevelPair
from takiff.characters import typical_character
from takiff.rational import Q


def best(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--cutoff", type=int, default=40)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    rng = np.random.default_rng(0)
    cut = args.cutoff
    a = rng.integers(-50, 50, (2 * cut + 1, cut + 1))
    b = rng.integers(-50, 50, (2 * cut + 1, cut + 1))
    base = rng.integers(-50, 50, (2 * cut + 5, cut + 1))

    def inplace(fn, extra):
        def go():
            x = base.copy()
            for dq in range(1, cut + 1):
                fn(x, *extra(dq))
        return go

    cases = [
        ("conv", lambda f: lambda: f(a, b, cut)),
        ("binomial", lambda f: inplace(f, lambda dq: (1, 1, dq))),
        ("geometric", lambda f: inplace(f, lambda dq: (dq,))),
    ]
    K._conv_nb(a[:2, :2], b[:2, :2], 1)       # compile outside the timings
    K._binomial_nb(base.copy(), 1, 1, 1)
    K._geometric_nb(base.copy(), 1)
    print(f"{'kernel':<12}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, make in cases:
        t_np = best(make(getattr(K, f"_{name}_np")), args.repeat)
        t_nb = best(make(getattr(K, f"_{name}_nb")), args.repeat)
        print(f"{name:<12}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>10.1f}")

    w = AffWeight(Q(1, 3), Q(2, 5), Q(-1, 2), Q(1, 7), LevelPair(Q(3, 2), Q(-5, 7)))
    res = {}
    for name in ("numpy", "numba"):
        if name == "numpy":
            os.environ["TAKIFF_KERNELS"] = "numpy"
        else:
            os.environ.pop("TAKIFF_KERNELS", None)
        typical_character(w, 4, True)
        res[name] = best(lambda: typical_character(w, cut // 2, True), args.repeat)
    print(f"{'character':<12}{1e3 * res['numpy']:>12.2f}{1e3 * res['numba']:>12.2f}"
          f"{res['numpy'] / res['numba']:>10.1f}   (typical sch, cutoff {cut // 2})")


if __name__ == "__main__":
    main()
