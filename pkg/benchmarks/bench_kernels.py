"""Compiled versus numpy kernels on the oscillation sum over modes and durations.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from quenchbat import _kernels_py

try:
    from quenchbat import _kernels
except ImportError:
    _kernels = None

CASES = [(300, 2000), (3000, 2000), (30000, 500), (100, 20000)]


def inputs(n, nt, seed=0):
    r = np.random.default_rng(seed)
    return r.uniform(0, 1, n), r.uniform(0.1, 3, n), np.linspace(0, 200, nt)


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    print(f"{'modes':>7} {'taus':>7} {'numpy [s]':>11} {'cython [s]':>11} {'speed-up':>9} {'max rel diff':>13}")
    for n, nt in CASES:
        g, omega, taus = inputs(n, nt)
        t_py = best_of(lambda: _kernels_py.oscillation_sum(g, omega, taus), args.repeat)
        if _kernels is None:
            print(f"{n:7d} {nt:7d} {t_py:11.4f} {'n/a':>11} {'n/a':>9} {'n/a':>13}")
            continue
        t_cy = best_of(lambda: _kernels.oscillation_sum(g, omega, taus), args.repeat)
        a = _kernels.oscillation_sum(g, omega, taus)
        b = _kernels_py.oscillation_sum(g, omega, taus)
        diff = np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))
        print(f"{n:7d} {nt:7d} {t_py:11.4f} {t_cy:11.4f} {t_py / t_cy:9.1f} {diff:13.1e}")


if __name__ == "__main__":
    main()
