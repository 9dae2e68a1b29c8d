"""Time the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from polylab import _fallback

try:
    from polylab import _accel
except ImportError:
    _accel = None


def cases():
    rng = np.random.default_rng(0)
    for n in (50, 200, 800):
        x = np.ascontiguousarray(rng.normal(size=(n, 3)))
        yield f"riesz_energy_grad N={n}", "riesz_energy_grad", (x, 1.0)
    pos = np.ascontiguousarray(rng.normal(size=(4, 3)))
    q = np.ascontiguousarray(rng.uniform(0.5, 2, 4))
    for t in (512, 4096):
        y = np.ascontiguousarray(rng.normal(size=(t, 3)) * 2)
        yield f"coulomb_grad_hess {t} points", "coulomb_grad_hess", (y, pos, q, 1.0)
    for deg in (20, 80):
        c = np.ascontiguousarray(rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1))
        z0 = np.ascontiguousarray(1.2 * np.exp(2j * np.pi * (np.arange(deg) + 0.25) / deg))
        yield f"aberth degree {deg}", "aberth", (c, z0, 500, 1e-15)


def best_time(fn, args, repeat):
    timer = timeit.Timer(lambda: fn(*args))
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if _accel is None:
        print("compiled extension not built; timing the fallback only")
    print(f"{'kernel':32s} {'numpy (ms)':>12s} {'compiled (ms)':>14s} {'speedup':>8s}")
    for label, name, call in cases():
        t_py = best_time(getattr(_fallback, name), call, args.repeat)
        if _accel is None:
            print(f"{label:32s} {1e3 * t_py:12.3f} {'-':>14s} {'-':>8s}")
            continue
        t_c = best_time(getattr(_accel, name), call, args.repeat)
        print(f"{label:32s} {1e3 * t_py:12.3f} {1e3 * t_c:14.3f} {t_py / t_c:8.1f}")


if __name__ == "__main__":
    main()
