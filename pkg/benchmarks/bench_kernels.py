"""Time the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--cells N] [--repeat R]
"""

import argparse
import timeit

import numpy as np

from germsolver import _kernels_py, flux, kernels


def cases(n):
    fl, fr = flux.bell(1.0), flux.bell(2.0)
    xl, yl, xr, yr = (np.ascontiguousarray(a) for a in (fl.u, fl.f, fr.u, fr.f))
    ax = np.array([0.0, 0.5, 1.0])
    af = np.array([0.0, 0.5, 1.0])
    u = np.random.default_rng(0).random(n)
    out = np.empty_like(u)
    half = n // 2
    return {
        "fv_step": lambda m: m.fv_step(u, out, xl, yl, xr, yr, half, 0.3, 0.1, 0, 1.0, 2.0),
        "parabolic_step": lambda m: m.parabolic_step(u, out, xl, yl, xr, yr, ax, af, ax, af,
                                                     half, 0.2, 0.2, 0.1, 0, 1.0, 2.0),
        "rk4_profile": lambda m: m.rk4_profile(xl, yl, 0.1, 0.5, 1e-3, 20_000, 0.0, 1.0, -1.0, 0.0),
    }


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--cells", type=int, default=800)
    p.add_argument("--repeat", type=int, default=200)
    args = p.parse_args()
    if kernels.BACKEND != "cython":
        print("compiled extension not available; only the fallback would run")
        return
    print(f"{'kernel':<16}{'compiled [us]':>15}{'fallback [us]':>15}{'speedup':>10}")
    for name, fn in cases(args.cells).items():
        reps = 5 if name == "rk4_profile" else args.repeat
        fast = min(timeit.repeat(lambda: fn(kernels), number=reps, repeat=3)) / reps
        slow = min(timeit.repeat(lambda: fn(_kernels_py), number=reps, repeat=3)) / reps
        print(f"{name:<16}{fast * 1e6:>15.1f}{slow * 1e6:>15.1f}{slow / fast:>10.1f}")


if __name__ == "__main__":
    main()
