"""Time the numba kernels against their numpy fallbacks.

Usage: ``python benchmarks/bench_kernels.py [--repeat 5]``. The first numba
call (compilation) is excluded from the timings.
"""

import argparse
import time

import numpy as np

from paralab import kernels


def best_time(fn, args, repeat):
    fn(*args)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    c = lambda n: rng.standard_normal(n) + 1j * rng.standard_normal(n)
    for N in (256, 1024):
        table = np.ascontiguousarray((rng.random((N, N)) < 0.3).astype(np.float64))
        F, G = c(N), c(N)
        yield f"bilinear_forward N={N}", "bilinear_forward", (table, F, G)
        yield f"bilinear_adjoint_f N={N}", "bilinear_adjoint_f", (table, F, G)
    for rows, n in ((1024, 12), (4096, 12)):
        vals = np.ascontiguousarray(rng.standard_normal((rows, n)) + 1j * rng.standard_normal((rows, n)))
        yield f"variation_dp {rows}x{n}", "variation_dp", (vals, 2.5)
    for n in (4096, 65536):
        yield f"maximal n={n}", "maximal", (np.abs(rng.standard_normal(n)),)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<28}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for label, name, data in cases(rng):
        t_np = best_time(getattr(kernels, name + "_np"), data, args.repeat)
        t_nb = best_time(getattr(kernels, name + "_nb"), data, args.repeat)
        assert np.allclose(getattr(kernels, name + "_np")(*data), getattr(kernels, name + "_nb")(*data))
        print(f"{label:<28}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
