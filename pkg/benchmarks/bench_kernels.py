"""Benchmark the numba kernels against their pure-numpy fallbacks.

Run as ``python benchmarks/bench_kernels.py``.  Imports both flavours
from the same process, warms the JIT, and reports best-of-5 wall times.
With ``MINPINV_DISABLE_NUMBA=1`` only the numpy column is produced.
"""

import time

import numpy as np

from minpinv import _kernels
from minpinv.experiments import build_poisson
from minpinv.linalg import svd


def best_of(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    rng = np.random.default_rng(0)

    problem = build_poisson(199, 201, 0.1)
    factors = svd(problem.matrix)
    sigma = _kernels.as_kernel_array(factors.sigma)
    coeffs = factors.u.T @ problem.exact_rhs
    v_sq = _kernels.as_kernel_array(coeffs[: len(sigma)] ** 2)
    top = 27.0 / 16.0 * float(sigma[0]) ** 4

    t_batch = _kernels.as_kernel_array(rng.uniform(0.0, 27.0 / 16.0, 1_000_000))
    levels = _kernels.as_kernel_array(np.linspace(0.0, 1.05 * top, 10_000))
    x_grid = _kernels.as_kernel_array(np.linspace(-1.0, 1.0, 1991))
    y_grid = _kernels.as_kernel_array(np.linspace(-1.0, 1.0, 2001))

    cases = [
        ("quartic_roots (1e6 values)",
         lambda f: f(t_batch),
         _kernels.quartic_roots_numba, _kernels.quartic_roots_numpy),
        ("discrepancy grid (1e4 x 199)",
         lambda f: f(sigma, v_sq, levels),
         _kernels.discrepancy_head_sq_grid_numba,
         _kernels.discrepancy_head_sq_grid_numpy),
        ("spectrum distance grid (1e4 x 199)",
         lambda f: f(sigma, levels),
         _kernels.spectrum_distance_sq_grid_numba,
         _kernels.spectrum_distance_sq_grid_numpy),
        ("poisson kernel fill (1991 x 2001)",
         lambda f: f(x_grid, y_grid, 0.1),
         _kernels.poisson_kernel_numba, _kernels.poisson_kernel_numpy),
    ]

    print(f"numba available and active: {_kernels.USING_NUMBA}")
    print(f"{'kernel':40s} {'numpy':>10s} {'numba':>10s} {'speedup':>9s}")
    for name, call, jit_fn, np_fn in cases:
        t_np = best_of(lambda: call(np_fn))
        if jit_fn is not None:
            call(jit_fn)  # JIT warmup
            t_jit = best_of(lambda: call(jit_fn))
            print(f"{name:40s} {t_np:9.4f}s {t_jit:9.4f}s {t_np / t_jit:8.1f}x")
        else:
            print(f"{name:40s} {t_np:9.4f}s {'-':>10s} {'-':>9s}")


if __name__ == "__main__":
    main()
