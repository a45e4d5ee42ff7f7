"""Timing comparison of the compiled and pure-Python kernels.

Run as:  python benchmarks/compare_backends.py

Benchmarks the two hot paths behind the public API: the multistart
coordinate descent of the two-point ratio objective, and the
1e6-point certificate-gap scan.  Also cross-checks that both backends
return identical results before timing them.
"""

from __future__ import annotations

import time

import numpy as np

from hardylab import _kernels_py as python_kernels
from hardylab.numerics import OptConfig, multistart_points

try:
    from hardylab import _kernels as compiled_kernels
except ImportError:
    compiled_kernels = None


def time_call(fn, repeat: int = 5) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_descent(kernels) -> float:
    cases = [(1.5, 5.0 / 6.0, 2.0), (4.0, 0.75, 1.0), (2.5, 0.6, 10.0)]
    starts = multistart_points(OptConfig())

    def run():
        for p, g, lam in cases:
            for u0, v0 in starts:
                kernels.ratio_descent(p, g, lam, u0, v0, 1e-9, 1e-12, 100)

    return time_call(run)


def bench_scan(kernels, xs) -> float:
    def run():
        kernels.majorization_max(xs, 4.0, 1.0, 0.75, 3.0, -12.0, 1.0)
        kernels.majorization_max(xs, 4.0, 1.0, 0.75, 3.0, -12.0, -1.0)

    return time_call(run)


def main() -> None:
    if compiled_kernels is None:
        print("compiled backend not built; showing pure-Python timings only")
    xs = np.linspace(-100.0, 100.0, 10**6)

    if compiled_kernels is not None:
        rc = compiled_kernels.ratio_descent(1.5, 5.0 / 6.0, 2.0, -4.0, 0.0, 1e-9, 1e-12, 100)
        rp = python_kernels.ratio_descent(1.5, 5.0 / 6.0, 2.0, -4.0, 0.0, 1e-9, 1e-12, 100)
        assert rc == rp, f"backend mismatch in ratio_descent: {rc} vs {rp}"
        mc = compiled_kernels.majorization_max(xs, 4.0, 1.0, 0.75, 3.0, -12.0, 1.0)
        mp = python_kernels.majorization_max(xs, 4.0, 1.0, 0.75, 3.0, -12.0, 1.0)
        assert mc == mp, f"backend mismatch in majorization_max: {mc} vs {mp}"
        print("cross-check: backends agree bit-for-bit on both kernels")

    rows = []
    t_py = bench_descent(python_kernels)
    rows.append(("ratio_descent x75", t_py, None))
    if compiled_kernels is not None:
        t_c = bench_descent(compiled_kernels)
        rows[-1] = ("ratio_descent x75", t_py, t_c)

    t_py = bench_scan(python_kernels, xs)
    rows.append(("majorization 2x1e6", t_py, None))
    if compiled_kernels is not None:
        t_c = bench_scan(compiled_kernels, xs)
        rows[-1] = ("majorization 2x1e6", t_py, t_c)

    print(f"{'benchmark':22s} {'python':>10s} {'compiled':>10s} {'speedup':>8s}")
    for name, tp, tc in rows:
        if tc is None:
            print(f"{name:22s} {tp * 1e3:9.2f}ms {'-':>10s} {'-':>8s}")
        else:
            print(f"{name:22s} {tp * 1e3:9.2f}ms {tc * 1e3:9.2f}ms {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
