"""Benchmark the compiled series kernel against the pure-Python fallback.

Both kernels expose the same mul_terms(a_terms, b_terms, cap) interface;
this script times the sparse Cauchy product on generating-function data
of realistic shape and prints the speedup. Run it from the repository
root:

    python3 benchmarks/bench_kernels.py [--degree N] [--max-level L]
"""
import argparse
import time
from fractions import Fraction

from bigphase import _series_fallback
from bigphase.model import build_point_genfun
from bigphase.series import KERNEL_NAME, VarWindow

try:
    from bigphase import _series_kernel
except ImportError:
    _series_kernel = None


def bench(kernel, a, b, cap, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = kernel.mul_terms(a, b, cap)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--degree", type=int, default=5)
    parser.add_argument("--max-level", type=int, default=7)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    window = VarWindow(args.max_level, 1)
    genfun = build_point_genfun(window, args.degree, shift_t00=Fraction(1))
    a = genfun.F0.terms
    b = genfun.F1.terms
    cap = genfun.F0.valid_order
    print(f"active kernel: {KERNEL_NAME}")
    print(f"operands: {len(a)} x {len(b)} terms, degree cap {cap}")

    t_pure, r_pure = bench(_series_fallback, a, b, cap, args.repeats)
    print(f"pure python : {t_pure:8.3f} s  ({len(r_pure)} result terms)")
    if _series_kernel is None:
        print("compiled kernel not built; install with Cython available")
        return
    t_c, r_c = bench(_series_kernel, a, b, cap, args.repeats)
    print(f"compiled    : {t_c:8.3f} s  ({len(r_c)} result terms)")
    assert r_pure == r_c, "kernels disagree"
    print(f"speedup     : {t_pure / t_c:8.2f}x (results identical)")


if __name__ == "__main__":
    main()
