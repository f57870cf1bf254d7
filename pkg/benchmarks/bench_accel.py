"""Timing comparison of the compiled kernels and their numpy fallbacks.

Run from the repository root:

    python3 benchmarks/bench_accel.py

Both code paths live in hhalf._accel, so the comparison runs in one
process; set HHALF_NO_NUMBA=1 to confirm the package works (more
slowly) without a compiler.  The two paths sum in different orders,
so agreement is asserted to rounding, not bit for bit.
"""

import time

import numpy as np

from hhalf import _accel

repeats = 5


def best_of(fn, *args):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn(*args)
        times.append(time.perf_counter() - start)
    return min(times), result


def bench_synth_at():
    rng = np.random.default_rng(0)
    n = 64
    c = rng.standard_normal(2 * n + 1) + 1j * rng.standard_normal(2 * n + 1)
    x = rng.uniform(0.0, 2.0 * np.pi, 20000)
    fast, value = best_of(_accel.synth_at, c, n, x)
    slow, reference = best_of(_accel.synth_at_reference, c, n, x)
    err = np.max(np.abs(value - reference)) / np.max(np.abs(reference))
    print("synth_at          n=%d, %d points" % (n, x.size))
    print("  active   %.4f s" % fast)
    print("  fallback %.4f s  (x%.1f)" % (slow, slow / fast))
    print("  relative disagreement %.2e" % err)
    assert err < 1e-12


def bench_douglas_pair():
    rng = np.random.default_rng(1)
    m = 2048
    fx = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    fy = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    tx = 2.0 * np.pi * np.arange(m) / m + 1e-3
    ty = tx + np.pi / m
    fast, value = best_of(_accel.douglas_pair_sum, fx, fy, tx, ty)
    slow, reference = best_of(_accel.douglas_pair_reference, fx, fy, tx, ty)
    err = abs(value - reference) / abs(reference)
    print("douglas_pair_sum  m=%d (%d pairs)" % (m, m * m))
    print("  active   %.4f s" % fast)
    print("  fallback %.4f s  (x%.1f)" % (slow, slow / fast))
    print("  relative disagreement %.2e" % err)
    assert err < 1e-12


if __name__ == "__main__":
    print("numba active: %s" % _accel.NUMBA_AVAILABLE)
    bench_synth_at()
    bench_douglas_pair()
