"""Benchmark the jit-compiled kernels against the pure-numpy fallback.

Run without SPECCOV_NO_NUMBA set so the jit path is exported; the numpy
implementations are always importable, so one run compares both on
identical inputs:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from speccov import _kernels


def _time(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    print(f"numba kernels enabled: {_kernels.NUMBA_ENABLED}")
    if not _kernels.NUMBA_ENABLED:
        print("jit path not exported (flag set or numba missing); "
              "timing the numpy path only")

    print("\nprobe_cf (all pairwise probe frequencies)")
    print(f"{'n':>8} {'p':>5} {'numpy':>10} {'jit':>10} {'speedup':>8}")
    for n, p in [(1_000, 20), (10_000, 20), (10_000, 100), (100_000, 50)]:
        Y = rng.standard_normal((n, p))
        t_np = _time(_kernels._probe_cf_numpy, Y, 1.0)
        if _kernels.NUMBA_ENABLED:
            _kernels.probe_cf(Y, 1.0)  # compile outside the timing
            t_jit = _time(_kernels.probe_cf, Y, 1.0)
            print(f"{n:>8} {p:>5} {t_np:>10.4f} {t_jit:>10.4f} "
                  f"{t_np / t_jit:>8.2f}")
        else:
            print(f"{n:>8} {p:>5} {t_np:>10.4f} {'':>10} {'':>8}")

    print("\necf (empirical characteristic function on a frequency batch)")
    print(f"{'n':>8} {'p':>5} {'m':>6} {'numpy':>10} {'jit':>10} {'speedup':>8}")
    for n, p, m in [(1_000, 10, 256), (10_000, 10, 1024), (100_000, 5, 512)]:
        Y = rng.standard_normal((n, p))
        F = rng.standard_normal((m, p))
        t_np = _time(_kernels._ecf_numpy, Y, F)
        if _kernels.NUMBA_ENABLED:
            _kernels.ecf(Y, F)
            t_jit = _time(_kernels.ecf, Y, F)
            print(f"{n:>8} {p:>5} {m:>6} {t_np:>10.4f} {t_jit:>10.4f} "
                  f"{t_np / t_jit:>8.2f}")
        else:
            print(f"{n:>8} {p:>5} {m:>6} {t_np:>10.4f} {'':>10} {'':>8}")


if __name__ == "__main__":
    main()
