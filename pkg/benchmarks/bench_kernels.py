"""Benchmark the compiled Monte Carlo kernels against the numpy fallback.

Run:  python3 benchmarks/bench_kernels.py [n_paths]

Both backends must produce bit-identical results; the benchmark asserts that
while timing them, for the bridge-functional kernel and the first-passage
kernel, single-threaded and with 4 threads.
"""

from __future__ import annotations

import os
import sys
import time

import numpy as np

import hitlab
from hitlab import MCConfig, PolyBoundary, hitting_time_histogram, v_mc_estimate


def timed(fn):
    t0 = time.perf_counter()
    result = fn()
    return result, time.perf_counter() - t0


def bench(n_paths: int) -> None:
    f = PolyBoundary([0.0, 0.0, 0.5])
    cfg = MCConfig(f=f, t=0.0, x=1.0, s=1.0,
                   n_paths=n_paths, n_steps=500, seed=2024)
    rows = []
    for threads in ("1", "4"):
        os.environ["HITLAB_THREADS"] = threads
        results = {}
        for backend in hitlab.available_backends():
            hitlab.set_backend(backend)
            est, dt_v = timed(lambda: v_mc_estimate(cfg))
            hist, dt_h = timed(lambda: hitting_time_histogram(
                1.0, 5.0, 1e-3, n_paths // 4, seed=2024))
            results[backend] = (est, hist, dt_v, dt_h)
            rows.append((backend, threads, n_paths / dt_v, (n_paths // 4) / dt_h))
        if len(results) == 2:
            (e1, h1, _, _), (e2, h2, _, _) = results["cython"], results["python"]
            assert e1 == e2, "backends disagree on the bridge functional"
            assert np.array_equal(h1.density, h2.density), "backends disagree on the histogram"
            print(f"threads={threads}: backends bit-identical "
                  f"(v = {e1.mean:.12g})")
    hitlab.set_backend(None)
    os.environ.pop("HITLAB_THREADS", None)

    print(f"\n{'backend':>8} {'threads':>7} {'bridge paths/s':>15} {'passage paths/s':>16}")
    for backend, threads, vps, hps in rows:
        print(f"{backend:>8} {threads:>7} {vps:>15,.0f} {hps:>16,.0f}")


if __name__ == "__main__":
    bench(int(sys.argv[1]) if len(sys.argv) > 1 else 20_000)
