"""Benchmark the compiled first-return-time kernel against the NumPy fallback.

Usage: python benchmarks/bench_kernels.py [n_samples]
"""

import sys
import time

import numpy as np

from walkgossip import _kernels
from walkgossip.graph import build_topology, metropolis_hastings
from walkgossip.rng import seed_sequence


def bench(kind, V, n_samples):
    P = metropolis_hastings(build_topology(kind, V))
    indptr, cols, cums = _kernels.compress_rows(P.entries)
    print(f"{kind}-{V}, {n_samples:,} excursions:")
    times = {}
    for name, module in _kernels.backends():
        t0 = time.perf_counter()
        out = _kernels.sample_first_return_times(
            indptr, cols, cums, 0, n_samples, 100_000,
            seed_sequence(0, "bench"), module=module)
        dt = time.perf_counter() - t0
        times[name] = dt
        rate = out[out > 0].sum() / dt / 1e6
        print(f"  {name:9s} {dt:8.3f}s   mean={out[out > 0].mean():.3f}   "
              f"{rate:7.1f}M steps/s")
    if "compiled" in times and "fallback" in times:
        print(f"  speedup   {times['fallback'] / times['compiled']:8.1f}x")


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 1_000_000
    print(f"active backend: {_kernels.backend_name()}")
    bench("complete", 20, n)
    bench("cycle", 10, n)
    bench("cycle", 64, max(n // 10, 1))


if __name__ == "__main__":
    main()
