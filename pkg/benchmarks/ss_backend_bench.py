"""Compare the compiled scatterer-scatterer kernel with the pure-Python
fallback: identical draw streams, wall-clock timings, and the speedup.

Usage: python3 benchmarks/ss_backend_bench.py [--iterations N]
"""

import argparse
import math
import time

import numpy as np

from qdcsim import _sspure

try:
    from qdcsim import _sskernel
except ImportError:
    _sskernel = None

LAMBDA_SOURCE = 1e6
DELTA_OMEGA = 2 * math.pi * 1e9
TAU_RESET = 1e-6
WINDOW = 1.0
SEED = 20260814


def run(module, n):
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    times = module.run_ss_batch(rng, LAMBDA_SOURCE, DELTA_OMEGA, TAU_RESET,
                                WINDOW, n)
    return times, time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--iterations", type=int, default=5000)
    args = parser.parse_args()
    n = args.iterations

    pure_times, pure_dt = run(_sspure, n)
    ok = pure_times[~np.isnan(pure_times)]
    print(f"regime: lambda={LAMBDA_SOURCE:g}/s  domega={DELTA_OMEGA:g}/s  "
          f"tau_reset={TAU_RESET:g}s  iterations={n}")
    print(f"pure python : {pure_dt:8.3f}s  ({n / pure_dt:8.1f} it/s)  "
          f"successes={ok.size}")

    if _sskernel is None:
        print("compiled    : not built (pip install -e . rebuilds it)")
        return

    kern_times, kern_dt = run(_sskernel, n)
    match = np.array_equal(pure_times, kern_times, equal_nan=True)
    print(f"compiled    : {kern_dt:8.3f}s  ({n / kern_dt:8.1f} it/s)  "
          f"streams identical: {match}")
    print(f"speedup     : {pure_dt / kern_dt:8.1f}x")
    if not match:
        raise SystemExit("backend draw streams diverged")


if __name__ == "__main__":
    main()
