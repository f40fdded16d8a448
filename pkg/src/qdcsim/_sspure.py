"""Pure-Python fallback for the scatterer-scatterer Monte Carlo kernel.

Mirrors the compiled kernel draw for draw: every emission event consumes one
uniform (inverse-CDF exponential gap), and every coincidence test consumes
one more uniform. Both backends therefore produce bit-identical outputs for
the same seeded generator, which the test suite asserts.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "pure"


def run_ss_batch(rng, lam: float, delta_omega: float, tau_reset: float,
                 window: float, n_iter: int) -> np.ndarray:
    """Simulate n_iter windows; returns success times with NaN for exhaustion."""
    out = np.empty(n_iter)
    uni = rng.random
    log1p = math.log1p
    exp = math.exp
    for i in range(n_iter):
        heads = [-log1p(-uni()) / lam, -log1p(-uni()) / lam]
        busy = [0.0, 0.0]
        result = math.nan
        while True:
            s = 0 if heads[0] <= heads[1] else 1
            p = heads[s]
            if p > window:
                break
            heads[s] = p + (-log1p(-uni()) / lam)
            if p >= busy[s]:
                o = 1 - s
                q = heads[o]
                if q <= heads[s] and q <= window and q >= busy[o]:
                    x = delta_omega * (q - p)
                    if uni() < 0.5 * exp(-0.5 * x * x):
                        result = q
                        break
                busy[s] = p + tau_reset
        out[i] = result
    return out
