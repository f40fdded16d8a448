"""Deterministic RNG stream derivation from one master seed.

Every random stream in a run is a numpy Generator built from
SeedSequence(master_seed, spawn_key=(purpose_id, *indices)). The purpose
table below is part of the output contract: identical seed and config give
byte-identical result files.
"""

from __future__ import annotations

import numpy as np

PURPOSES = {
    "calibration": 1,   # protocol Monte Carlo (lambda_ss fits, batch runs)
    "arrivals": 2,      # job arrival process, per (gamma index, iteration)
    "circuits": 3,      # random circuit generation, per (gamma index, iteration)
    "rounds": 4,        # ebit time sampling inside the scheduler event loop
    "partition": 5,     # partitioner restarts
    "baseline": 6,      # random-placement baselines in the compile bench
    "timing": 7,        # standalone schedule timing replications
}


def derive_rng(master_seed: int, purpose: str, *indices: int) -> np.random.Generator:
    if purpose not in PURPOSES:
        raise KeyError(f"unknown RNG purpose {purpose!r}")
    ss = np.random.SeedSequence(master_seed,
                                spawn_key=(PURPOSES[purpose], *indices))
    return np.random.Generator(np.random.PCG64(ss))
