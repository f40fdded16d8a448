# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scatterer-scatterer Monte Carlo kernel.

Two independent Poisson emission streams are scanned event by event; an
event finding its own qubit in reset is consumed with no effect, an
unpaired or rejected detection makes the qubit busy for tau_reset, and a
coincidence of consecutive events from different sources with both qubits
free is accepted with probability 0.5*exp(-0.5*(delta_omega*dt)**2).

Draw order per emission event: one uniform (inverse-CDF exponential gap),
plus one uniform per coincidence test. The pure-Python fallback replays the
identical order on the same BitGenerator, so outputs match bit for bit.
"""

import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport exp as c_exp, log1p as c_log1p
from numpy.random cimport bitgen_t

BACKEND = "cython"


def run_ss_batch(object rng, double lam, double delta_omega, double tau_reset,
                 double window, Py_ssize_t n_iter):
    """Simulate n_iter windows; returns success times with NaN for exhaustion."""
    cdef object bit_generator = rng.bit_generator
    cdef bitgen_t *state = <bitgen_t *> PyCapsule_GetPointer(
        bit_generator.capsule, "BitGenerator")
    out = np.empty(n_iter, dtype=np.float64)
    cdef double[::1] res = out
    cdef Py_ssize_t i
    cdef double h0, h1, b0, b1, p, q, x, nan_val
    nan_val = float("nan")
    with bit_generator.lock:
        for i in range(n_iter):
            h0 = -c_log1p(-state.next_double(state.state)) / lam
            h1 = -c_log1p(-state.next_double(state.state)) / lam
            b0 = 0.0
            b1 = 0.0
            res[i] = nan_val
            while True:
                if h0 <= h1:
                    p = h0
                    if p > window:
                        break
                    h0 = p + (-c_log1p(-state.next_double(state.state)) / lam)
                    if p >= b0:
                        q = h1
                        if q <= h0 and q <= window and q >= b1:
                            x = delta_omega * (q - p)
                            if state.next_double(state.state) < 0.5 * c_exp(-0.5 * x * x):
                                res[i] = q
                                break
                        b0 = p + tau_reset
                else:
                    p = h1
                    if p > window:
                        break
                    h1 = p + (-c_log1p(-state.next_double(state.state)) / lam)
                    if p >= b1:
                        q = h0
                        if q <= h1 and q <= window and q >= b0:
                            x = delta_omega * (q - p)
                            if state.next_double(state.state) < 0.5 * c_exp(-0.5 * x * x):
                                res[i] = q
                                break
                        b1 = p + tau_reset
    return out
