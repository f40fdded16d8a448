"""Ebit-generation protocols: analytic rates and fidelities, time samplers,
and the scatterer-scatterer Monte Carlo with its exponential-rate fit.

Three protocol families are modeled. Emitter-emitter with Fock-state
encoding heralds a noisy Bell pair with per-attempt success probability
2*alpha*eta*(1-alpha*eta) and fidelity 1 - alpha*(1-eta)/(1-alpha*eta).
Time-bin emitter-emitter and emitter-scatterer links succeed with fixed
per-attempt probability and nominal unit fidelity. Scatterer-scatterer
links have no closed-form attempt statistics; their success times come from
the event-level Monte Carlo in the compiled kernel (pure fallback when the
extension is unavailable) and are summarized by a fitted exponential rate
lambda_ss.

Rates vs sampling, deliberately distinct observables: the time-bin rate
functions include the linear-optic BSM post-selection factor 1/2, i.e.
R = p / (2*(tau0+tau_b)), while repeat-until-success sampling and
ProtocolModel.mean_time use tau_attempt / p with tau_attempt = tau0 (Fock)
or tau0 + tau_b (time-bin).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .seeding import derive_rng

try:
    from . import _sskernel as _ss_backend
except ImportError:  # compiled extension missing; identical draw stream
    from . import _sspure as _ss_backend

SS_BACKEND = _ss_backend.BACKEND

GEOMETRIC_KINDS = ("ee_fock", "ee_timebin", "es_timebin")


class ProtocolError(ValueError):
    """Invalid protocol parameters or an unusable sampling request."""


def _require(cond: bool, msg: str):
    if not cond:
        raise ProtocolError(msg)


@dataclass(frozen=True)
class EmitterEmitterFockParams:
    """alpha in (0,1); eta_eb, eta_det in (0,1]; tau0 attempt time in seconds."""

    alpha: float
    eta_eb: float
    eta_det: float
    tau0: float

    def __post_init__(self):
        _require(0.0 < self.alpha < 1.0, f"alpha must be in (0,1), got {self.alpha}")
        _require(0.0 < self.eta_eb <= 1.0, f"eta_eb must be in (0,1], got {self.eta_eb}")
        _require(0.0 < self.eta_det <= 1.0, f"eta_det must be in (0,1], got {self.eta_det}")
        _require(self.tau0 > 0.0, f"tau0 must be positive, got {self.tau0}")

    @property
    def eta(self) -> float:
        return self.eta_eb * self.eta_det


@dataclass(frozen=True)
class TimeBinParams:
    """eta_link is eta_eb for emitter-emitter links (applied squared together
    with eta_det) and eta_es for emitter-scatterer links (applied linearly)."""

    eta_link: float
    eta_det: float
    tau0: float
    tau_b: float

    def __post_init__(self):
        _require(0.0 < self.eta_link <= 1.0, f"eta_link must be in (0,1], got {self.eta_link}")
        _require(0.0 < self.eta_det <= 1.0, f"eta_det must be in (0,1], got {self.eta_det}")
        _require(self.tau0 > 0.0, f"tau0 must be positive, got {self.tau0}")
        _require(self.tau_b > 0.0, f"tau_b must be positive, got {self.tau_b}")


@dataclass(frozen=True)
class ScattererScattererParams:
    """Source pair rate lambda (Hz), Gaussian angular-frequency sigma
    delta_omega (rad/s), qubit reset time tau_reset (s), simulation window (s)."""

    lambda_source: float
    delta_omega: float
    tau_reset: float
    sim_window: float = 1.0
    max_iterations: int = 100_000

    def __post_init__(self):
        for name in ("lambda_source", "delta_omega", "tau_reset", "sim_window"):
            _require(getattr(self, name) > 0.0, f"{name} must be positive")
        _require(self.max_iterations >= 1, "max_iterations must be >= 1")


# ---------------------------------------------------------------------------
# analytic forms

def ee_fock_fidelity(params: EmitterEmitterFockParams) -> float:
    w = params.alpha * (1.0 - params.eta) / (1.0 - params.alpha * params.eta)
    return 1.0 - w


def ee_fock_success_probability(params: EmitterEmitterFockParams) -> float:
    ae = params.alpha * params.eta
    return 2.0 * ae * (1.0 - ae)


def ee_timebin_success_probability(params: TimeBinParams) -> float:
    return (params.eta_link * params.eta_det) ** 2


def ee_timebin_rate(params: TimeBinParams) -> float:
    """Average heralding rate in Hz, including the BSM post-selection 1/2."""
    return ee_timebin_success_probability(params) / (2.0 * (params.tau0 + params.tau_b))


def es_timebin_success_probability(params: TimeBinParams) -> float:
    return params.eta_link * params.eta_det


def es_timebin_rate(params: TimeBinParams) -> float:
    return es_timebin_success_probability(params) / (2.0 * (params.tau0 + params.tau_b))


# ---------------------------------------------------------------------------
# protocol model wrapper used by the scheduler/simulator

@dataclass(frozen=True)
class ProtocolModel:
    """One ebit source model: geometric repeat-until-success or exponential.

    For kind "ss" the exponential rate lambda_ss must be supplied, either
    directly from config or from calibrate_lambda_ss().
    """

    kind: str
    params: object = None
    lambda_ss: float | None = None
    fidelity_override: float | None = None

    def __post_init__(self):
        if self.kind in GEOMETRIC_KINDS:
            _require(self.params is not None, f"{self.kind} model needs params")
        elif self.kind == "ss":
            _require(self.lambda_ss is not None and self.lambda_ss > 0,
                     "ss model needs a positive lambda_ss")
        else:
            raise ProtocolError(f"unknown protocol kind {self.kind!r}")

    @property
    def distribution(self) -> str:
        return "exponential" if self.kind == "ss" else "geometric-scaled"

    @property
    def success_probability(self) -> float | None:
        if self.kind == "ee_fock":
            return ee_fock_success_probability(self.params)
        if self.kind == "ee_timebin":
            return ee_timebin_success_probability(self.params)
        if self.kind == "es_timebin":
            return es_timebin_success_probability(self.params)
        return None

    @property
    def tau_attempt(self) -> float | None:
        if self.kind == "ee_fock":
            return self.params.tau0
        if self.kind in ("ee_timebin", "es_timebin"):
            return self.params.tau0 + self.params.tau_b
        return None

    @property
    def fidelity(self) -> float:
        if self.fidelity_override is not None:
            return self.fidelity_override
        if self.kind == "ee_fock":
            return ee_fock_fidelity(self.params)
        return 1.0  # nominal for time-bin / scatterer links

    @property
    def mean_time(self) -> float:
        if self.kind == "ss":
            return 1.0 / self.lambda_ss
        return self.tau_attempt / self.success_probability


def sample_ebit_time(model: ProtocolModel, rng: np.random.Generator) -> float:
    """One heralded-success duration draw in seconds."""
    if model.kind == "ss":
        return rng.standard_exponential() / model.lambda_ss
    p = model.success_probability
    if p <= 0.0:
        raise ProtocolError("success probability is zero; sampling never terminates")
    if p >= 1.0:
        return model.tau_attempt
    u = 1.0 - rng.random()  # uniform on (0, 1]
    n = math.ceil(math.log(u) / math.log1p(-p))
    return max(1, n) * model.tau_attempt


def sample_ebit_times(model: ProtocolModel, rng: np.random.Generator,
                      n: int) -> np.ndarray:
    """Vectorized sample_ebit_time; identical draw semantics, batched.

    The n geometric draws consume the same underlying uniform stream as n
    scalar calls would.
    """
    if model.kind == "ss":
        return rng.standard_exponential(n) / model.lambda_ss
    p = model.success_probability
    if p <= 0.0:
        raise ProtocolError("success probability is zero; sampling never terminates")
    if p >= 1.0:
        return np.full(n, model.tau_attempt)
    u = 1.0 - rng.random(n)
    k = np.maximum(1, np.ceil(np.log(u) / math.log1p(-p)))
    return k * model.tau_attempt


# ---------------------------------------------------------------------------
# scatterer-scatterer Monte Carlo

def run_ss_batch(params: ScattererScattererParams, rng: np.random.Generator,
                 n_iter: int) -> np.ndarray:
    """n_iter independent window simulations; NaN entries are exhausted windows."""
    if n_iter < 0:
        raise ProtocolError("n_iter must be >= 0")
    return _ss_backend.run_ss_batch(rng, params.lambda_source, params.delta_omega,
                                    params.tau_reset, params.sim_window, n_iter)


def simulate_ss_success(params: ScattererScattererParams,
                        rng: np.random.Generator) -> float | None:
    """First acceptance time within the window, or None when exhausted."""
    t = run_ss_batch(params, rng, 1)[0]
    return None if math.isnan(t) else float(t)


def fit_lambda_ss(success_times) -> dict:
    """Exponential-rate fit: lambda_ss = 1/mean (the ML estimator) plus the
    R^2 of a linear fit to the log survival curve over survival > 1e-3."""
    arr = np.asarray(success_times, dtype=float)
    if arr.size == 0:
        raise ProtocolError("no success times to fit")
    lam = 1.0 / float(arr.mean())
    srt = np.sort(arr)
    n = srt.size
    survival = 1.0 - np.arange(1, n + 1) / n
    keep = survival > 1e-3
    t = srt[keep]
    if t.size < 3 or np.ptp(t) == 0.0:
        return {"lambda_ss": lam, "r2": 0.0}
    y = np.log(survival[keep])
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    total = y - y.mean()
    denom = float(total @ total)
    r2 = 0.0 if denom == 0.0 else 1.0 - float(resid @ resid) / denom
    return {"lambda_ss": lam, "r2": r2}


_CALIBRATION_CACHE: dict = {}


def calibrate_lambda_ss(params: ScattererScattererParams, master_seed: int,
                        iterations: int | None = None) -> dict:
    """Run the Monte Carlo once per parameter set and cache the fitted rate."""
    n = params.max_iterations if iterations is None else iterations
    key = (params, master_seed, n)
    if key not in _CALIBRATION_CACHE:
        rng = derive_rng(master_seed, "calibration")
        times = run_ss_batch(params, rng, n)
        ok = times[~np.isnan(times)]
        if ok.size == 0:
            raise ProtocolError("calibration produced no successes; widen sim_window")
        fit = fit_lambda_ss(ok)
        fit["n_success"] = int(ok.size)
        fit["n_exhausted"] = int(n - ok.size)
        _CALIBRATION_CACHE[key] = fit
    return dict(_CALIBRATION_CACHE[key])


def model_ss_from_params(params: ScattererScattererParams, master_seed: int,
                         iterations: int | None = None) -> ProtocolModel:
    fit = calibrate_lambda_ss(params, master_seed, iterations)
    return ProtocolModel("ss", params=params, lambda_ss=fit["lambda_ss"])
