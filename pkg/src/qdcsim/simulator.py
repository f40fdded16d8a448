"""Execution timing, workload generation, and experiment sweeps.

A schedule fixes the round structure; this module layers stochastic ebit
durations on top. Every task in a round runs concurrently, each needing
`ebits_required` sequential heralded successes, so the round lasts as long
as its slowest task and the job/batch finishes after

    T_tot = sum over rounds (tau_sw + T_r),   T_r = max over tasks.

Sampling order inside a round is fixed (intra-rack tasks in placement
order, then inter-rack tasks) so runs with equal seeds are byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import protocols, seeding
from . import topology as topo_mod
from .compiler import (FidelityTable, Placement, QuantumCircuit, chunk_partition,
                       classify_counts, fidelity_cost)
from .scheduler import (JobRequest, MultiJobPolicy, MultiJobResult, Schedule,
                        SwitchingRound, build_dag, run_multijob, schedule_single)


class SimulationError(RuntimeError):
    pass


@dataclass
class TimingParams:
    tau_sw: float = 1e-3
    ebits_required: int = 2
    intra_model: protocols.ProtocolModel | None = None
    inter_model: protocols.ProtocolModel | None = None

    def __post_init__(self):
        if self.tau_sw < 0.0:
            raise SimulationError(f"tau_sw must be >= 0, got {self.tau_sw}")
        if self.ebits_required < 1:
            raise SimulationError(
                f"ebits_required must be >= 1, got {self.ebits_required}")

    def model_for(self, protocol: str) -> protocols.ProtocolModel:
        model = self.intra_model if protocol == "intra" else self.inter_model
        if model is None:
            raise SimulationError(f"no protocol model configured for {protocol!r} tasks")
        return model


def round_duration(round_or_tasks, timing: TimingParams,
                   rng: np.random.Generator) -> float:
    """T_r: slowest task in the round; zero for an empty round."""
    tasks = round_or_tasks.tasks if isinstance(round_or_tasks, SwitchingRound) \
        else list(round_or_tasks)
    e = timing.ebits_required
    t_r = 0.0
    for protocol in ("intra", "inter"):
        group = [t for t in tasks if t.protocol == protocol]
        if not group:
            continue
        draws = protocols.sample_ebit_times(timing.model_for(protocol), rng,
                                            len(group) * e)
        t_r = max(t_r, float(draws.reshape(len(group), e).sum(axis=1).max()))
    return t_r


def total_time(schedule: Schedule, timing: TimingParams,
               rng: np.random.Generator) -> float:
    """Wall-clock estimate for one execution of a recorded schedule."""
    total = 0.0
    for rnd in schedule.rounds:
        total += timing.tau_sw + round_duration(rnd, timing, rng)
    return total


# ---------------------------------------------------------------------------
# workloads

def random_square_circuit(n_qubits: int, rng: np.random.Generator) -> QuantumCircuit:
    """Depth = width random circuit; each layer pairs qubits uniformly at
    random into floor(n/2) disjoint two-qubit gates."""
    gates: list[tuple[int, ...]] = []
    for _ in range(n_qubits):
        perm = rng.permutation(n_qubits)
        for i in range(0, n_qubits - 1, 2):
            gates.append((int(perm[i]), int(perm[i + 1])))
    return QuantumCircuit(n_qubits, gates)


@dataclass(frozen=True)
class TrafficClass:
    label: str
    weight: float          # relative arrival share within the mix
    n_qpus: int
    n_qubits: int


def generate_traffic(classes: list[TrafficClass], total_rate: float,
                     duration: float, rng: np.random.Generator,
                     id_offset: int = 0, max_count: int | None = None) -> list[JobRequest]:
    """Merged Poisson arrival stream over [0, duration), truncated to
    max_count requests when given.

    The superposed process has rate `total_rate`; each arrival draws its
    class with probability proportional to the class weights.
    """
    if total_rate <= 0.0:
        raise SimulationError(f"total_rate must be positive, got {total_rate}")
    if not classes:
        raise SimulationError("need at least one traffic class")
    if not np.isfinite(duration) and max_count is None:
        raise SimulationError("unbounded duration needs max_count")
    weights = np.array([c.weight for c in classes], dtype=float)
    if (weights <= 0).any():
        raise SimulationError("class weights must be positive")
    probs = weights / weights.sum()
    requests: list[JobRequest] = []
    t = 0.0
    jid = id_offset
    while max_count is None or len(requests) < max_count:
        t += rng.standard_exponential() / total_rate
        if t >= duration:
            break
        c = classes[int(rng.choice(len(classes), p=probs))]
        requests.append(JobRequest(jid, t, c.n_qubits, c.n_qpus, c.label))
        jid += 1
    return requests


DEFAULT_CLASSES = (
    TrafficClass("small", 10.0, 4, 40),
    TrafficClass("medium", 1.0, 16, 160),
    TrafficClass("large", 0.1, 64, 640),
)


# ---------------------------------------------------------------------------
# single-job statistics

@dataclass
class SingleJobStats:
    n_rounds: int
    n_loc: int
    n_intra: int
    n_inter: int
    c_fid: float
    jets: list[float]

    @property
    def mean_jet(self) -> float:
        return float(np.mean(self.jets)) if self.jets else 0.0


def single_job_stats(circuit: QuantumCircuit, topo: topo_mod.NetworkTopology,
                     qpus: list[int], timing: TimingParams,
                     master_seed: int, reps: int = 100,
                     table: FidelityTable | None = None) -> SingleJobStats:
    """Schedule once on the given QPUs (chunk qubit mapping), then sample the
    execution time `reps` times. The round structure never depends on the
    sampled durations, so one schedule serves every repetition."""
    table = table or FidelityTable()
    cap = topo.inventory.data_qubits
    slots = chunk_partition(circuit.n_qubits, cap)
    if max(slots) >= len(qpus):
        raise SimulationError(
            f"{circuit.n_qubits} qubits need {max(slots) + 1} QPUs, got {len(qpus)}")
    qubit_to_qpu = [qpus[s] for s in slots]
    rack_of_qpu = {q: topo.rack_of[q] for q in qpus}
    counts = classify_counts(circuit, qubit_to_qpu, rack_of_qpu)
    placement = Placement(qubit_to_qpu, rack_of_qpu, *counts,
                          fidelity_cost(counts, table))
    dag = build_dag(circuit)
    schedule = schedule_single(dag, placement, topo)
    rng = seeding.derive_rng(master_seed, "timing")
    jets = [total_time(schedule, timing, rng) for _ in range(reps)]
    return SingleJobStats(schedule.n_rounds, *counts, placement.c_fid, jets)


# ---------------------------------------------------------------------------
# arrival-rate sweeps

@dataclass
class SweepPoint:
    gamma: float
    rep: int
    n_arrived: int
    n_done: int
    n_rejected: int
    p_reject: float
    mean_jet: float
    mean_jct: float
    mean_wait: float
    throughput: float       # done jobs per second of busy time
    usage: float
    end_time: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "gamma", "rep", "n_arrived", "n_done", "n_rejected", "p_reject",
            "mean_jet", "mean_jct", "mean_wait", "throughput", "usage",
            "end_time")}


def qpu_usage(result: MultiJobResult, topo: topo_mod.NetworkTopology) -> float:
    """Time-weighted QPU occupancy over the busy window: completed jobs'
    n_qpus * JET summed, over total QPUs times busy time. Rejected jobs
    contribute nothing."""
    if result.busy_time <= 0.0:
        return 0.0
    num = sum(j.n_qpus * j.jet for j in result.done_jobs())
    return num / (len(topo.qpus) * result.busy_time)


def rack_occupancy_distribution(result: MultiJobResult) -> np.ndarray:
    """Per-rack distribution of busy-QPU count conditioned on >= 1 busy."""
    hist = result.rack_occupancy.copy()
    hist[:, 0] = 0.0
    totals = hist.sum(axis=1, keepdims=True)
    totals[totals == 0.0] = 1.0
    return hist / totals


def summarize(gamma: float, result: MultiJobResult,
              topo: topo_mod.NetworkTopology, rep: int = 0) -> SweepPoint:
    done = result.done_jobs()
    n_rej = sum(1 for j in result.jobs if j.status == "rejected")
    n_arr = len(result.jobs)
    jets = [j.jet for j in done]
    jcts = [j.jct for j in done]
    waits = [j.start - j.arrival for j in done]
    return SweepPoint(
        gamma=gamma,
        rep=rep,
        n_arrived=n_arr,
        n_done=len(done),
        n_rejected=n_rej,
        p_reject=n_rej / n_arr if n_arr else 0.0,
        mean_jet=float(np.mean(jets)) if jets else 0.0,
        mean_jct=float(np.mean(jcts)) if jcts else 0.0,
        mean_wait=float(np.mean(waits)) if waits else 0.0,
        throughput=len(done) / result.busy_time if result.busy_time > 0 else 0.0,
        usage=qpu_usage(result, topo),
        end_time=result.end_time)


def run_sweep_point(topo: topo_mod.NetworkTopology, classes: list[TrafficClass],
                    gamma: float, duration: float, policy: MultiJobPolicy,
                    master_seed: int, gi: int = 0, rep: int = 0,
                    max_requests: int | None = None) -> MultiJobResult:
    """One multi-job run at total arrival rate gamma.

    Arrival, circuit, and round-sampling streams derive from independent
    seed purposes indexed by (sweep position, repetition), so adding or
    removing points never perturbs the others. Job circuits are random
    square circuits (width = the class qubit count) generated at admission
    from a per-job stream; rejected jobs never draw one.
    """
    rng_arr = seeding.derive_rng(master_seed, "arrivals", gi, rep)
    requests = generate_traffic(classes, gamma, duration, rng_arr,
                                max_count=max_requests)

    def factory(req: JobRequest):
        rng = seeding.derive_rng(master_seed, "circuits", gi, rep, req.job_id)
        return random_square_circuit(req.n_qubits, rng)

    rng_rounds = seeding.derive_rng(master_seed, "rounds", gi, rep)
    return run_multijob(requests, topo, policy, rng_rounds, circuit_factory=factory)


def experiment_sweep(topo: topo_mod.NetworkTopology, classes: list[TrafficClass],
                     gammas: list[float], duration: float,
                     policy: MultiJobPolicy, master_seed: int, reps: int = 1,
                     max_requests: int | None = None, keep_results: bool = False,
                     progress=None):
    """run_sweep_point over a gamma grid with `reps` repetitions each."""
    points: list[SweepPoint] = []
    results: list[MultiJobResult] = []
    for gi, gamma in enumerate(gammas):
        for rep in range(reps):
            result = run_sweep_point(topo, classes, gamma, duration, policy,
                                     master_seed, gi, rep, max_requests)
            points.append(summarize(gamma, result, topo, rep))
            if keep_results:
                results.append(result)
            if progress is not None:
                progress(gamma, rep, points[-1])
    return (points, results) if keep_results else points


# ---------------------------------------------------------------------------
# tabular output

JOB_CSV_HEADER = ("job_id,class,n_qubits,n_qpus,arrival_s,start_s,finish_s,"
                  "status,jet_s,jct_s,n_loc,n_intra,n_inter,c_fid")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def jobs_to_csv(jobs) -> str:
    lines = [JOB_CSV_HEADER]
    for j in jobs:
        lines.append(",".join(_fmt(v) for v in (
            j.job_id, j.class_label, j.n_qubits, j.n_qpus, j.arrival,
            j.start, j.finish, j.status, j.jet, j.jct,
            j.n_loc, j.n_intra, j.n_inter, j.c_fid)))
    return "\n".join(lines) + "\n"


def sweep_to_dict(points: list[SweepPoint]) -> dict:
    return {"points": [p.to_dict() for p in points]}
