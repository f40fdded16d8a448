import math

import numpy as np
import pytest

from qdcsim.compiler import QuantumCircuit
from qdcsim.protocols import EmitterEmitterFockParams, ProtocolModel
from qdcsim.scheduler import EbitTask, MultiJobPolicy, build_dag, schedule_single
from qdcsim.simulator import (
    DEFAULT_CLASSES,
    JOB_CSV_HEADER,
    SimulationError,
    TimingParams,
    TrafficClass,
    experiment_sweep,
    generate_traffic,
    jobs_to_csv,
    qpu_usage,
    rack_occupancy_distribution,
    random_square_circuit,
    round_duration,
    run_sweep_point,
    single_job_stats,
    summarize,
    sweep_to_dict,
    total_time,
)
from qdcsim.topology import ResourceInventory, build_clos

BASE_INTRA = ProtocolModel(
    "ee_fock", EmitterEmitterFockParams(alpha=0.05, eta_eb=1.0, eta_det=0.1, tau0=1e-6))
BASE_INTER = ProtocolModel("ss", lambda_ss=100.0)

GOLDEN_GATES = [(0, 1), (3, 2), (5, 4), (0, 3), (1, 4), (2, 0)]

# frozen by tests/oracles/max_geometric_oracle.py (1e6 samples, numpy's own
# geometric sampler): mean 2.08606371e-04, sem 1.191e-07
MAX4_MEAN = 2.08606371e-04
MAX4_SEM = 1.191e-07

# frozen by tests/oracles/golden_ttot_oracle.py (1e6 samples from the round
# definition): mean 3.29639289e-02, std 1.730644e-02
GOLDEN_TTOT_MEAN = 3.29639289e-02
GOLDEN_TTOT_STD = 1.730644e-02


def intra_task(gate_id):
    return EbitTask(gate_id, 0, (0, 1), (0, 8, 1), "intra", 8, (), ())


def test_round_duration_empty_round(rng):
    timing = TimingParams(intra_model=BASE_INTRA, inter_model=BASE_INTER)
    assert round_duration([], timing, rng) == 0.0


def test_round_duration_matches_max_of_four_oracle(rng):
    """Mean of max(4 geometric task times) against the independently sampled
    oracle value."""
    timing = TimingParams(ebits_required=1, intra_model=BASE_INTRA,
                          inter_model=None)
    tasks = [intra_task(g) for g in range(4)]
    n = 100_000
    draws = np.array([round_duration(tasks, timing, rng) for _ in range(n)])
    sem = draws.std(ddof=1) / math.sqrt(n)
    tol = 3.0 * math.hypot(sem, MAX4_SEM)
    assert abs(draws.mean() - MAX4_MEAN) < tol


def test_total_time_golden_schedule_matches_oracle(two_rack_star, rng):
    """Mean T_tot of the three golden rounds vs the high-resolution oracle."""
    from qdcsim.compiler import FidelityTable, Placement, classify_counts, fidelity_cost

    circuit = QuantumCircuit(6, GOLDEN_GATES)
    qubit_to_qpu = list(range(6))
    rack_of = {q: two_rack_star.rack_of[q] for q in qubit_to_qpu}
    counts = classify_counts(circuit, qubit_to_qpu, rack_of)
    placement = Placement(qubit_to_qpu, rack_of, *counts,
                          fidelity_cost(counts, FidelityTable()))
    schedule = schedule_single(build_dag(circuit), placement, two_rack_star)
    timing = TimingParams(tau_sw=1e-3, ebits_required=1,
                          intra_model=BASE_INTRA, inter_model=BASE_INTER)
    n = 10_000
    samples = np.array([total_time(schedule, timing, rng) for _ in range(n)])
    sem = math.hypot(samples.std(ddof=1) / math.sqrt(n),
                     GOLDEN_TTOT_STD / math.sqrt(1e6))
    assert abs(samples.mean() - GOLDEN_TTOT_MEAN) < 3.0 * sem
    assert samples.min() > 3e-3  # three switching intervals at least


def test_timing_validation():
    with pytest.raises(SimulationError):
        TimingParams(tau_sw=-1.0)
    with pytest.raises(SimulationError):
        TimingParams(ebits_required=0)
    with pytest.raises(SimulationError):
        round_duration([intra_task(0)], TimingParams(), np.random.default_rng(0))


def test_random_square_circuit_shape(rng):
    c = random_square_circuit(8, rng)
    assert c.n_qubits == 8
    assert len(c.gates) == 8 * 4
    for layer in range(8):
        gates = c.gates[layer * 4:(layer + 1) * 4]
        touched = [q for g in gates for q in g]
        assert len(set(touched)) == len(touched)  # disjoint pairs per layer
    odd = random_square_circuit(5, rng)
    assert len(odd.gates) == 5 * 2


def test_generate_traffic_stream(rng):
    classes = list(DEFAULT_CLASSES)
    reqs = generate_traffic(classes, total_rate=11.1, duration=100.0, rng=rng)
    times = [r.arrival for r in reqs]
    assert times == sorted(times)
    assert all(0 < t < 100.0 for t in times)
    assert [r.job_id for r in reqs] == list(range(len(reqs)))
    # ~1110 arrivals expected; allow 5 sigma
    assert abs(len(reqs) - 1110) < 5 * math.sqrt(1110)


def test_generate_traffic_class_mix(rng):
    """Three classes at weights 10/1/0.1: empirical shares within 3 sigma."""
    classes = list(DEFAULT_CLASSES)
    reqs = generate_traffic(classes, total_rate=11.1, duration=1000.0, rng=rng)
    n = len(reqs)
    for cls, want in zip(classes, (10 / 11.1, 1 / 11.1, 0.1 / 11.1)):
        got = sum(1 for r in reqs if r.class_label == cls.label)
        sigma = math.sqrt(n * want * (1 - want))
        assert abs(got - n * want) < 3 * sigma


def test_generate_traffic_truncation_and_offset(rng):
    reqs = generate_traffic(list(DEFAULT_CLASSES), 5.0, math.inf, rng,
                            id_offset=40, max_count=7)
    assert len(reqs) == 7
    assert [r.job_id for r in reqs] == list(range(40, 47))
    with pytest.raises(SimulationError):
        generate_traffic(list(DEFAULT_CLASSES), 5.0, math.inf, rng)
    with pytest.raises(SimulationError):
        generate_traffic([], 5.0, 1.0, rng)
    with pytest.raises(SimulationError):
        generate_traffic(list(DEFAULT_CLASSES), 0.0, 1.0, rng)


def test_single_job_stats_deterministic():
    topo = build_clos(4, 2, ResourceInventory(data_qubits=1))
    c = QuantumCircuit(4, [(0, 1), (1, 2), (2, 3)])
    timing = TimingParams(ebits_required=1, intra_model=BASE_INTRA,
                          inter_model=BASE_INTER)
    a = single_job_stats(c, topo, topo.qpus[:4], timing, master_seed=3, reps=20)
    b = single_job_stats(c, topo, topo.qpus[:4], timing, master_seed=3, reps=20)
    assert a.jets == b.jets
    assert a.n_loc + a.n_intra + a.n_inter == 3
    assert a.n_rounds >= 1
    assert a.mean_jet > 0.0
    with pytest.raises(SimulationError):
        single_job_stats(c, topo, topo.qpus[:1], timing, master_seed=3)


def small_sweep(gammas, seed=9, reps=1):
    topo = build_clos(4, 2, ResourceInventory(data_qubits=10))
    classes = [TrafficClass("only", 1.0, 2, 20)]
    policy = MultiJobPolicy(placement="pack", ebits_required=1,
                            intra_model=ProtocolModel("ss", lambda_ss=1e4),
                            inter_model=ProtocolModel("ss", lambda_ss=1e3))
    return experiment_sweep(topo, classes, gammas, duration=math.inf,
                            policy=policy, master_seed=seed, reps=reps,
                            max_requests=30), topo


def test_sweep_points_accounting():
    points, topo = small_sweep([1.0, 5.0])
    assert len(points) == 2
    for p in points:
        assert p.n_arrived == 30
        assert p.n_done + p.n_rejected <= p.n_arrived
        assert p.p_reject == pytest.approx(p.n_rejected / p.n_arrived)
        assert 0.0 <= p.usage <= 1.0
        assert p.mean_jct >= p.mean_jet > 0.0
        assert p.mean_jct == pytest.approx(p.mean_jet + p.mean_wait, rel=1e-9)


def test_sweep_reps_have_independent_streams():
    points, _ = small_sweep([2.0], reps=2)
    assert points[0].rep == 0 and points[1].rep == 1
    assert points[0].mean_jet != points[1].mean_jet


def test_sweep_point_reproducible():
    a, _ = small_sweep([3.0])
    b, _ = small_sweep([3.0])
    assert sweep_to_dict(a) == sweep_to_dict(b)


def test_occupancy_distribution_rows_normalized():
    topo = build_clos(4, 2, ResourceInventory(data_qubits=10))
    policy = MultiJobPolicy(placement="pack", ebits_required=1,
                            intra_model=ProtocolModel("ss", lambda_ss=1e4),
                            inter_model=ProtocolModel("ss", lambda_ss=1e3))
    result = run_sweep_point(topo, [TrafficClass("only", 1.0, 2, 20)], 5.0,
                             math.inf, policy, master_seed=4, max_requests=20)
    dist = rack_occupancy_distribution(result)
    for row in dist:
        total = row.sum()
        assert total == pytest.approx(1.0) or total == pytest.approx(0.0)
    assert qpu_usage(result, topo) <= 1.0


def test_jobs_csv_schema():
    topo = build_clos(4, 2, ResourceInventory(data_qubits=10))
    policy = MultiJobPolicy(placement="pack", ebits_required=1,
                            intra_model=ProtocolModel("ss", lambda_ss=1e4),
                            inter_model=ProtocolModel("ss", lambda_ss=1e3))
    result = run_sweep_point(topo, [TrafficClass("only", 1.0, 2, 20)], 2.0,
                             math.inf, policy, master_seed=12, max_requests=10)
    text = jobs_to_csv(result.jobs)
    lines = text.strip().split("\n")
    assert lines[0] == JOB_CSV_HEADER
    assert len(lines) == 11
    first = lines[1].split(",")
    assert first[0] == "0"
    assert first[7] in ("done", "rejected")
    # floats are serialized via repr: round-trip must be exact
    assert float(first[4]) == result.jobs[0].arrival


def test_summarize_empty_result():
    topo = build_clos(4, 2, ResourceInventory(data_qubits=10))
    policy = MultiJobPolicy(placement="pack", ebits_required=1,
                            intra_model=ProtocolModel("ss", lambda_ss=1e4),
                            inter_model=ProtocolModel("ss", lambda_ss=1e3))
    from qdcsim.scheduler import run_multijob

    result = run_multijob([], topo, policy, np.random.default_rng(0))
    point = summarize(0.5, result, topo)
    assert point.n_arrived == 0
    assert point.p_reject == 0.0
    assert point.mean_jet == 0.0
