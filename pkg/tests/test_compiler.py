import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdcsim.compiler import (
    CircuitParseError,
    CompileError,
    FidelityTable,
    QuantumCircuit,
    _refine_bisection,
    assign_racks_ilp,
    chunk_partition,
    classify_counts,
    compile_circuit,
    cut_weight,
    fidelity_cost,
    fidelity_cost_approx,
    interaction_graph,
    parse_circuit,
    parse_qasm,
    partition_circuit,
)
from qdcsim.topology import ResourceInventory, build_clos


def random_circuit(n_qubits, n_gates, rng):
    gates = []
    for _ in range(n_gates):
        a, b = rng.choice(n_qubits, size=2, replace=False)
        gates.append((int(a), int(b)))
    return QuantumCircuit(n_qubits, gates)


def brute_force_bipartition(weights, n_qubits, size_a):
    best = math.inf
    for side_a in itertools.combinations(range(n_qubits), size_a):
        mark = [1] * n_qubits
        for q in side_a:
            mark[q] = 0
        best = min(best, cut_weight(mark, weights))
    return best


# circuit container and parsers

def test_circuit_validation():
    QuantumCircuit(3, [(0,), (0, 1), (2, 1)])
    QuantumCircuit(0, [])
    with pytest.raises(CompileError):
        QuantumCircuit(3, [(1, 1)])
    with pytest.raises(CompileError):
        QuantumCircuit(3, [(0, 1, 2)])
    with pytest.raises(CompileError):
        QuantumCircuit(2, [(0, 2)])
    with pytest.raises(CompileError):
        QuantumCircuit(-1, [])


def test_circuit_counts():
    c = QuantumCircuit(4, [(0,), (0, 1), (1, 2), (0, 1)])
    assert c.n_two_qubit == 3
    assert list(c.two_qubit_pairs()) == [(0, 1), (1, 2), (0, 1)]


def test_parse_circuit_roundtrip():
    text = """\
# three qubits, two entangling gates
qubits 3
g2 0 1
g1 2
g2 2 0
"""
    c = parse_circuit(text)
    assert c.n_qubits == 3
    assert c.gates == [(0, 1), (2,), (2, 0)]


def test_parse_circuit_errors_carry_line_numbers():
    with pytest.raises(CircuitParseError, match="line 1"):
        parse_circuit("g2 0 1\n")
    with pytest.raises(CircuitParseError, match="line 3"):
        parse_circuit("qubits 2\ng2 0 1\ng2 0 5\n")
    with pytest.raises(CircuitParseError, match="line 2"):
        parse_circuit("qubits 2\nmeasure 0\n")


def test_parse_qasm_basics():
    text = """\
OPENQASM 2.0;
include "qelib1.inc";
qreg a[2];
qreg b[2];
creg c[4];
h a[0];
cx a[0], b[1];
barrier a;
rz(0.5) b[0];
measure a[0] -> c[0];
"""
    c = parse_qasm(text)
    assert c.n_qubits == 4
    assert c.gates == [(0,), (0, 3), (2,)]  # b[] offset by len(a)


def test_parse_qasm_rejects_three_qubit_gates():
    text = "OPENQASM 2.0;\nqreg q[3];\nccx q[0], q[1], q[2];\n"
    with pytest.raises(CircuitParseError, match="ccx"):
        parse_qasm(text)


def test_interaction_graph_symmetric_weights():
    c = QuantumCircuit(3, [(0, 1), (1, 0), (1, 2)])
    w = interaction_graph(c)
    assert w == {(0, 1): 2, (1, 2): 1}


# partitioning

def test_partition_identity_when_capacity_one(rng):
    c = random_circuit(6, 12, rng)
    slots = partition_circuit(c, qpu_capacity=1, qpu_count=6, rng=rng)
    assert slots == list(range(6))  # canonical labels make this exact


def test_partition_respects_capacity(rng):
    c = random_circuit(9, 30, rng)
    slots = partition_circuit(c, qpu_capacity=3, qpu_count=3, rng=rng)
    for slot in range(3):
        assert slots.count(slot) <= 3
    with pytest.raises(CompileError):
        partition_circuit(c, qpu_capacity=2, qpu_count=3, rng=rng)


def test_partition_matches_bruteforce_often():
    """8 qubits over 2 QPUs of capacity 4: never better than the exhaustive
    optimum, equal to it on at least 90 of 100 seeded instances."""
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        c = random_circuit(8, 14, rng)
        weights = interaction_graph(c)
        opt = brute_force_bipartition(weights, 8, 4)
        slots = partition_circuit(c, qpu_capacity=4, qpu_count=2, rng=rng)
        cut = cut_weight(slots, weights)
        assert cut >= opt
        hits += cut == opt
    assert hits >= 90


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(4, 10))
def test_refinement_never_worsens_cut(seed, n):
    rng = np.random.default_rng(seed)
    W = rng.integers(0, 5, size=(n, n)).astype(float)
    W = np.triu(W, 1)
    W = W + W.T
    half = n // 2
    order = rng.permutation(n)
    side_a, side_b = list(order[:half]), list(order[half:])
    weights = {(i, j): W[i, j] for i in range(n) for j in range(i + 1, n) if W[i, j]}
    before = [0 if q in side_a else 1 for q in range(n)]
    cut_before = cut_weight(before, weights)
    _refine_bisection(side_a, side_b, W)
    after = [0 if q in side_a else 1 for q in range(n)]
    assert cut_weight(after, weights) <= cut_before
    assert sorted(side_a + side_b) == list(range(n))


# fidelity cost

def test_fidelity_cost_hand_value():
    table = FidelityTable(f_loc=0.999, f_intra=0.95, f_inter=0.9)
    assert fidelity_cost((10, 2, 1), table) == pytest.approx(217.843, abs=0.02)


def test_fidelity_cost_log_base_invariant():
    table = FidelityTable(f_loc=0.999, f_intra=0.95, f_inter=0.9)
    counts = (7, 3, 2)
    via_log10 = (counts[0]
                 + counts[1] * math.log10(table.f_intra) / math.log10(table.f_loc)
                 + counts[2] * math.log10(table.f_inter) / math.log10(table.f_loc))
    assert fidelity_cost(counts, table) == pytest.approx(via_log10, abs=1e-12)


def test_fidelity_cost_rejects_unit_floc():
    with pytest.raises(CompileError):
        fidelity_cost((1, 1, 1), FidelityTable(f_loc=1.0, f_intra=0.95, f_inter=0.9))


@settings(max_examples=30, deadline=None)
@given(eps=st.tuples(st.floats(1e-5, 0.01), st.floats(1e-5, 0.01), st.floats(1e-5, 0.01)),
       counts=st.tuples(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50)))
def test_approx_cost_close_for_near_unit_fidelities(eps, counts):
    table = FidelityTable(f_loc=1 - eps[0], f_intra=1 - eps[1], f_inter=1 - eps[2])
    exact = fidelity_cost(counts, table)
    approx = fidelity_cost_approx(counts, table)
    if exact > 0:
        assert abs(approx - exact) / exact < 0.05


# rack assignment

def brute_force_racks(E, n_qpus, n_racks, n_tor, table):
    best = math.inf
    for combo in itertools.product(range(n_racks), repeat=n_qpus):
        if any(combo.count(r) > n_tor for r in range(n_racks)):
            continue
        cost = 0.0
        for i in range(n_qpus):
            for j in range(i + 1, n_qpus):
                if E[i, j]:
                    w = table.w_intra if combo[i] == combo[j] else table.w_inter
                    cost += E[i, j] * w
        best = min(best, cost)
    return best


def test_rack_ilp_all_to_all_instance():
    table = FidelityTable()
    E = np.ones((6, 6)) - np.eye(6)
    got = assign_racks_ilp(E, n_qpus=6, n_racks=3, n_tor=2, table=table)
    assert got.objective == pytest.approx(
        brute_force_racks(E, 6, 3, 2, table), rel=1e-12)
    # any optimum is a perfect 2-2-2 split here
    assert sorted(got.racks.count(r) for r in range(3)) == [2, 2, 2]


def test_rack_ilp_matches_bruteforce_on_random_instances():
    table = FidelityTable()
    for seed in range(20):
        rng = np.random.default_rng(seed)
        n_qpus = int(rng.integers(2, 8))
        n_racks = int(rng.integers(1, 4))
        n_tor = int(rng.integers(-(-n_qpus // n_racks), n_qpus + 1))
        E = rng.integers(0, 4, size=(n_qpus, n_qpus)).astype(float)
        E = np.triu(E, 1) + np.triu(E, 1).T
        got = assign_racks_ilp(E, n_qpus, n_racks, n_tor, table)
        want = brute_force_racks(E, n_qpus, n_racks, n_tor, table)
        assert got.objective == pytest.approx(want, rel=1e-9)
        assert got.objective == pytest.approx(
            sum(E[i, j] * (table.w_intra if got.racks[i] == got.racks[j]
                           else table.w_inter)
                for i in range(n_qpus) for j in range(i + 1, n_qpus)), rel=1e-9)


def test_rack_ilp_one_hot_consistency():
    table = FidelityTable()
    E = np.array([[0, 2, 0], [2, 0, 1], [0, 1, 0]], dtype=float)
    got = assign_racks_ilp(E, 3, 2, 2, table)
    for i, row in enumerate(got.x):
        assert sum(row) == 1
        assert row[got.racks[i]] == 1
    for r in range(2):
        assert sum(row[r] for row in got.x) <= 2


def test_rack_ilp_rejects_overfull():
    with pytest.raises(CompileError):
        assign_racks_ilp(np.zeros((5, 5)), 5, 2, 2, FidelityTable())


# end-to-end compile

def test_compile_separable_circuit_has_no_remote_gates(rng):
    """Two independent 4-qubit blocks fit one QPU each: all gates local."""
    gates = [(a, b) for a, b in [(0, 1), (1, 2), (2, 3), (0, 3)] * 3]
    gates += [(a + 4, b + 4) for a, b in gates[:12]]
    c = QuantumCircuit(8, gates)
    topo = build_clos(4, 2, ResourceInventory(data_qubits=4))
    placement = compile_circuit(c, topo, FidelityTable(), rng)
    assert placement.counts() == (24, 0, 0)
    assert placement.c_fid == pytest.approx(24.0)


def test_compile_counts_add_up(rng):
    c = random_circuit(12, 40, rng)
    topo = build_clos(4, 2, ResourceInventory(data_qubits=3))
    placement = compile_circuit(c, topo, FidelityTable(), rng)
    assert placement.n_loc + placement.n_intra + placement.n_inter == c.n_two_qubit
    assert set(placement.qubit_to_qpu) <= set(topo.qpus)
    for q in set(placement.qubit_to_qpu):
        assert placement.qubit_to_qpu.count(q) <= 3
    assert placement.c_fid == pytest.approx(
        fidelity_cost(placement.counts(), FidelityTable()))


def test_compile_rejects_oversized_circuit(rng):
    topo = build_clos(4, 2, ResourceInventory(data_qubits=2))
    with pytest.raises(CompileError):
        compile_circuit(random_circuit(30, 10, rng), topo, FidelityTable(), rng)


def test_compile_respects_qpu_subset(rng):
    topo = build_clos(4, 2, ResourceInventory(data_qubits=4))
    free = topo.racks()[2]  # both QPUs of one rack
    c = random_circuit(8, 20, rng)
    placement = compile_circuit(c, topo, FidelityTable(), rng, qpus=free)
    assert set(placement.qubit_to_qpu) <= set(free)
    assert placement.n_inter == 0


def test_chunk_partition_and_classify():
    assert chunk_partition(5, 2) == [0, 0, 1, 1, 2]
    c = QuantumCircuit(4, [(0, 1), (0, 2), (2, 3)])
    counts = classify_counts(c, [10, 10, 11, 12], {10: 0, 11: 0, 12: 1})
    assert counts == (1, 1, 1)
