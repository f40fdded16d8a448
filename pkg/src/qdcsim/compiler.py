"""Circuit-to-hardware mapping.

Pipeline: logical qubits are split across QPUs by iterative pairwise-swap
bisection of the qubit interaction graph (recursive for k-way, 10 random
restarts), then QPU slots are assigned to racks by an exact branch-and-bound
minimizer of the fidelity cost. The cost of a placement counts each
two-qubit gate at weight 1 (local), log F_intra / log F_loc (same rack) or
log F_inter / log F_loc (cross rack); smaller is better.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import topology as topo_mod


class CompileError(ValueError):
    pass


class CircuitParseError(ValueError):
    pass


@dataclass
class QuantumCircuit:
    """Gate list over n_qubits; gates are (q,) or (control, target) tuples."""

    n_qubits: int
    gates: list[tuple[int, ...]]

    def __post_init__(self):
        if self.n_qubits < 0:
            raise CompileError("negative qubit count")
        for i, gate in enumerate(self.gates):
            if len(gate) not in (1, 2):
                raise CompileError(
                    f"gate {i} has {len(gate)} qubits; only 1- and 2-qubit gates are supported")
            if any(not (0 <= q < self.n_qubits) for q in gate):
                raise CompileError(f"gate {i} references a qubit outside 0..{self.n_qubits - 1}")
            if len(gate) == 2 and gate[0] == gate[1]:
                raise CompileError(f"gate {i} uses the same qubit twice")

    @property
    def n_two_qubit(self) -> int:
        return sum(1 for g in self.gates if len(g) == 2)

    def two_qubit_pairs(self) -> list[tuple[int, int]]:
        return [g for g in self.gates if len(g) == 2]


def parse_circuit(text: str) -> QuantumCircuit:
    """Parse the plain gate-list format.

    First significant line: `qubits N`. Then one gate per line, `g1 <q>` or
    `g2 <ctrl> <tgt>`. Blank lines and `#` comments are ignored.
    """
    n_qubits = None
    gates: list[tuple[int, ...]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n_qubits is None:
            if parts[0] != "qubits" or len(parts) != 2 or not parts[1].isdigit():
                raise CircuitParseError(f"line {lineno}: expected header 'qubits N', got {raw!r}")
            n_qubits = int(parts[1])
            continue
        try:
            if parts[0] == "g1" and len(parts) == 2:
                gate = (int(parts[1]),)
            elif parts[0] == "g2" and len(parts) == 3:
                gate = (int(parts[1]), int(parts[2]))
            else:
                raise ValueError
        except ValueError:
            raise CircuitParseError(
                f"line {lineno}: expected 'g1 <q>' or 'g2 <ctrl> <tgt>', got {raw!r}") from None
        if any(not (0 <= q < n_qubits) for q in gate):
            raise CircuitParseError(
                f"line {lineno}: qubit index outside 0..{n_qubits - 1} in {raw!r}")
        gates.append(gate)
    if n_qubits is None:
        raise CircuitParseError("missing 'qubits N' header line")
    try:
        return QuantumCircuit(n_qubits, gates)
    except CompileError as exc:
        raise CircuitParseError(str(exc)) from None


_QASM_QREG = re.compile(r"qreg\s+(\w+)\s*\[\s*(\d+)\s*\]")
_QASM_ARG = re.compile(r"(\w+)\s*\[\s*(\d+)\s*\]")


def parse_qasm(text: str) -> QuantumCircuit:
    """OpenQASM-2 subset importer: any single-qubit gate plus cx."""
    regs: dict[str, int] = {}
    offsets: dict[str, int] = {}
    total = 0
    gates: list[tuple[int, ...]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//", 1)[0].strip().rstrip(";")
        if not line or line.startswith(("OPENQASM", "include", "creg", "barrier", "measure")):
            continue
        m = _QASM_QREG.match(line)
        if m:
            name, size = m.group(1), int(m.group(2))
            regs[name] = size
            offsets[name] = total
            total += size
            continue
        op = line.split()[0].split("(")[0]
        args = _QASM_ARG.findall(line)
        if not args:
            continue
        try:
            idx = [offsets[name] + int(i) for name, i in args]
        except KeyError as exc:
            raise CircuitParseError(f"line {lineno}: unknown register {exc}") from None
        if op == "cx":
            if len(idx) != 2:
                raise CircuitParseError(f"line {lineno}: cx needs two operands")
            gates.append((idx[0], idx[1]))
        elif len(idx) == 1:
            gates.append((idx[0],))
        else:
            raise CircuitParseError(
                f"line {lineno}: unsupported multi-qubit gate {op!r} (only cx)")
    return QuantumCircuit(total, gates)


def interaction_graph(circuit: QuantumCircuit) -> dict[tuple[int, int], int]:
    """Two-qubit gate counts per unordered qubit pair."""
    weights: dict[tuple[int, int], int] = {}
    for a, b in circuit.two_qubit_pairs():
        key = (a, b) if a < b else (b, a)
        weights[key] = weights.get(key, 0) + 1
    return weights


# ---------------------------------------------------------------------------
# partitioning

def _refine_bisection(qubits_a: list[int], qubits_b: list[int], W: np.ndarray):
    """Best-swap hill climb; mutates the two sides until no improving swap."""
    if not qubits_a or not qubits_b:
        return
    a = np.array(qubits_a)
    b = np.array(qubits_b)
    n = W.shape[0]
    side = np.zeros(n, dtype=bool)  # True = side b, restricted to members
    side[b] = True
    # D[x] = external minus internal weight for member x
    members = np.concatenate([a, b])
    D = np.zeros(n)
    for x in members:
        row = W[x]
        ext = row[b].sum() if not side[x] else row[a].sum()
        inn = row[a].sum() if not side[x] else row[b].sum()
        D[x] = ext - inn
    # the diagonal is zero so self terms vanish
    while True:
        gains = D[a][:, None] + D[b][None, :] - 2.0 * W[np.ix_(a, b)]
        ia, ib = np.unravel_index(np.argmax(gains), gains.shape)
        if gains[ia, ib] <= 1e-12:
            break
        x, y = a[ia], b[ib]
        a[ia], b[ib] = y, x
        side[x], side[y] = True, False
        # incremental D update for everyone else, then recompute the movers
        D[a] += 2.0 * (W[a, x] - W[a, y])
        D[b] += 2.0 * (W[b, y] - W[b, x])
        for m in (x, y):
            row = W[m]
            if side[m]:
                D[m] = row[a].sum() - row[b].sum()
            else:
                D[m] = row[b].sum() - row[a].sum()
    qubits_a[:] = a.tolist()
    qubits_b[:] = b.tolist()


def _split_sizes(n_items: int, k1: int, k2: int, cap: int) -> int:
    """Size of the first side when n_items split over k1 + k2 equal-cap bins."""
    ideal = round(n_items * k1 / (k1 + k2))
    lo = max(0, n_items - k2 * cap)
    hi = min(k1 * cap, n_items)
    return min(max(ideal, lo), hi)


def _recursive_partition(qubits: list[int], k: int, cap: int, W: np.ndarray,
                         rng: np.random.Generator, out: list[int], base: int):
    if k == 1:
        for q in qubits:
            out[q] = base
        return
    k1 = k // 2
    k2 = k - k1
    size1 = _split_sizes(len(qubits), k1, k2, cap)
    order = [qubits[i] for i in rng.permutation(len(qubits))]
    side_a = order[:size1]
    side_b = order[size1:]
    _refine_bisection(side_a, side_b, W)
    _recursive_partition(side_a, k1, cap, W, rng, out, base)
    _recursive_partition(side_b, k2, cap, W, rng, out, base + k1)


def cut_weight(assignment: list[int], weights: dict[tuple[int, int], int]) -> int:
    return sum(w for (a, b), w in weights.items() if assignment[a] != assignment[b])


def partition_circuit(circuit: QuantumCircuit, qpu_capacity: int, qpu_count: int,
                      rng: np.random.Generator, restarts: int = 10) -> list[int]:
    """Qubit to QPU-slot map minimizing cross-slot gate count.

    Slots are relabeled canonically (ordered by each slot's smallest qubit),
    so interchangeable solutions come out identical.
    """
    n = circuit.n_qubits
    if qpu_capacity < 1 or qpu_count < 1:
        raise CompileError("need qpu_capacity >= 1 and qpu_count >= 1")
    if n > qpu_capacity * qpu_count:
        raise CompileError(
            f"{n} qubits exceed capacity {qpu_count} QPUs x {qpu_capacity}")
    weights = interaction_graph(circuit)
    W = np.zeros((n, n))
    for (a, b), w in weights.items():
        W[a, b] = W[b, a] = float(w)
    best: list[int] | None = None
    best_cut = math.inf
    for _ in range(max(1, restarts)):
        out = [0] * n
        _recursive_partition(list(range(n)), qpu_count, qpu_capacity, W, rng, out, 0)
        cut = cut_weight(out, weights)
        if cut < best_cut:
            best, best_cut = out, cut
    # canonical slot labels: order of first appearance by smallest member qubit
    first_seen: dict[int, int] = {}
    for q in range(n):
        slot = best[q]
        if slot not in first_seen:
            first_seen[slot] = len(first_seen)
    relabel = {old: new for old, new in first_seen.items()}
    unused = [s for s in range(qpu_count) if s not in relabel]
    for s in unused:
        relabel[s] = len(relabel)
    return [relabel[s] for s in best]


# ---------------------------------------------------------------------------
# fidelity cost

@dataclass(frozen=True)
class FidelityTable:
    f_loc: float = 0.999
    f_intra: float = 0.95
    f_inter: float = 0.9

    def __post_init__(self):
        for name in ("f_loc", "f_intra", "f_inter"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise CompileError(f"{name} must be in (0,1], got {v}")

    @property
    def w_intra(self) -> float:
        return math.log(self.f_intra) / math.log(self.f_loc)

    @property
    def w_inter(self) -> float:
        return math.log(self.f_inter) / math.log(self.f_loc)


def fidelity_cost(counts: tuple[int, int, int], table: FidelityTable) -> float:
    """counts = (n_loc, n_intra, n_inter); log-ratio weighted gate total."""
    n_loc, n_intra, n_inter = counts
    if table.f_loc >= 1.0:
        raise CompileError("F_loc = 1 makes the cost weights singular")
    return n_loc + n_intra * table.w_intra + n_inter * table.w_inter


def fidelity_cost_approx(counts: tuple[int, int, int], table: FidelityTable) -> float:
    """First-order form using infidelity ratios eps_i / eps_loc; valid for
    near-unit fidelities, used as a cross-check of the log form."""
    n_loc, n_intra, n_inter = counts
    eps_loc = 1.0 - table.f_loc
    if eps_loc <= 0.0:
        raise CompileError("F_loc = 1 makes the approximate weights singular")
    return (n_loc
            + n_intra * (1.0 - table.f_intra) / eps_loc
            + n_inter * (1.0 - table.f_inter) / eps_loc)


# ---------------------------------------------------------------------------
# rack assignment (exact branch and bound)

@dataclass
class RackAssignment:
    racks: list[int]            # rack index per QPU slot
    x: list[list[int]]          # one-hot matrix, x[i][r]
    objective: float


def assign_racks_ilp(e: dict[tuple[int, int], float] | np.ndarray, n_qpus: int,
                     n_racks: int, n_tor: int, table: FidelityTable) -> RackAssignment:
    """Exact minimizer of the weighted remote-gate cost over rack assignments.

    Each QPU goes to exactly one rack (one-hot), racks hold at most n_tor
    QPUs. Pairs on the same rack cost e_ij * w_intra, split pairs
    e_ij * w_inter. Restricted-growth search order (the first QPU considered
    is pinned to rack 0) removes rack-relabeling symmetry.
    """
    if n_qpus > n_racks * n_tor:
        raise CompileError(f"{n_qpus} QPUs exceed {n_racks} racks x {n_tor}")
    E = np.zeros((n_qpus, n_qpus))
    if isinstance(e, np.ndarray):
        E[:, :] = e
    else:
        for (i, j), w in e.items():
            E[i, j] = E[j, i] = float(w)
    np.fill_diagonal(E, 0.0)
    w_intra, w_inter = table.w_intra, table.w_inter
    w_min = min(w_intra, w_inter)

    order = sorted(range(n_qpus), key=lambda i: (-E[i].sum(), i))
    suffix_weight = [0.0] * (n_qpus + 1)
    for pos in range(n_qpus - 1, -1, -1):
        q = order[pos]
        later = order[pos + 1:]
        suffix_weight[pos] = suffix_weight[pos + 1] + float(E[q, later].sum())

    racks_of = [-1] * n_qpus
    load = [0] * n_racks
    best_cost = math.inf
    best: list[int] | None = None

    # greedy incumbent: cheapest feasible rack per QPU in search order
    for pos, q in enumerate(order):
        cand = None
        cand_cost = math.inf
        for r in range(n_racks):
            if load[r] >= n_tor:
                continue
            c = sum(E[q, p] * (w_intra if racks_of[p] == r else w_inter)
                    for p in order[:pos])
            if c < cand_cost:
                cand, cand_cost = r, c
        racks_of[q] = cand
        load[cand] += 1
    best = list(racks_of)
    best_cost = _assignment_cost(E, best, w_intra, w_inter)

    racks_of = [-1] * n_qpus
    load = [0] * n_racks

    def dfs(pos: int, cost: float, used: int):
        nonlocal best, best_cost
        if cost + w_min * suffix_weight[pos] >= best_cost - 1e-12:
            return
        if pos == n_qpus:
            best, best_cost = list(racks_of), cost
            return
        q = order[pos]
        placed = order[:pos]
        limit = min(n_racks, used + 1)
        for r in range(limit):
            if load[r] >= n_tor:
                continue
            add = 0.0
            for p in placed:
                w = E[q, p]
                if w:
                    add += w * (w_intra if racks_of[p] == r else w_inter)
            racks_of[q] = r
            load[r] += 1
            dfs(pos + 1, cost + add, max(used, r + 1))
            load[r] -= 1
            racks_of[q] = -1

    dfs(0, 0.0, 0)
    x = [[1 if best[i] == r else 0 for r in range(n_racks)] for i in range(n_qpus)]
    return RackAssignment(racks=best, x=x, objective=best_cost)


def _assignment_cost(E: np.ndarray, racks: list[int], w_intra: float, w_inter: float) -> float:
    cost = 0.0
    n = len(racks)
    for i in range(n):
        for j in range(i + 1, n):
            w = E[i, j]
            if w:
                cost += w * (w_intra if racks[i] == racks[j] else w_inter)
    return cost


# ---------------------------------------------------------------------------
# full pipeline

@dataclass
class Placement:
    """Physical mapping of one circuit: qubit -> QPU node id, plus gate counts."""

    qubit_to_qpu: list[int]
    qpu_to_rack: dict[int, int]
    n_loc: int
    n_intra: int
    n_inter: int
    c_fid: float

    def counts(self) -> tuple[int, int, int]:
        return (self.n_loc, self.n_intra, self.n_inter)

    def to_dict(self) -> dict:
        return {
            "qubit_to_qpu": list(self.qubit_to_qpu),
            "qpu_to_rack": {str(k): v for k, v in sorted(self.qpu_to_rack.items())},
            "n_loc": self.n_loc,
            "n_intra": self.n_intra,
            "n_inter": self.n_inter,
            "c_fid": self.c_fid,
        }


def classify_counts(circuit: QuantumCircuit, qubit_to_qpu: list[int],
                    rack_of_qpu: dict[int, int]) -> tuple[int, int, int]:
    n_loc = n_intra = n_inter = 0
    for a, b in circuit.two_qubit_pairs():
        qa, qb = qubit_to_qpu[a], qubit_to_qpu[b]
        if qa == qb:
            n_loc += 1
        elif rack_of_qpu[qa] == rack_of_qpu[qb]:
            n_intra += 1
        else:
            n_inter += 1
    return n_loc, n_intra, n_inter


def chunk_partition(n_qubits: int, qpu_capacity: int) -> list[int]:
    """Contiguous qubit blocks per QPU slot; the no-structure fast path."""
    return [q // qpu_capacity for q in range(n_qubits)]


RACK_ILP_KINDS = ("clos", "rack_star", "fat_tree")


def compile_circuit(circuit: QuantumCircuit, topo: "topo_mod.NetworkTopology",
                    table: FidelityTable, rng: np.random.Generator,
                    qpus: list[int] | None = None) -> Placement:
    """Partition + rack assignment against (a subset of) a topology's QPUs.

    `qpus` restricts placement to the given free QPU nodes (defaults to all).
    Rack assignment runs for the rack-structured fabrics; on other kinds the
    slots fill QPUs in node-id order.
    """
    pool = sorted(topo.qpus if qpus is None else qpus)
    cap = topo.inventory.data_qubits
    n = circuit.n_qubits
    if n > cap * len(pool):
        raise CompileError(f"{n} qubits exceed available capacity "
                           f"{len(pool)} QPUs x {cap} data qubits")
    k = max(1, -(-n // cap))
    slots = partition_circuit(circuit, cap, k, rng)

    # aggregate slot-to-slot interaction
    e: dict[tuple[int, int], float] = {}
    for (a, b), w in interaction_graph(circuit).items():
        sa, sb = slots[a], slots[b]
        if sa == sb:
            continue
        key = (sa, sb) if sa < sb else (sb, sa)
        e[key] = e.get(key, 0.0) + w

    by_rack: dict[int, list[int]] = {}
    for q in pool:
        by_rack.setdefault(topo.rack_of[q], []).append(q)
    rack_ids = sorted(by_rack)

    slot_to_qpu: dict[int, int] = {}
    if topo.kind in RACK_ILP_KINDS and len(rack_ids) > 1:
        rack_cap = max(len(v) for v in by_rack.values())
        if k > len(rack_ids) * rack_cap:
            raise CompileError("insufficient rack capacity for the partitioned slots")
        assignment = assign_racks_ilp(e, k, len(rack_ids), rack_cap, table)
        cursor = {r: 0 for r in rack_ids}
        for slot in range(k):
            rack = rack_ids[assignment.racks[slot]]
            members = by_rack[rack]
            if cursor[rack] >= len(members):
                raise CompileError(f"rack {rack} has fewer free QPUs than assigned slots")
            slot_to_qpu[slot] = members[cursor[rack]]
            cursor[rack] += 1
    else:
        for slot in range(k):
            slot_to_qpu[slot] = pool[slot]

    qubit_to_qpu = [slot_to_qpu[s] for s in slots]
    rack_of_qpu = {q: topo.rack_of[q] for q in slot_to_qpu.values()}
    n_loc, n_intra, n_inter = classify_counts(circuit, qubit_to_qpu, rack_of_qpu)
    c_fid = fidelity_cost((n_loc, n_intra, n_inter), table)
    return Placement(qubit_to_qpu, rack_of_qpu, n_loc, n_intra, n_inter, c_fid)
