"""Round-based scheduling of remote gates onto shared entanglement hardware.

Remote two-qubit gates run in switching rounds. Within one round the fabric
holds a fixed switch configuration; every ebit task placed in the round runs
concurrently and the round ends when the slowest task finishes (barrier
semantics, timed by the simulator module). A per-round resource ledger
enforces device limits:

  intra-rack gate: 1 comm qubit on each QPU, 1 BSM + 2 beam-splitter ports
                   at the shared ToR;
  inter-rack gate: 1 comm qubit on each QPU, 1 entangled-photon source and
                   1 detector at each endpoint ToR, 1 BSM at the chosen
                   above-ToR switch.

Gates become eligible one round after the last remote predecessor was
scheduled; purely local gates and single-qubit gates cost nothing and retire
the moment their predecessors do. The greedy allocator serves jobs
round-robin, one gate per job per pass, picking each job's highest-priority
eligible gate (priority = number of DAG descendants). `allocate_ilp` is an
exact single-round alternative used as an optimality oracle on small rounds.

Multi-job mode adds a bounded arrival queue with first-fit admission at
round boundaries and per-rack QPU bookkeeping (packed or spread placement).
"""

from __future__ import annotations

import heapq
import json
import math
from bisect import insort
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import protocols
from . import topology as topo_mod
from .compiler import (FidelityTable, Placement, QuantumCircuit, chunk_partition,
                       classify_counts, fidelity_cost)


class SchedulingError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# gate dependency DAG

@dataclass
class CircuitDag:
    n_gates: int
    gate_qubits: list[tuple[int, ...]]
    succ: list[list[int]]
    n_preds: list[int]

    def roots(self) -> list[int]:
        return [g for g in range(self.n_gates) if self.n_preds[g] == 0]


def build_dag(circuit: QuantumCircuit) -> CircuitDag:
    """Dependency edges from per-qubit gate order; gate ids follow list order."""
    n = circuit.n_qubits
    last = [-1] * n
    succ: list[list[int]] = [[] for _ in circuit.gates]
    n_preds = [0] * len(circuit.gates)
    for g, qubits in enumerate(circuit.gates):
        preds = {last[q] for q in qubits if last[q] >= 0}
        for p in preds:
            succ[p].append(g)
        n_preds[g] = len(preds)
        for q in qubits:
            last[q] = g
    return CircuitDag(len(circuit.gates), list(circuit.gates), succ, n_preds)


def descendant_counts(dag: CircuitDag) -> list[int]:
    """Reachable-successor count per gate, via big-int bitset DP in reverse
    topological order (gate ids are already topologically sorted)."""
    full = [0] * dag.n_gates
    for g in range(dag.n_gates - 1, -1, -1):
        m = 0
        for s in dag.succ[g]:
            m |= full[s]
        full[g] = m | (1 << g)
    return [m.bit_count() - 1 for m in full]


# ---------------------------------------------------------------------------
# route lookup

GATE_LOCAL, GATE_INTRA, GATE_INTER = 0, 1, 2


class RouteTable:
    """Per-rack-pair route options, precomputed once per topology.

    Every option is (bsm_switch, tor_a, tor_b, mid_nodes) where mid_nodes is
    the switch sequence between the endpoint QPUs; tor_a sits on rack_a's
    side. Options keep the enumeration order of `topology.shortest_paths`
    (core switches before aggregation for the folded Clos).
    """

    def __init__(self, topo: topo_mod.NetworkTopology):
        self.topo = topo
        self.tor_of_rack: dict[int, int] = {}
        for rack, members in topo.racks().items():
            self.tor_of_rack[rack] = topo.attached_tor(members[0])
        self.inter: dict[tuple[int, int], tuple] = {}
        racks = sorted(topo.racks())
        rep = {r: min(topo.racks()[r]) for r in racks}
        for i, ra in enumerate(racks):
            for rb in racks[i + 1:]:
                specs = topo_mod.shortest_paths(topo, rep[ra], rep[rb])
                opts = tuple(
                    (s.bsm, s.nodes[1], s.nodes[-2], tuple(s.nodes[1:-1]))
                    for s in specs if s.bsm is not None)
                self.inter[(ra, rb)] = opts
                self.inter[(rb, ra)] = tuple(
                    (bsm, tb, ta, tuple(reversed(mids)))
                    for (bsm, ta, tb, mids) in opts)

    def options(self, ra: int, rb: int) -> tuple:
        return self.inter[(ra, rb)]


# ---------------------------------------------------------------------------
# recorded schedule (single-job mode)

@dataclass
class EbitTask:
    gate_id: int
    job_id: int
    qpus: tuple[int, int]
    path: tuple[int, ...]
    protocol: str            # "intra" | "inter"
    bsm: int
    sources: tuple[int, ...]
    detectors: tuple[int, ...]


@dataclass
class SwitchingRound:
    index: int
    tasks: list[EbitTask]
    ledger: dict[str, dict[int, int]]


@dataclass
class Schedule:
    rounds: list[SwitchingRound]
    gate_round: dict[int, int]

    @property
    def n_rounds(self) -> int:
        return len(self.rounds)

    def to_dict(self) -> dict:
        return {
            "n_rounds": self.n_rounds,
            "rounds": [
                {
                    "index": r.index,
                    "tasks": [
                        {
                            "gate": t.gate_id,
                            "job": t.job_id,
                            "qpus": list(t.qpus),
                            "path": list(t.path),
                            "protocol": t.protocol,
                            "bsm": t.bsm,
                            "sources": list(t.sources),
                            "detectors": list(t.detectors),
                        }
                        for t in r.tasks
                    ],
                }
                for r in self.rounds
            ],
        }


# ---------------------------------------------------------------------------
# per-round ledger

class _Ledger:
    __slots__ = ("comm", "bsm", "bs", "src", "det", "inv")

    def __init__(self, inv: topo_mod.ResourceInventory):
        self.inv = inv
        self.reset()

    def reset(self):
        self.comm: dict[int, int] = {}
        self.bsm: dict[int, int] = {}
        self.bs: dict[int, int] = {}
        self.src: dict[int, int] = {}
        self.det: dict[int, int] = {}

    def snapshot(self) -> dict[str, dict[int, int]]:
        return {"comm": dict(self.comm), "bsm": dict(self.bsm),
                "bs_ports": dict(self.bs), "sources": dict(self.src),
                "detectors": dict(self.det)}

    def try_intra(self, qa: int, qb: int, tor: int) -> bool:
        inv = self.inv
        comm, bsm, bs = self.comm, self.bsm, self.bs
        if comm.get(qa, 0) >= inv.comm_qubits or comm.get(qb, 0) >= inv.comm_qubits:
            return False
        if bsm.get(tor, 0) >= inv.bsm_count or bs.get(tor, 0) + 2 > inv.bs_ports:
            return False
        comm[qa] = comm.get(qa, 0) + 1
        comm[qb] = comm.get(qb, 0) + 1
        bsm[tor] = bsm.get(tor, 0) + 1
        bs[tor] = bs.get(tor, 0) + 2
        return True

    def try_inter(self, qa: int, qb: int, options: tuple):
        inv = self.inv
        comm = self.comm
        if comm.get(qa, 0) >= inv.comm_qubits or comm.get(qb, 0) >= inv.comm_qubits:
            return None
        bsm, src, det = self.bsm, self.src, self.det
        for opt in options:
            b, ta, tb = opt[0], opt[1], opt[2]
            if bsm.get(b, 0) >= inv.bsm_count:
                continue
            if src.get(ta, 0) >= inv.ent_sources or src.get(tb, 0) >= inv.ent_sources:
                continue
            if det.get(ta, 0) >= inv.detectors or det.get(tb, 0) >= inv.detectors:
                continue
            comm[qa] = comm.get(qa, 0) + 1
            comm[qb] = comm.get(qb, 0) + 1
            bsm[b] = bsm.get(b, 0) + 1
            src[ta] = src.get(ta, 0) + 1
            src[tb] = src.get(tb, 0) + 1
            det[ta] = det.get(ta, 0) + 1
            det[tb] = det.get(tb, 0) + 1
            return opt
        return None


# ---------------------------------------------------------------------------
# job state inside the engine

class _ActiveJob:
    __slots__ = ("job_id", "info", "succ", "pred_rem", "prio", "heap",
                 "pending", "remaining", "qpus")

    def __init__(self, job_id: int, dag: CircuitDag, placement: Placement,
                 topo: topo_mod.NetworkTopology, route: RouteTable):
        self.job_id = job_id
        q2q = placement.qubit_to_qpu
        rack = topo.rack_of
        info: list[tuple] = []
        for qubits in dag.gate_qubits:
            if len(qubits) == 1:
                info.append((GATE_LOCAL, 0, 0, 0, 0))
                continue
            qa, qb = q2q[qubits[0]], q2q[qubits[1]]
            if qa == qb:
                info.append((GATE_LOCAL, 0, 0, 0, 0))
                continue
            ra, rb = rack[qa], rack[qb]
            if ra == rb:
                info.append((GATE_INTRA, qa, qb, ra, rb))
            else:
                if not route.options(ra, rb):
                    raise SchedulingError(
                        f"gate between QPU {qa} (rack {ra}) and QPU {qb} (rack {rb}) "
                        f"has no route with a band-compatible BSM site")
                info.append((GATE_INTER, qa, qb, ra, rb))
        self.info = info
        self.succ = dag.succ
        self.pred_rem = list(dag.n_preds)
        self.prio = descendant_counts(dag)
        self.heap: list[tuple[int, int]] = []
        self.pending: list[tuple[int, int]] = []
        self.remaining = dag.n_gates
        self.qpus: list[int] = []
        # seed the frontier; local roots retire immediately
        for g in dag.roots():
            if self.info[g][0] == GATE_LOCAL:
                self._retire_cascade(g)
            else:
                self.pending.append((-self.prio[g], g))

    def _retire_cascade(self, g: int):
        stack = [g]
        info, succ, pred_rem, pending, prio = (
            self.info, self.succ, self.pred_rem, self.pending, self.prio)
        remaining = self.remaining
        while stack:
            u = stack.pop()
            remaining -= 1
            for s in succ[u]:
                pred_rem[s] -= 1
                if pred_rem[s] == 0:
                    if info[s][0] == GATE_LOCAL:
                        stack.append(s)
                    else:
                        pending.append((-prio[s], s))
        self.remaining = remaining

    def flush_pending(self):
        if self.pending:
            self.heap.extend(self.pending)
            self.pending.clear()
            heapq.heapify(self.heap)


# ---------------------------------------------------------------------------
# round engine

def _run_round_greedy(jobs: list[_ActiveJob], ledger: _Ledger, route: RouteTable,
                      record: bool, round_index: int):
    """One switching round. Returns (intra_count, inter_count, tasks)."""
    for job in jobs:
        job.flush_pending()
    n_intra = n_inter = 0
    tasks: list[EbitTask] = []
    progress = True
    while progress:
        progress = False
        for job in jobs:
            heap = job.heap
            while heap:
                negp, g = heapq.heappop(heap)
                kind, qa, qb, ra, rb = job.info[g]
                if kind == GATE_INTRA:
                    tor = route.tor_of_rack[ra]
                    if ledger.try_intra(qa, qb, tor):
                        n_intra += 1
                        if record:
                            tasks.append(EbitTask(
                                g, job.job_id, (qa, qb), (qa, tor, qb), "intra",
                                tor, (), ()))
                        job._retire_cascade(g)
                        progress = True
                        break
                else:
                    opt = ledger.try_inter(qa, qb, route.options(ra, rb))
                    if opt is not None:
                        n_inter += 1
                        if record:
                            bsm, ta, tb, mids = opt
                            tasks.append(EbitTask(
                                g, job.job_id, (qa, qb), (qa,) + mids + (qb,),
                                "inter", bsm, (ta, tb), (ta, tb)))
                        job._retire_cascade(g)
                        progress = True
                        break
                job.pending.append((negp, g))
    return n_intra, n_inter, tasks


def _run_round_ilp(jobs: list[_ActiveJob], ledger: _Ledger, route: RouteTable,
                   record: bool, round_index: int):
    """Exact round allocation via allocate_ilp over all eligible gates."""
    for job in jobs:
        job.flush_pending()
    gates = []
    owner = {}
    weights = {}
    for job in jobs:
        while job.heap:
            _, g = heapq.heappop(job.heap)
            key = (job.job_id, g)
            kind, qa, qb, ra, rb = job.info[g]
            gates.append((key, qa, qb))
            owner[key] = (job, g)
            weights[key] = 1 + job.prio[g]
    chosen = allocate_ilp(gates, route.topo, weights, route=route, ledger=ledger)
    n_intra = n_inter = 0
    tasks: list[EbitTask] = []
    for key, qa, qb in gates:
        job, g = owner[key]
        spec = chosen.get(key)
        if spec is None:
            job.pending.append((-job.prio[g], g))
            continue
        if spec.protocol == "intra":
            n_intra += 1
        else:
            n_inter += 1
        if record:
            tasks.append(EbitTask(
                g, job.job_id, (qa, qb), spec.nodes, spec.protocol,
                spec.bsm, spec.sources, spec.detectors))
        job._retire_cascade(g)
    return n_intra, n_inter, tasks


def allocate_ilp(gates: list[tuple], topo: topo_mod.NetworkTopology,
                 weights: dict | None = None, route: RouteTable | None = None,
                 ledger: _Ledger | None = None) -> dict:
    """Exact one-round allocation: maximize total weight of placed gates.

    `gates` holds (gate_key, qpu_a, qpu_b) with distinct hashable keys;
    weights default to 1. Exhaustive branch and bound over per-gate options
    (each route choice, plus skipping the gate), so intended for the small
    rounds where an optimality check matters. Returns gate_key -> PathSpec
    for the placed subset; the ledger, when given, is left holding the
    winning allocation.
    """
    route = route or RouteTable(topo)
    ledger = ledger or _Ledger(topo.inventory)
    if weights is None:
        weights = {key: 1.0 for key, _, _ in gates}
    order = sorted(gates, key=lambda it: (-weights[it[0]], str(it[0])))
    rack = topo.rack_of
    entries = []
    for key, qa, qb in order:
        ra, rb = rack[qa], rack[qb]
        if ra == rb:
            opts = (("intra", route.tor_of_rack[ra]),)
        else:
            opts = tuple(("inter",) + o for o in route.options(ra, rb))
        entries.append((key, qa, qb, ra, rb, opts, weights[key]))
    suffix = [0.0] * (len(entries) + 1)
    for i in range(len(entries) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + entries[i][6]

    best_val = -1.0
    best_pick: list = []
    pick: list = []

    def undo_intra(qa, qb, tor):
        ledger.comm[qa] -= 1
        ledger.comm[qb] -= 1
        ledger.bsm[tor] -= 1
        ledger.bs[tor] -= 2

    def undo_inter(qa, qb, opt):
        bsm, ta, tb = opt[0], opt[1], opt[2]
        ledger.comm[qa] -= 1
        ledger.comm[qb] -= 1
        ledger.bsm[bsm] -= 1
        ledger.src[ta] -= 1
        ledger.src[tb] -= 1
        ledger.det[ta] -= 1
        ledger.det[tb] -= 1

    def dfs(i: int, val: float):
        nonlocal best_val, best_pick
        if val + suffix[i] <= best_val + 1e-12:
            return
        if i == len(entries):
            if val > best_val:
                best_val = val
                best_pick = list(pick)
            return
        key, qa, qb, ra, rb, opts, w = entries[i]
        for opt in opts:
            if opt[0] == "intra":
                if not ledger.try_intra(qa, qb, opt[1]):
                    continue
                pick.append((i, opt))
                dfs(i + 1, val + w)
                pick.pop()
                undo_intra(qa, qb, opt[1])
            else:
                body = opt[1:]
                got = ledger.try_inter(qa, qb, (body,))
                if got is None:
                    continue
                pick.append((i, opt))
                dfs(i + 1, val + w)
                pick.pop()
                undo_inter(qa, qb, body)
        # skipping the gate is always an option
        dfs(i + 1, val)

    dfs(0, 0.0)

    # replay the winning allocation into the ledger and build PathSpecs
    ledger.reset()
    result: dict = {}
    for i, opt in best_pick:
        key, qa, qb, ra, rb, _, _ = entries[i]
        if opt[0] == "intra":
            tor = opt[1]
            ledger.try_intra(qa, qb, tor)
            result[key] = topo_mod.PathSpec(
                nodes=(qa, tor, qb), protocol="intra", bsm=tor)
        else:
            bsm, ta, tb, mids = opt[1], opt[2], opt[3], opt[4]
            ledger.try_inter(qa, qb, ((bsm, ta, tb, mids),))
            result[key] = topo_mod.PathSpec(
                nodes=(qa,) + mids + (qb,), protocol="inter", bsm=bsm,
                sources=(ta, tb), detectors=(ta, tb))
    return result


# ---------------------------------------------------------------------------
# single-job scheduling

def schedule_single(dag: CircuitDag, placement: Placement,
                    topo: topo_mod.NetworkTopology,
                    allocator: str = "greedy") -> Schedule:
    """Full schedule of one job on an otherwise idle fabric.

    The round structure depends only on the DAG, placement, and inventory,
    never on sampled ebit durations, so timing can be layered on afterwards.
    """
    if allocator not in ("greedy", "ilp"):
        raise ValueError(f"unknown allocator {allocator!r}")
    route = RouteTable(topo)
    job = _ActiveJob(0, dag, placement, topo, route)
    ledger = _Ledger(topo.inventory)
    rounds: list[SwitchingRound] = []
    gate_round: dict[int, int] = {}
    run_round = _run_round_greedy if allocator == "greedy" else _run_round_ilp
    while job.remaining > 0:
        ledger.reset()
        n_intra, n_inter, tasks = run_round([job], ledger, route, True, len(rounds))
        if n_intra + n_inter == 0:
            stuck = job.pending[0][1] if job.pending else None
            raise SchedulingError(
                f"no gate could be placed in round {len(rounds)} "
                f"(first stuck gate: {stuck}); inventory too small for any task")
        for t in tasks:
            gate_round[t.gate_id] = len(rounds)
        rounds.append(SwitchingRound(len(rounds), tasks, ledger.snapshot()))
    return Schedule(rounds, gate_round)


# ---------------------------------------------------------------------------
# multi-job simulation

@dataclass
class JobRequest:
    job_id: int
    arrival: float
    n_qubits: int
    n_qpus: int
    class_label: str = "default"
    circuit: QuantumCircuit | None = None


@dataclass
class JobState:
    job_id: int
    class_label: str
    n_qubits: int
    n_qpus: int
    arrival: float
    start: float | None = None
    finish: float | None = None
    status: str = "pending"
    n_loc: int = 0
    n_intra: int = 0
    n_inter: int = 0
    c_fid: float | None = None

    @property
    def jet(self) -> float | None:
        if self.start is None or self.finish is None:
            return None
        return self.finish - self.start

    @property
    def jct(self) -> float | None:
        if self.finish is None:
            return None
        return self.finish - self.arrival


@dataclass
class MultiJobPolicy:
    buffer_capacity: int = 4
    placement: str = "pack"              # "pack" | "spread"
    ebits_required: int = 2
    tau_sw: float = 1e-3
    intra_model: protocols.ProtocolModel | None = None
    inter_model: protocols.ProtocolModel | None = None
    fidelity_table: FidelityTable = field(default_factory=FidelityTable)
    record_events: bool = True


@dataclass
class MultiJobResult:
    jobs: list[JobState]
    events: list[tuple[float, str, int]]
    busy_time: float
    end_time: float
    n_rounds: int
    rack_occupancy: np.ndarray    # [rack, busy_qpus] -> seconds, col 0 unused

    def done_jobs(self) -> list[JobState]:
        return [j for j in self.jobs if j.status == "done"]


def _fit_pack(free: dict[int, list[int]], need: int) -> list[int] | None:
    """Fewest-racks best-fit: tightest rack that holds the remainder, else
    drain the fullest rack and continue."""
    avail = sorted((len(v), r) for r, v in free.items() if v)
    if sum(c for c, _ in avail) < need:
        return None
    chosen: list[tuple[int, int]] = []
    remaining = need
    while remaining > 0:
        fits = [(c, r) for c, r in avail if c >= remaining]
        if fits:
            c, r = min(fits)
            chosen.append((r, remaining))
            remaining = 0
        else:
            c, r = avail.pop(avail.index(max(avail)))
            chosen.append((r, c))
            remaining -= c
    out: list[int] = []
    for r, take in chosen:
        out.extend(free[r][:take])
    return out


def _fit_spread(free: dict[int, list[int]], need: int) -> list[int] | None:
    racks = sorted(r for r, v in free.items() if v)
    if len(racks) < need:
        return None
    return [free[r][0] for r in racks[:need]]


def run_multijob(requests: list[JobRequest], topo: topo_mod.NetworkTopology,
                 policy: MultiJobPolicy, rng_rounds: np.random.Generator,
                 circuit_factory=None) -> MultiJobResult:
    """Event loop over a finite arrival stream; runs until all work drains.

    Arrivals are queued or rejected at their arrival instants (bounded FIFO
    buffer; jobs larger than the placement policy can ever satisfy are
    rejected outright). Admission scans the queue in order at every round
    boundary, admitting any job whose QPU demand fits the free pool; an
    admitted job joins the next round. Qubits map to a job's QPUs in
    contiguous chunks. Job start = admission time, so JCT - JET is exactly
    the buffered wait.
    """
    if policy.placement == "pack":
        fit = _fit_pack
        static_max = len(topo.qpus)
    elif policy.placement == "spread":
        fit = _fit_spread
        static_max = topo.n_racks
    else:
        raise ValueError(f"unknown placement policy {policy.placement!r}")
    intra_model = policy.intra_model
    inter_model = policy.inter_model
    route = RouteTable(topo)
    ledger = _Ledger(topo.inventory)
    data_cap = topo.inventory.data_qubits
    n_racks = topo.n_racks
    rack_size = max(len(m) for m in topo.racks().values())

    free: dict[int, list[int]] = {r: sorted(m) for r, m in topo.racks().items()}
    queue: deque[JobRequest] = deque()
    active: list[_ActiveJob] = []
    states: dict[int, JobState] = {}
    events: list[tuple[float, str, int]] = []
    record_events = policy.record_events

    t = 0.0
    busy_since: float | None = None
    busy_total = 0.0
    occ = [0] * n_racks
    occ_hist = np.zeros((n_racks, rack_size + 1))
    last_occ_t = 0.0
    n_rounds = 0

    requests = sorted(requests, key=lambda r: (r.arrival, r.job_id))
    i_arr = 0

    def log(time: float, event: str, job_id: int):
        if record_events:
            events.append((time, event, job_id))

    def occ_advance(now: float):
        nonlocal last_occ_t
        dt = now - last_occ_t
        if dt > 0.0:
            for r in range(n_racks):
                if occ[r] > 0:
                    occ_hist[r, occ[r]] += dt
        last_occ_t = now

    def process_arrival(req: JobRequest, now: float):
        js = JobState(req.job_id, req.class_label, req.n_qubits, req.n_qpus, now)
        states[req.job_id] = js
        log(now, "arrive", req.job_id)
        if req.n_qpus > static_max or req.n_qubits > req.n_qpus * data_cap:
            js.status = "rejected"
            log(now, "reject", req.job_id)
        elif len(queue) >= policy.buffer_capacity:
            js.status = "rejected"
            log(now, "reject", req.job_id)
        else:
            js.status = "queued"
            queue.append(req)
            log(now, "queue", req.job_id)

    def admit(req: JobRequest, qpus: list[int], now: float):
        nonlocal busy_since
        occ_advance(now)
        for q in qpus:
            free[topo.rack_of[q]].remove(q)
            occ[topo.rack_of[q]] += 1
        circuit = req.circuit
        if circuit is None:
            if circuit_factory is None:
                raise ValueError(f"job {req.job_id} has no circuit and no factory was given")
            circuit = circuit_factory(req)
        slots = chunk_partition(circuit.n_qubits, data_cap)
        qubit_to_qpu = [qpus[s] for s in slots]
        rack_of_qpu = {q: topo.rack_of[q] for q in qpus}
        dag = build_dag(circuit)
        counts = classify_counts(circuit, qubit_to_qpu, rack_of_qpu)
        placement = Placement(qubit_to_qpu, rack_of_qpu, *counts,
                              fidelity_cost(counts, policy.fidelity_table))
        js = states[req.job_id]
        js.status = "running"
        js.start = now
        js.n_loc, js.n_intra, js.n_inter = counts
        js.c_fid = placement.c_fid
        log(now, "admit", req.job_id)
        log(now, "start", req.job_id)
        job = _ActiveJob(req.job_id, dag, placement, topo, route)
        job.qpus = list(qpus)
        if busy_since is None:
            busy_since = now
        if job.remaining == 0:
            finish_job(job, now)
        else:
            active.append(job)

    def finish_job(job: _ActiveJob, now: float):
        nonlocal busy_since, busy_total
        occ_advance(now)
        js = states[job.job_id]
        js.status = "done"
        js.finish = now
        log(now, "finish", job.job_id)
        for q in job.qpus:
            r = topo.rack_of[q]
            insort(free[r], q)
            occ[r] -= 1
        if job in active:
            active.remove(job)
        if not active and busy_since is not None:
            busy_total += now - busy_since
            busy_since = None

    def admission_scan(now: float):
        moved = True
        while moved:
            moved = False
            for req in list(queue):
                qpus = fit(free, req.n_qpus)
                if qpus is not None:
                    queue.remove(req)
                    admit(req, qpus, now)
                    moved = True
                    break   # refit from scratch; free pool changed
            if not moved:
                break

    while i_arr < len(requests) or queue or active:
        if not active:
            if queue:
                # idle network and nothing fits: the head job can never run
                head = queue.popleft()
                states[head.job_id].status = "rejected"
                log(t, "reject", head.job_id)
                admission_scan(t)
                continue
            req = requests[i_arr]
            i_arr += 1
            t = max(t, req.arrival)
            process_arrival(req, req.arrival)
            admission_scan(req.arrival)
            continue
        ledger.reset()
        n_intra, n_inter, _ = _run_round_greedy(active, ledger, route, False, n_rounds)
        if n_intra + n_inter == 0:
            stuck = [(j.job_id, j.pending[0][1]) for j in active if j.pending]
            raise SchedulingError(
                f"no gate could be placed in round {n_rounds}; "
                f"stuck (job, gate) heads: {stuck}")
        n_rounds += 1
        t_r = 0.0
        e = policy.ebits_required
        if n_intra:
            draws = protocols.sample_ebit_times(intra_model, rng_rounds, n_intra * e)
            t_r = float(draws.reshape(n_intra, e).sum(axis=1).max())
        if n_inter:
            draws = protocols.sample_ebit_times(inter_model, rng_rounds, n_inter * e)
            t_r = max(t_r, float(draws.reshape(n_inter, e).sum(axis=1).max()))
        round_end = t + policy.tau_sw + t_r
        while i_arr < len(requests) and requests[i_arr].arrival <= round_end:
            req = requests[i_arr]
            i_arr += 1
            process_arrival(req, req.arrival)
        t = round_end
        for job in [j for j in active if j.remaining == 0]:
            finish_job(job, t)
        admission_scan(t)

    occ_advance(t)
    if busy_since is not None:
        busy_total += t - busy_since
    return MultiJobResult(
        jobs=[states[k] for k in sorted(states)],
        events=events, busy_time=busy_total, end_time=t,
        n_rounds=n_rounds, rack_occupancy=occ_hist)


def events_to_csv(events: list[tuple[float, str, int]]) -> str:
    lines = ["time_s,event,job_id"]
    for time, event, job_id in events:
        lines.append(f"{time!r},{event},{job_id}")
    return "\n".join(lines) + "\n"


def schedule_to_json(schedule: Schedule) -> str:
    return json.dumps(schedule.to_dict(), sort_keys=True, indent=2)
