"""Quantum data center network topologies with attached entanglement resources.

Builds the network families used by the simulator (folded Clos, fat-tree,
basic tree, HyperX, BCube, DCell, linear/2D rack meshes) as undirected
device graphs whose nodes are QPUs and optical switches. Links carry a
frequency-band label: NIR below the ToR layer, telecom above it. Switches
above the ToR layer (aggregation/core) may host telecom BSMs; ToR switches
host NIR BSMs, beam-splitter ports, entanglement sources and detectors.

Hop-count conventions for diameter(), chosen per family:
  - switch-centric families (clos, rack_star, fat_tree, basic_tree, hyperx):
    edge count on the device graph between the farthest QPU pair;
  - server-centric families (bcube, dcell): QPU hops, where two QPUs are one
    hop apart when they share a switch or a direct link;
  - linear/grid2d: rack hops on the ToR adjacency graph.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import networkx as nx

NIR = "nir"
TELECOM = "telecom"

KIND_QPU = "qpu"
KIND_TOR = "tor_switch"
KIND_AGG = "aggregation_switch"
KIND_CORE = "core_switch"
KIND_LEVEL = "level_switch"

SWITCH_KINDS = (KIND_TOR, KIND_AGG, KIND_CORE, KIND_LEVEL)
# Above-ToR switch classes; members may host telecom BSMs.
TELECOM_KINDS = (KIND_AGG, KIND_CORE)

SWITCH_CENTRIC = ("clos", "rack_star", "fat_tree", "basic_tree", "hyperx", "linear", "grid2d")
SERVER_CENTRIC = ("bcube", "dcell")


class TopologyError(ValueError):
    """Invalid build parameters or a failed construction self-check."""


@dataclass(frozen=True)
class NodeId:
    index: int
    kind: str


@dataclass(frozen=True)
class ResourceInventory:
    """Per-QPU and per-switch device counts.

    bs_ports defaults to 2 * bsm_count (one splitter pair per BSM);
    ent_sources and detectors default to rack_size * comm_qubits at build
    time, a deliberately non-binding ceiling since neither is stated for
    the reference experiments.
    """

    comm_qubits: int = 4
    data_qubits: int = 10
    bsm_count: int = 4
    bs_ports: int | None = None
    ent_sources: int | None = None
    detectors: int | None = None

    def __post_init__(self):
        for name in ("comm_qubits", "data_qubits", "bsm_count", "bs_ports",
                     "ent_sources", "detectors"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise TopologyError(f"inventory field {name} must be >= 0, got {value}")

    def resolved(self, rack_size: int) -> "ResourceInventory":
        default_ed = max(1, rack_size) * self.comm_qubits
        return ResourceInventory(
            comm_qubits=self.comm_qubits,
            data_qubits=self.data_qubits,
            bsm_count=self.bsm_count,
            bs_ports=2 * self.bsm_count if self.bs_ports is None else self.bs_ports,
            ent_sources=default_ed if self.ent_sources is None else self.ent_sources,
            detectors=default_ed if self.detectors is None else self.detectors,
        )


@dataclass(frozen=True)
class PathSpec:
    """One routed option for generating an ebit between two QPUs.

    nodes is the traversal order QPU ... QPU. bsm is the switch designated
    to perform the Bell measurement, or None when the route offers no
    band-compatible BSM site (such paths exist but are not schedulable).
    sources/detectors name the ToR switches supplying entanglement sources
    and detectors for inter-rack paths.
    """

    nodes: tuple[int, ...]
    protocol: str  # "intra" | "inter"
    bsm: int | None
    sources: tuple[int, ...] = ()
    detectors: tuple[int, ...] = ()


class NetworkTopology:
    """Device graph plus rack map and resolved inventory. Immutable once built."""

    def __init__(self, kind: str, params: dict, inventory: ResourceInventory):
        self.kind = kind
        self.params = dict(params)
        self.inventory = inventory
        self.kinds: list[str] = []
        self.links: list[tuple[int, int, str]] = []
        self.rack_of: dict[int, int] = {}
        self.build_notes: list[str] = []
        self._graph: nx.Graph | None = None
        self._qpus: list[int] | None = None

    # construction helpers, used by the builders only
    def _add_node(self, kind: str) -> int:
        self.kinds.append(kind)
        return len(self.kinds) - 1

    def _add_qpu(self, rack: int) -> int:
        idx = self._add_node(KIND_QPU)
        self.rack_of[idx] = rack
        return idx

    def _add_link(self, u: int, v: int, band: str):
        if u == v or not (0 <= u < len(self.kinds)) or not (0 <= v < len(self.kinds)):
            raise TopologyError(f"bad link ({u},{v})")
        self.links.append((min(u, v), max(u, v), band))

    def _finalize(self, rack_size: int):
        self.inventory = self.inventory.resolved(rack_size)
        self._graph = nx.Graph()
        self._graph.add_nodes_from(range(len(self.kinds)))
        self._graph.add_edges_from((u, v) for u, v, _ in self.links)
        counts = {}
        for qpu in self.qpus:
            rack = self.rack_of[qpu]
            counts[rack] = counts.get(rack, 0) + 1
        self._rack_members = {r: [] for r in sorted(counts)}
        for qpu in self.qpus:
            self._rack_members[self.rack_of[qpu]].append(qpu)
        if self.kind in ("clos", "rack_star", "fat_tree", "basic_tree", "hyperx",
                         "linear", "grid2d"):
            for qpu in self.qpus:
                sw = [m for m in self._graph[qpu] if self.kinds[m] != KIND_QPU]
                if len(sw) != 1:
                    raise TopologyError(f"QPU {qpu} attaches to {len(sw)} switches")

    # queries
    def node(self, index: int) -> NodeId:
        return NodeId(index, self.kinds[index])

    def node_kind(self, index: int) -> str:
        return self.kinds[index]

    @property
    def n_nodes(self) -> int:
        return len(self.kinds)

    @property
    def qpus(self) -> list[int]:
        if self._qpus is None:
            self._qpus = [i for i, k in enumerate(self.kinds) if k == KIND_QPU]
        return self._qpus

    @property
    def switches(self) -> list[int]:
        return [i for i, k in enumerate(self.kinds) if k != KIND_QPU]

    @property
    def n_racks(self) -> int:
        return len(set(self.rack_of.values()))

    def rack_members(self, rack: int) -> list[int]:
        return list(self._rack_members[rack])

    def racks(self) -> dict[int, list[int]]:
        return {r: list(m) for r, m in self._rack_members.items()}

    def graph(self) -> nx.Graph:
        return self._graph

    def attached_tor(self, qpu: int) -> int:
        for m in self._graph[qpu]:
            if self.kinds[m] != KIND_QPU:
                return m
        raise TopologyError(f"QPU {qpu} has no switch neighbor")


def summary(topo: NetworkTopology) -> dict:
    """Closed-form count summary; for HyperX the switch count excludes terminals."""
    out = {
        "kind": topo.kind,
        "qpus": len(topo.qpus),
        "switches": len(topo.switches),
        "racks": topo.n_racks,
    }
    if topo.kind == "hyperx":
        out["switches"] = topo.params["lattice_switches"]
        out["terminals"] = topo.params["terminals"]
    return out


# ---------------------------------------------------------------------------
# builders

def build_clos(n: int, n_tor: int, inv: ResourceInventory) -> NetworkTopology:
    """Folded-Clos fabric: n**2/4 racks, n aggregation + n/2 core switches.

    The core/aggregation layer is organized into n/2 planes, each a pair of
    aggregation switches bridged by one core switch. ToR t uplinks to the
    parity-(t mod 2) aggregation switch of every plane, giving each ToR the
    required n/2 uplinks while keeping the QPU-to-QPU diameter at 6.
    """
    if n < 2 or n % 2:
        raise TopologyError(f"clos port count n must be even and >= 2, got {n}")
    if n_tor < 1:
        raise TopologyError(f"n_tor must be >= 1, got {n_tor}")
    racks = n * n // 4
    planes = n // 2
    topo = NetworkTopology("clos", {"n": n, "n_tor": n_tor}, inv)
    for r in range(racks):
        for _ in range(n_tor):
            topo._add_qpu(r)
    tors = [topo._add_node(KIND_TOR) for _ in range(racks)]
    cores = [topo._add_node(KIND_CORE) for _ in range(planes)]
    aggs = [[topo._add_node(KIND_AGG) for _ in range(2)] for _ in range(planes)]
    for qpu in range(racks * n_tor):
        topo._add_link(qpu, tors[qpu // n_tor], NIR)
    for t in range(racks):
        for p in range(planes):
            topo._add_link(tors[t], aggs[p][t % 2], TELECOM)
    for p in range(planes):
        topo._add_link(aggs[p][0], cores[p], TELECOM)
        topo._add_link(aggs[p][1], cores[p], TELECOM)
    topo._finalize(rack_size=n_tor)
    if len(topo.switches) != 3 * n // 2 + n * n // 4 or len(topo.qpus) != racks * n_tor:
        raise TopologyError("clos count self-check failed")
    return topo


def build_rack_star(racks: int, cores: int, n_tor: int, inv: ResourceInventory) -> NetworkTopology:
    """Small fixture fabric: each of `racks` ToRs uplinks to every shared core.

    Covers rack counts the closed-form Clos cannot produce (e.g. exactly two
    racks sharing one telecom switch).
    """
    if racks < 1 or cores < 0 or n_tor < 1:
        raise TopologyError("rack_star needs racks >= 1, cores >= 0, n_tor >= 1")
    topo = NetworkTopology("rack_star", {"racks": racks, "cores": cores, "n_tor": n_tor}, inv)
    for r in range(racks):
        for _ in range(n_tor):
            topo._add_qpu(r)
    tors = [topo._add_node(KIND_TOR) for _ in range(racks)]
    core_ids = [topo._add_node(KIND_CORE) for _ in range(cores)]
    for qpu in range(racks * n_tor):
        topo._add_link(qpu, tors[qpu // n_tor], NIR)
    for t in tors:
        for c in core_ids:
            topo._add_link(t, c, TELECOM)
    topo._finalize(rack_size=n_tor)
    return topo


def build_fat_tree(n: int, inv: ResourceInventory) -> NetworkTopology:
    """Three-tier fat-tree of n-port switches; edge switches act as racks."""
    if n < 2 or n % 2:
        raise TopologyError(f"fat-tree port count n must be even and >= 2, got {n}")
    half = n // 2
    n_qpus = n * half * half
    topo = NetworkTopology("fat_tree", {"n": n}, inv)
    for rack in range(n * half):
        for _ in range(half):
            topo._add_qpu(rack)
    edges = [topo._add_node(KIND_TOR) for _ in range(n * half)]
    core_ids = [topo._add_node(KIND_CORE) for _ in range(half * half)]
    aggs = [topo._add_node(KIND_AGG) for _ in range(n * half)]
    for qpu in range(n_qpus):
        topo._add_link(qpu, edges[qpu // half], NIR)
    for pod in range(n):
        for e in range(half):
            for a in range(half):
                topo._add_link(edges[pod * half + e], aggs[pod * half + a], TELECOM)
        for a in range(half):
            for c in range(half):
                topo._add_link(aggs[pod * half + a], core_ids[a * half + c], TELECOM)
    topo._finalize(rack_size=half)
    if len(topo.switches) != 5 * n_qpus // n or len(topo.qpus) != n_qpus:
        raise TopologyError("fat-tree count self-check failed")
    return topo


def build_basic_tree(n: int, inv: ResourceInventory) -> NetworkTopology:
    """Three-level tree: one root, n mid switches, n**2 leaves, (n-1)**3 QPUs.

    The nominal closed-form switch share (n**2+n+1)/n**3 of N is non-integer
    for this QPU count; the explicit 1 + n + n**2 construction is used and
    the deviation is recorded in build_notes.
    """
    if n < 2:
        raise TopologyError(f"basic tree needs n >= 2, got {n}")
    n_qpus = (n - 1) ** 3
    n_leaves = n * n
    topo = NetworkTopology("basic_tree", {"n": n}, inv)
    for q in range(n_qpus):
        topo._add_qpu(q % n_leaves)
    leaves = [topo._add_node(KIND_TOR) for _ in range(n_leaves)]
    root = topo._add_node(KIND_CORE)
    mids = [topo._add_node(KIND_AGG) for _ in range(n)]
    for q in range(n_qpus):
        topo._add_link(q, leaves[q % n_leaves], NIR)
    for i, leaf in enumerate(leaves):
        topo._add_link(leaf, mids[i // n], TELECOM)
    for m in mids:
        topo._add_link(m, root, TELECOM)
    rack_size = -(-n_qpus // n_leaves) if n_qpus else 0
    topo._finalize(rack_size=max(1, rack_size))
    actual = len(topo.switches)
    formula = (n * n + n + 1) / n**3 * n_qpus
    if abs(formula - actual) > 1e-9:
        topo.build_notes.append(
            f"switch count {actual} deviates from closed form "
            f"(n^2+n+1)/n^3*N = {formula:.3f}; using explicit 1+n+n^2 levels")
    return topo


def build_hyperx(L: int, S: tuple[int, ...], T: int, inv: ResourceInventory) -> NetworkTopology:
    """HyperX lattice: switches at integer lattice points, fully connected per axis.

    Each lattice switch carries T ToR terminals; one QPU attaches to each
    terminal so that path queries are meaningful.
    """
    S = tuple(int(s) for s in S)
    if L < 1 or len(S) != L:
        raise TopologyError(f"hyperx needs L >= 1 and len(S) == L, got L={L}, S={S}")
    if any(s < 1 for s in S):
        raise TopologyError(f"hyperx sizes must be >= 1, got {S}")
    if T < 0:
        raise TopologyError(f"terminal count must be >= 0, got {T}")
    coords = list(itertools.product(*[range(s) for s in S]))
    n_lattice = len(coords)
    topo = NetworkTopology("hyperx", {
        "L": L, "S": S, "T": T,
        "lattice_switches": n_lattice,
        "terminals": T * n_lattice,
    }, inv)
    for rack in range(T * n_lattice):
        topo._add_qpu(rack)
    terminals = [topo._add_node(KIND_TOR) for _ in range(T * n_lattice)]
    lattice = [topo._add_node(KIND_CORE) for _ in range(n_lattice)]
    index_of = {c: i for i, c in enumerate(coords)}
    for qpu in range(T * n_lattice):
        topo._add_link(qpu, terminals[qpu], NIR)
    for i, c in enumerate(coords):
        for t in range(T):
            topo._add_link(terminals[i * T + t], lattice[i], TELECOM)
        for dim in range(L):
            for other in range(c[dim] + 1, S[dim]):
                c2 = c[:dim] + (other,) + c[dim + 1:]
                topo._add_link(lattice[i], lattice[index_of[c2]], TELECOM)
    topo._finalize(rack_size=1)
    per_switch = sum(s - 1 for s in S)
    deg = [sum(1 for nb in topo.graph()[sw] if topo.node_kind(nb) == KIND_CORE)
           for sw in lattice]
    if any(d != per_switch for d in deg):
        raise TopologyError("hyperx per-switch link self-check failed")
    return topo


def build_bcube(n: int, k: int, inv: ResourceInventory) -> NetworkTopology:
    """BCube(n, k): n**(k+1) QPUs with k+1 ports, (k+1)*n**k level switches."""
    if n < 2 or k < 0:
        raise TopologyError(f"bcube needs n >= 2 and k >= 0, got n={n}, k={k}")
    n_qpus = n ** (k + 1)
    per_level = n ** k
    topo = NetworkTopology("bcube", {"n": n, "k": k}, inv)
    for q in range(n_qpus):
        topo._add_qpu(q // n)  # rack = level-0 switch group
    switch_ids = [[topo._add_node(KIND_LEVEL) for _ in range(per_level)]
                  for _ in range(k + 1)]
    for level in range(k + 1):
        stride = n ** level
        for q in range(n_qpus):
            # drop digit `level` from q's base-n representation
            high = q // (stride * n)
            low = q % stride
            j = high * stride + low
            topo._add_link(q, switch_ids[level][j], NIR)
    topo._finalize(rack_size=n)
    if len(topo.switches) != (k + 1) * per_level:
        raise TopologyError("bcube count self-check failed")
    return topo


def build_dcell(n: int, k: int, inv: ResourceInventory) -> NetworkTopology:
    """DCell(n, k): recursive cells, one switch per n-server base cell."""
    if n < 2 or k < 0:
        raise TopologyError(f"dcell needs n >= 2 and k >= 0, got n={n}, k={k}")
    t = [n]
    for level in range(1, k + 1):
        t.append((t[level - 1] + 1) * t[level - 1])
    n_qpus = t[k]
    low_bound = (n + 0.5) ** (2 ** k) - 0.5
    if n_qpus < low_bound - 1e-9:
        raise TopologyError("dcell recursion self-check failed")
    topo = NetworkTopology("dcell", {"n": n, "k": k}, inv)
    for q in range(n_qpus):
        topo._add_qpu(q // n)
    switch_ids = [topo._add_node(KIND_LEVEL) for _ in range(n_qpus // n)]
    for q in range(n_qpus):
        topo._add_link(q, switch_ids[q // n], NIR)

    def wire(level: int, lo: int, hi: int):
        if level == 0:
            return
        sub = t[level - 1]
        g = (hi - lo) // sub
        starts = [lo + i * sub for i in range(g)]
        for i in range(g):
            for j in range(i + 1, g):
                topo._add_link(starts[i] + (j - 1), starts[j] + i, NIR)
            wire(level - 1, starts[i], starts[i] + sub)

    wire(k, 0, n_qpus)
    topo._finalize(rack_size=n)
    return topo


def build_linear(racks: int, inv: ResourceInventory, n_tor: int = 1) -> NetworkTopology:
    """Chain of racks; neighboring ToRs joined by telecom links."""
    if racks < 1:
        raise TopologyError(f"linear needs racks >= 1, got {racks}")
    topo = NetworkTopology("linear", {"racks": racks, "n_tor": n_tor}, inv)
    for r in range(racks):
        for _ in range(n_tor):
            topo._add_qpu(r)
    tors = [topo._add_node(KIND_TOR) for _ in range(racks)]
    for qpu in range(racks * n_tor):
        topo._add_link(qpu, tors[qpu // n_tor], NIR)
    for r in range(racks - 1):
        topo._add_link(tors[r], tors[r + 1], TELECOM)
    topo._finalize(rack_size=n_tor)
    return topo


def build_grid2d(rows: int, cols: int, inv: ResourceInventory, n_tor: int = 1) -> NetworkTopology:
    """rows x cols rack mesh with nearest-neighbor ToR links."""
    if rows < 1 or cols < 1:
        raise TopologyError(f"grid needs rows, cols >= 1, got {rows}x{cols}")
    topo = NetworkTopology("grid2d", {"rows": rows, "cols": cols, "n_tor": n_tor}, inv)
    racks = rows * cols
    for r in range(racks):
        for _ in range(n_tor):
            topo._add_qpu(r)
    tors = [topo._add_node(KIND_TOR) for _ in range(racks)]
    for qpu in range(racks * n_tor):
        topo._add_link(qpu, tors[qpu // n_tor], NIR)
    for i in range(rows):
        for j in range(cols):
            if j + 1 < cols:
                topo._add_link(tors[i * cols + j], tors[i * cols + j + 1], TELECOM)
            if i + 1 < rows:
                topo._add_link(tors[i * cols + j], tors[(i + 1) * cols + j], TELECOM)
    topo._finalize(rack_size=n_tor)
    return topo


BUILDERS = {
    "clos": build_clos,
    "rack_star": build_rack_star,
    "fat_tree": build_fat_tree,
    "basic_tree": build_basic_tree,
    "hyperx": build_hyperx,
    "bcube": build_bcube,
    "dcell": build_dcell,
    "linear": build_linear,
    "grid2d": build_grid2d,
}


# ---------------------------------------------------------------------------
# path and distance queries

def shortest_paths(topo: NetworkTopology, qpu_a: int, qpu_b: int,
                   limit: int | None = None) -> list[PathSpec]:
    """All minimum-hop routes between two QPUs, expanded over BSM placements.

    Routes are enumerated in lexicographic node-id order; within a route,
    candidate BSM switches are visited in ascending node id (core switches
    are numbered below aggregation switches, so core placements come first).
    `limit` caps the number of routes before expansion. A route with no
    band-compatible BSM site yields a single PathSpec with bsm=None.
    """
    if qpu_a == qpu_b:
        raise TopologyError("path endpoints must differ")
    if topo.node_kind(qpu_a) != KIND_QPU or topo.node_kind(qpu_b) != KIND_QPU:
        raise TopologyError("path endpoints must be QPUs")
    graph = topo.graph()
    try:
        routes = sorted(tuple(p) for p in nx.all_shortest_paths(graph, qpu_a, qpu_b))
    except nx.NetworkXNoPath:
        return []
    if limit is not None:
        routes = routes[:limit]
    intra = topo.rack_of[qpu_a] == topo.rack_of[qpu_b]
    protocol = "intra" if intra else "inter"
    inv = topo.inventory
    specs = []
    for route in routes:
        switches = [nd for nd in route if topo.node_kind(nd) != KIND_QPU]
        if intra:
            candidates = switches if inv.bsm_count >= 1 else []
            src = det = ()
        else:
            candidates = [nd for nd in switches
                          if topo.node_kind(nd) in TELECOM_KINDS and inv.bsm_count >= 1]
            endpoint_tors = (route[1], route[-2])
            feasible_ed = inv.ent_sources >= 1 and inv.detectors >= 1
            src = det = endpoint_tors if feasible_ed else ()
            if not feasible_ed:
                candidates = []
        if not candidates:
            specs.append(PathSpec(route, protocol, None))
            continue
        for bsm in sorted(candidates):
            specs.append(PathSpec(route, protocol, bsm, src, det))
    return specs


def diameter(topo: NetworkTopology) -> int:
    """Longest shortest path between QPU pairs, per-family hop convention."""
    graph = topo.graph()
    if topo.n_nodes and not nx.is_connected(graph):
        raise TopologyError("topology is disconnected")
    qpus = topo.qpus
    if len(qpus) < 2:
        return 0
    if topo.kind in ("linear", "grid2d"):
        aux = nx.Graph()
        tors = [n for n in topo.switches]
        aux.add_nodes_from(tors)
        aux.add_edges_from((u, v) for u, v, band in topo.links if band == TELECOM)
        dists = dict(nx.all_pairs_shortest_path_length(aux))
        return max(dists[u][v] for u in tors for v in tors)
    if topo.kind in SERVER_CENTRIC:
        aux = nx.Graph()
        aux.add_nodes_from(qpus)
        for sw in topo.switches:
            members = [m for m in graph[sw] if topo.node_kind(m) == KIND_QPU]
            aux.add_edges_from(itertools.combinations(members, 2))
        aux.add_edges_from((u, v) for u, v, _ in topo.links
                           if topo.node_kind(u) == KIND_QPU and topo.node_kind(v) == KIND_QPU)
        search = aux
    else:
        search = graph
    best = 0
    for q in qpus:
        lengths = nx.single_source_shortest_path_length(search, q)
        best = max(best, max(lengths[p] for p in qpus if p in lengths))
    return best


def export_node_edge_list(topo: NetworkTopology) -> str:
    """Plain-text node/edge listing for the plotting side; one record per line."""
    inv = topo.inventory
    lines = []
    for i, kind in enumerate(topo.kinds):
        if kind == KIND_QPU:
            rack = topo.rack_of[i]
            res = f"comm={inv.comm_qubits};data={inv.data_qubits}"
        elif kind in (KIND_TOR, KIND_LEVEL):
            rack = "-"
            res = (f"bsm={inv.bsm_count};bs={inv.bs_ports};"
                   f"src={inv.ent_sources};det={inv.detectors}")
        else:
            rack = "-"
            res = f"bsm={inv.bsm_count}"
        lines.append(f"node,{i},{kind},{rack},{res}")
    for u, v, band in sorted(topo.links):
        lines.append(f"edge,{u},{v},{band}")
    return "\n".join(lines) + "\n"
