"""Command-line entry point; wires YAML configs through the library.

Subcommands: protocol-mc, single-job, sweep, compile-bench. Every run
writes its files under one output directory plus a manifest.json listing
them; the manifest carries the command, seed, and a hash of the resolved
config so downstream plotting can check provenance.

Exit codes: 0 success, 2 config or parse error, 3 runtime infeasibility.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import re
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from . import protocols, seeding, simulator
from . import topology as topo_mod
from .compiler import (CircuitParseError, CompileError, FidelityTable, Placement,
                       QuantumCircuit, classify_counts, compile_circuit,
                       fidelity_cost, parse_circuit, parse_qasm)
from .scheduler import (MultiJobPolicy, SchedulingError, build_dag, events_to_csv,
                        schedule_single)
from .simulator import SimulationError, TimingParams, TrafficClass


class ConfigError(ValueError):
    pass


CONFIG_ERRORS = (ConfigError, CircuitParseError, yaml.YAMLError)
RUNTIME_ERRORS = (SchedulingError, CompileError, SimulationError,
                  protocols.ProtocolError, topo_mod.TopologyError)


# ---------------------------------------------------------------------------
# config plumbing

_FLOAT_STRING = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)[eE][+-]?\d+")


def _normalize(node):
    """YAML 1.1 reads '1e6' (exponent without sign) as a string; coerce
    exponent-form numeric strings back to floats, recursively."""
    if isinstance(node, dict):
        return {k: _normalize(v) for k, v in node.items()}
    if isinstance(node, list):
        return [_normalize(v) for v in node]
    if isinstance(node, str) and _FLOAT_STRING.fullmatch(node):
        return float(node)
    return node


def load_config(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    cfg = yaml.safe_load(text)
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {path} must be a mapping, got {type(cfg).__name__}")
    return _normalize(cfg)


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def _get(cfg: dict, dotted: str, default=..., kind=None):
    node = cfg
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            if default is not ...:
                return default
            raise ConfigError(f"missing field {dotted!r}")
        node = node[part]
    if kind is not None and not isinstance(node, kind):
        raise ConfigError(f"field {dotted!r} must be {kind.__name__}, "
                          f"got {type(node).__name__}")
    return node


def build_inventory(cfg: dict) -> topo_mod.ResourceInventory:
    block = _get(cfg, "topology.inventory", default={})
    known = {"comm_qubits", "data_qubits", "bsm_count", "bs_ports",
             "ent_sources", "detectors"}
    unknown = set(block) - known
    if unknown:
        raise ConfigError(f"unknown inventory fields: {sorted(unknown)}")
    return topo_mod.ResourceInventory(**block)


def build_topology(cfg: dict) -> topo_mod.NetworkTopology:
    kind = _get(cfg, "topology.kind", kind=str)
    inv = build_inventory(cfg)

    def need(field):
        return _get(cfg, f"topology.{field}")

    try:
        if kind == "clos":
            return topo_mod.build_clos(need("n"), need("n_tor"), inv)
        if kind == "rack_star":
            return topo_mod.build_rack_star(need("racks"), need("cores"),
                                            need("n_tor"), inv)
        if kind == "fat_tree":
            return topo_mod.build_fat_tree(need("n"), inv)
        if kind == "basic_tree":
            return topo_mod.build_basic_tree(need("n"), inv)
        if kind == "hyperx":
            dims = tuple(_get(cfg, "topology.dims", kind=list))
            return topo_mod.build_hyperx(len(dims), dims, need("terminals"), inv)
        if kind == "bcube":
            return topo_mod.build_bcube(need("n"), need("k"), inv)
        if kind == "dcell":
            return topo_mod.build_dcell(need("n"), need("k"), inv)
        if kind == "linear":
            return topo_mod.build_linear(need("racks"), inv,
                                         n_tor=_get(cfg, "topology.n_tor", default=1))
        if kind == "grid2d":
            return topo_mod.build_grid2d(need("rows"), need("cols"), inv,
                                         n_tor=_get(cfg, "topology.n_tor", default=1))
    except topo_mod.TopologyError as exc:
        raise ConfigError(f"topology: {exc}") from None
    raise ConfigError(f"unknown topology kind {kind!r}")


def build_protocol_model(cfg: dict, name: str, master_seed: int) -> protocols.ProtocolModel:
    block = _get(cfg, f"protocols.{name}", kind=dict)
    kind = _get(block, "kind", kind=str)
    fid = block.get("fidelity")
    try:
        if kind == "ee_fock":
            params = protocols.EmitterEmitterFockParams(
                _get(block, "alpha"), _get(block, "eta_eb"),
                _get(block, "eta_det"), _get(block, "tau0"))
            return protocols.ProtocolModel(kind, params, fidelity_override=fid)
        if kind in ("ee_timebin", "es_timebin"):
            params = protocols.TimeBinParams(
                _get(block, "eta_link"), _get(block, "eta_det"),
                _get(block, "tau0"), _get(block, "tau_b"))
            return protocols.ProtocolModel(kind, params, fidelity_override=fid)
        if kind == "ss":
            if "lambda_ss" in block:
                return protocols.ProtocolModel(kind, lambda_ss=block["lambda_ss"],
                                               fidelity_override=fid)
            params = _ss_params(block)
            iterations = _get(block, "calibration_iterations", default=2000)
            return protocols.model_ss_from_params(params, master_seed, iterations)
    except protocols.ProtocolError as exc:
        raise ConfigError(f"protocols.{name}: {exc}") from None
    raise ConfigError(f"protocols.{name}: unknown protocol kind {kind!r}")


def _ss_params(block: dict) -> protocols.ScattererScattererParams:
    for field in ("lambda_source", "delta_omega", "tau_reset"):
        if field not in block:
            raise ConfigError(f"missing field 'protocols.ss.{field}'")
    return protocols.ScattererScattererParams(
        block["lambda_source"], block["delta_omega"], block["tau_reset"],
        sim_window=block.get("sim_window", 1.0),
        max_iterations=block.get("max_iterations", 100_000))


def build_fidelity_table(cfg: dict) -> FidelityTable:
    block = _get(cfg, "fidelity", default={})
    try:
        return FidelityTable(block.get("f_loc", 0.999), block.get("f_intra", 0.95),
                             block.get("f_inter", 0.9))
    except CompileError as exc:
        raise ConfigError(f"fidelity: {exc}") from None


def build_timing(cfg: dict, master_seed: int) -> TimingParams:
    block = _get(cfg, "timing", default={})
    try:
        return TimingParams(
            tau_sw=block.get("tau_sw", 1e-3),
            ebits_required=block.get("ebits_required", 2),
            intra_model=build_protocol_model(cfg, "intra", master_seed),
            inter_model=build_protocol_model(cfg, "inter", master_seed))
    except SimulationError as exc:
        raise ConfigError(f"timing: {exc}") from None


# ---------------------------------------------------------------------------
# output helpers

class OutputSink:
    def __init__(self, outdir: Path):
        self.outdir = outdir
        self.files: list[dict] = []
        outdir.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, content: str, kind: str):
        path = self.outdir / name
        path.write_text(content)
        self.files.append({"path": name, "kind": kind})

    def write_json(self, name: str, payload, kind: str = "json"):
        self.write(name, json.dumps(payload, sort_keys=True, indent=2) + "\n", kind)

    def manifest(self, command: str, seed: int, cfg: dict):
        payload = {
            "command": command,
            "seed": seed,
            "config_hash": config_hash(cfg),
            "files": sorted(self.files, key=lambda f: f["path"]),
        }
        path = self.outdir / "manifest.json"
        path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv(header: str, rows: list[tuple]) -> str:
    lines = [header]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands

def cmd_protocol_mc(cfg: dict, seed: int, sink: OutputSink, iterations: int | None,
                    quiet: bool) -> None:
    block = _get(cfg, "protocol_mc", default={})
    n_iter = iterations or block.get("iterations", 20_000)
    params = _ss_params(_get(cfg, "protocols.ss", kind=dict))

    rng = seeding.derive_rng(seed, "calibration")
    times = protocols.run_ss_batch(params, rng, n_iter)
    rows = []
    for i, t in enumerate(times):
        ok = not np.isnan(t)
        rows.append((i, float(t) if ok else None, "success" if ok else "exhausted"))
    sink.write("success_times.csv",
               _csv("iteration,success_time_s,status", rows), "csv")

    successes = times[~np.isnan(times)]
    if successes.size:
        fit = protocols.fit_lambda_ss(successes)
    else:
        fit = {"lambda_ss": 0.0, "r2": 0.0}
    sink.write_json("lambda_fit.json", {
        "lambda_ss": fit["lambda_ss"], "r2": fit["r2"],
        "n_success": int(successes.size),
        "n_exhausted": int(n_iter - successes.size)})

    grid_iter = block.get("grid_iterations", 2000)
    for field, grid_name, fname in (
            ("tau_reset", "tau0_grid", "lambda_vs_tau0.csv"),
            ("delta_omega", "delta_omega_grid", "lambda_vs_domega.csv")):
        grid = block.get(grid_name, [])
        if not grid:
            continue
        grows = []
        for i, value in enumerate(grid):
            p = protocols.ScattererScattererParams(
                params.lambda_source,
                value if field == "delta_omega" else params.delta_omega,
                value if field == "tau_reset" else params.tau_reset,
                sim_window=params.sim_window,
                max_iterations=params.max_iterations)
            cal = protocols.calibrate_lambda_ss(p, seed, grid_iter)
            grows.append((value, cal["lambda_ss"], cal["r2"], cal["n_success"]))
            if not quiet:
                print(f"[protocol-mc] {field}={value:g} lambda_ss={cal['lambda_ss']:.4g}",
                      file=sys.stderr)
        sink.write(fname, _csv(f"{field},lambda_ss,r2,n_success", grows), "csv")


def _load_circuit(path: Path) -> QuantumCircuit:
    try:
        text = path.read_text()
    except OSError as exc:
        raise CircuitParseError(f"cannot read circuit {path}: {exc}") from None
    if path.suffix == ".qasm":
        return parse_qasm(text)
    return parse_circuit(text)


def _identity_placement(circuit: QuantumCircuit, topo: topo_mod.NetworkTopology,
                        table: FidelityTable) -> Placement:
    qpus = topo.qpus
    if circuit.n_qubits > len(qpus):
        raise CompileError(f"identity placement needs {circuit.n_qubits} QPUs, "
                           f"topology has {len(qpus)}")
    qubit_to_qpu = [qpus[q] for q in range(circuit.n_qubits)]
    rack_of_qpu = {q: topo.rack_of[q] for q in qubit_to_qpu}
    counts = classify_counts(circuit, qubit_to_qpu, rack_of_qpu)
    return Placement(qubit_to_qpu, rack_of_qpu, *counts,
                     fidelity_cost(counts, table))


def cmd_single_job(cfg: dict, seed: int, sink: OutputSink, iterations: int | None,
                   quiet: bool, circuit_path: str | None) -> None:
    block = _get(cfg, "single_job", default={})
    path = circuit_path or block.get("circuit")
    if not path:
        raise ConfigError("missing field 'single_job.circuit' (or --circuit)")
    circuit = _load_circuit(Path(path))
    topo = build_topology(cfg)
    table = build_fidelity_table(cfg)
    timing = build_timing(cfg, seed)
    reps = iterations or block.get("reps", 100)
    mode = block.get("placement", "compile")
    if mode == "identity":
        placement = _identity_placement(circuit, topo, table)
    elif mode == "compile":
        placement = compile_circuit(circuit, topo, table,
                                    seeding.derive_rng(seed, "partition"))
    else:
        raise ConfigError(f"single_job.placement must be 'identity' or 'compile', "
                          f"got {mode!r}")
    schedule = schedule_single(build_dag(circuit), placement, topo)
    rng = seeding.derive_rng(seed, "timing")
    draws = [simulator.total_time(schedule, timing, rng) for _ in range(reps)]
    sink.write_json("placement.json", placement.to_dict())
    sink.write_json("schedule.json", schedule.to_dict())
    sink.write("timing.csv", _csv("rep,t_tot_s", list(enumerate(draws))), "csv")
    if not quiet:
        print(f"[single-job] rounds={schedule.n_rounds} "
              f"mean T_tot={float(np.mean(draws)) if draws else 0.0:.4g} s",
              file=sys.stderr)


def _traffic_classes(block: dict) -> list[TrafficClass]:
    classes = []
    for i, c in enumerate(_get(block, "classes", kind=list)):
        for field in ("label", "weight", "n_qpus", "n_qubits"):
            if field not in c:
                raise ConfigError(f"missing field 'traffic.classes[{i}].{field}'")
        classes.append(TrafficClass(c["label"], c["weight"], c["n_qpus"], c["n_qubits"]))
    if not classes:
        raise ConfigError("traffic.classes must not be empty")
    return classes


def cmd_sweep(cfg: dict, seed: int, sink: OutputSink, iterations: int | None,
              quiet: bool) -> None:
    block = _get(cfg, "traffic", kind=dict)
    classes = _traffic_classes(block)
    gammas = _get(block, "gammas", kind=list)
    if not gammas:
        raise ConfigError("traffic.gammas must not be empty")
    duration = block.get("duration", float("inf"))
    max_requests = block.get("max_requests")
    if not np.isfinite(duration) and max_requests is None:
        raise ConfigError("traffic needs a finite 'duration' or a 'max_requests' cap")
    reps = iterations or block.get("reps", 1)
    topo = build_topology(cfg)
    timing = build_timing(cfg, seed)
    policy = MultiJobPolicy(
        buffer_capacity=block.get("buffer_capacity", 4),
        placement=block.get("placement", "pack"),
        ebits_required=timing.ebits_required,
        tau_sw=timing.tau_sw,
        intra_model=timing.intra_model,
        inter_model=timing.inter_model,
        fidelity_table=build_fidelity_table(cfg),
        record_events=True)

    def progress(gamma, rep, point):
        if not quiet:
            print(f"[sweep] gamma={gamma:g} rep={rep} done={point.n_done} "
                  f"rejected={point.n_rejected} mean_jet={point.mean_jet:.4g}",
                  file=sys.stderr)

    points, results = simulator.experiment_sweep(
        topo, classes, gammas, duration, policy, seed, reps=reps,
        max_requests=max_requests, keep_results=True, progress=progress)

    header = ("gamma,rep,n_arrived,n_done,n_rejected,p_reject,"
              "mean_jet_s,mean_jct_s,mean_wait_s,throughput,usage,end_time_s")
    rows = [(p.gamma, p.rep, p.n_arrived, p.n_done, p.n_rejected, p.p_reject,
             p.mean_jet, p.mean_jct, p.mean_wait, p.throughput, p.usage,
             p.end_time) for p in points]
    sink.write("sweep.csv", _csv(header, rows), "csv")

    for gi, gamma in enumerate(gammas):
        sub = [p for p in points if p.gamma == gamma]
        agg = {"gamma": gamma, "n_reps": len(sub)}
        for key in ("p_reject", "mean_jet", "mean_jct", "mean_wait", "usage"):
            vals = [getattr(p, key) for p in sub]
            agg[key] = {"mean": float(np.mean(vals)),
                        "std": float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0}
        sink.write_json(f"summary_g{gi}.json", agg)
        rep0 = results[gi * reps]
        sink.write(f"jobs_g{gi}_rep0.csv", simulator.jobs_to_csv(rep0.jobs), "csv")
        sink.write(f"events_g{gi}_rep0.csv", events_to_csv(rep0.events), "csv")
        occ = simulator.rack_occupancy_distribution(rep0)
        occ_header = "rack," + ",".join(f"p_occ{k}" for k in range(occ.shape[1]))
        occ_rows = [(r, *(float(v) for v in occ[r])) for r in range(occ.shape[0])]
        sink.write(f"occupancy_g{gi}_rep0.csv", _csv(occ_header, occ_rows), "csv")


def cmd_compile_bench(cfg: dict, seed: int, sink: OutputSink, iterations: int | None,
                      quiet: bool, circuits_dir: str | None) -> None:
    block = _get(cfg, "compile_bench", default={})
    folder = circuits_dir or block.get("circuits")
    if not folder:
        raise ConfigError("missing field 'compile_bench.circuits' (or --circuits)")
    folder = Path(folder)
    if not folder.is_dir():
        raise ConfigError(f"compile_bench.circuits is not a directory: {folder}")
    baseline_runs = iterations or block.get("baseline_runs", 100)
    topo = build_topology(cfg)
    table = build_fidelity_table(cfg)
    cap = topo.inventory.data_qubits
    pool = topo.qpus

    rows = []
    n_skipped = 0
    names = sorted(p for p in folder.iterdir() if p.suffix in (".txt", ".qasm"))
    for ci, path in enumerate(names):
        try:
            circuit = _load_circuit(path)
        except CircuitParseError as exc:
            print(f"[compile-bench] skipping {path.name}: {exc}", file=sys.stderr)
            n_skipped += 1
            continue
        t0 = time.perf_counter()
        placement = compile_circuit(circuit, topo, table,
                                    seeding.derive_rng(seed, "partition", ci))
        t_compile = time.perf_counter() - t0

        base_costs = []
        t1 = time.perf_counter()
        k = max(1, -(-circuit.n_qubits // cap))
        for run in range(baseline_runs):
            rngb = seeding.derive_rng(seed, "baseline", ci, run)
            perm = rngb.permutation(circuit.n_qubits)
            qpu_pick = [pool[i] for i in sorted(rngb.permutation(len(pool))[:k])]
            slot_of = {int(q): pos // cap for pos, q in enumerate(perm)}
            qubit_to_qpu = [qpu_pick[slot_of[q]] for q in range(circuit.n_qubits)]
            rack_of_qpu = {q: topo.rack_of[q] for q in qpu_pick}
            counts = classify_counts(circuit, qubit_to_qpu, rack_of_qpu)
            base_costs.append(fidelity_cost(counts, table))
        t_base = (time.perf_counter() - t1) / max(1, baseline_runs)
        mean_base = float(np.mean(base_costs))
        rows.append((path.name, circuit.n_qubits, len(circuit.gates),
                     circuit.n_two_qubit, placement.c_fid, t_compile,
                     mean_base,
                     float(np.std(base_costs, ddof=1)) if len(base_costs) > 1 else 0.0,
                     t_base))
        if not quiet:
            print(f"[compile-bench] {path.name}: compiled={placement.c_fid:.4g} "
                  f"baseline={mean_base:.4g}", file=sys.stderr)

    header = ("circuit,n_qubits,n_gates,n_cnot,compiled_c_fid,compile_time_s,"
              "baseline_mean_c_fid,baseline_std_c_fid,baseline_time_s")
    sink.write("compile_bench.csv", _csv(header, rows), "csv")
    n_better = sum(1 for r in rows if r[4] <= r[6])
    sink.write_json("bench_summary.json", {
        "n_circuits": len(rows),
        "n_skipped": n_skipped,
        "n_compiled_not_worse": n_better,
        "baseline_runs": baseline_runs})


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(sub: argparse.ArgumentParser):
    sub.add_argument("--config", required=True, help="YAML config path")
    sub.add_argument("--seed", type=int, default=None,
                     help="master seed (overrides config)")
    sub.add_argument("--out", default=None, help="output directory (exact)")
    sub.add_argument("--iterations", type=int, default=None,
                     help="override the experiment's iteration/rep count")
    sub.add_argument("--quiet", action="store_true", help="suppress progress output")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdcsim",
        description="Quantum data center network simulation experiments.")
    subs = parser.add_subparsers(dest="command", required=True)
    _add_common(subs.add_parser("protocol-mc", help="entanglement protocol Monte Carlo"))
    p = subs.add_parser("single-job", help="place, schedule, and time one circuit")
    _add_common(p)
    p.add_argument("--circuit", default=None, help="circuit file (overrides config)")
    _add_common(subs.add_parser("sweep", help="multi-job arrival-rate sweep"))
    p = subs.add_parser("compile-bench", help="compiler vs random placement benchmark")
    _add_common(p)
    p.add_argument("--circuits", default=None,
                   help="directory of circuit files (overrides config)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else cfg.get("seed")
        if seed is None:
            raise ConfigError("missing field 'seed' (or pass --seed)")
        if args.out:
            outdir = Path(args.out)
        else:
            stamp = time.strftime("%Y%m%d-%H%M%S")
            base = Path(cfg.get("out", "runs"))
            outdir = base / f"{args.command}-{stamp}-seed{seed}"
        sink = OutputSink(outdir)
        if args.command == "protocol-mc":
            cmd_protocol_mc(cfg, seed, sink, args.iterations, args.quiet)
        elif args.command == "single-job":
            cmd_single_job(cfg, seed, sink, args.iterations, args.quiet, args.circuit)
        elif args.command == "sweep":
            cmd_sweep(cfg, seed, sink, args.iterations, args.quiet)
        elif args.command == "compile-bench":
            cmd_compile_bench(cfg, seed, sink, args.iterations, args.quiet,
                              args.circuits)
        sink.manifest(args.command, seed, cfg)
        print(outdir)
        return 0
    except CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
