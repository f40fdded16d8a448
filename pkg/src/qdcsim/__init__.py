"""Quantum data center network simulation toolkit.

Modules: topology (fabric builders and path queries), protocols
(entanglement generation models and Monte Carlo), compiler (circuit
partitioning and rack assignment), scheduler (switching rounds and
multi-job admission), simulator (timing, workloads, sweeps), cli
(experiment entry points), seeding (reproducible stream derivation).
"""

from .compiler import (CircuitParseError, CompileError, FidelityTable, Placement,
                       QuantumCircuit, assign_racks_ilp, compile_circuit,
                       fidelity_cost, interaction_graph, parse_circuit, parse_qasm,
                       partition_circuit)
from .protocols import (ProtocolError, ProtocolModel, ScattererScattererParams,
                        EmitterEmitterFockParams, TimeBinParams, SS_BACKEND,
                        calibrate_lambda_ss, fit_lambda_ss, run_ss_batch,
                        sample_ebit_time, sample_ebit_times)
from .scheduler import (CircuitDag, JobRequest, MultiJobPolicy, MultiJobResult,
                        Schedule, SchedulingError, allocate_ilp, build_dag,
                        descendant_counts, run_multijob, schedule_single)
from .seeding import derive_rng
from .simulator import (SimulationError, TimingParams, TrafficClass,
                        experiment_sweep, generate_traffic, qpu_usage,
                        random_square_circuit, round_duration, single_job_stats,
                        total_time)
from .topology import (NetworkTopology, PathSpec, ResourceInventory, TopologyError,
                       build_clos, build_fat_tree, diameter, shortest_paths)

__version__ = "0.1.0"
