"""Vanilla and parity-encoded QAOA for signed Max-Cut, with stabilizer lower bounds and recursive QAOA."""

from .problem import Instance, brute_force_extrema, make_instance, random_instance
from .parity_map import ParityMapping, encode_complete, hypergraph_mapping, logical_lines, regular4_mapping
from .circuit import ParamVector, analytic_resources, build_parity_circuit, build_vanilla_circuit, cnot_metrics
from .clifford_sim import census, classical_vectors, lower_bound, lower_bound_batch
from .optimize import OptimizerConfig, metropolis_optimize, run_parity_qaoa, run_vanilla_qaoa
from .rqaoa import eliminate, run_rqaoa

__version__ = "0.1.0"

__all__ = [
    "Instance", "brute_force_extrema", "make_instance", "random_instance",
    "ParityMapping", "encode_complete", "hypergraph_mapping", "logical_lines", "regular4_mapping",
    "ParamVector", "analytic_resources", "build_parity_circuit", "build_vanilla_circuit", "cnot_metrics",
    "census", "classical_vectors", "lower_bound", "lower_bound_batch",
    "OptimizerConfig", "metropolis_optimize", "run_parity_qaoa", "run_vanilla_qaoa",
    "eliminate", "run_rqaoa",
]
