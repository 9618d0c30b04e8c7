"""Clifford and CZ noise reduction: circuits, frame Monte Carlo, bounds."""

from .bounds import (
    BoundReport,
    asymptotic_bound,
    choose_t_for_budget,
    clinr_bound,
    cznr_bound,
    default_params,
    g,
    single_stage_bound,
)
from .circuit import (
    Circuit,
    CircuitParseError,
    Operation,
    op,
    parse_circuit,
    serialize_circuit,
)
from .cliffords import (
    CliffordElement,
    sample_clifford,
    sample_gate_sequence,
    sample_random_clifford_circuit,
    synthesize,
)
from .clinr_protocol import ClinrParams, q_correction, resource_generators, run_clinr
from .cznr_protocol import (
    Graph,
    circuit_to_graph,
    graph_state_stabilizers,
    graph_to_circuit,
    injection_correction,
    run_cznr,
)
from .framesim import RunStats, run_direct, run_shot, wilson_interval
from .noise import NoiseModel, sample_fault, sample_idle_faults
from .pauli import PauliString, commutes, conjugate_through, pauli_mul, propagate
from .tableau import (
    StabilizerTableau,
    tableau_apply,
    tableau_from_circuit,
    tableau_measure,
)

__version__ = "0.1.0"
