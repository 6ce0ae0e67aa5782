"""Variational quantum classifiers for graph connectivity, audited on edge cases."""

__version__ = "0.1.0"

from .ansatz import (  # noqa: E402
    AnsatzKind,
    build_ansatz,
    build_cyclic_invariant,
    build_permutation_invariant,
    build_standard,
    compose,
    embed_graph,
)
from .estimator import GraphConnectivityClassifier  # noqa: E402
from .graphs import (  # noqa: E402
    Graph,
    LabeledGraph,
    connectedness_probability,
    edge_case_catalog,
    is_connected,
    sample_balanced_batch,
    sample_er,
)
from .simulator import (  # noqa: E402
    CircuitIR,
    Gate,
    GateKind,
    StateVector,
    apply_gate,
    expectation_z_all,
    gradient,
    run_circuit,
)

__all__ = [
    "AnsatzKind",
    "CircuitIR",
    "Gate",
    "GateKind",
    "Graph",
    "GraphConnectivityClassifier",
    "LabeledGraph",
    "StateVector",
    "apply_gate",
    "build_ansatz",
    "build_cyclic_invariant",
    "build_permutation_invariant",
    "build_standard",
    "compose",
    "connectedness_probability",
    "edge_case_catalog",
    "embed_graph",
    "expectation_z_all",
    "gradient",
    "is_connected",
    "run_circuit",
    "sample_balanced_batch",
    "sample_er",
]
