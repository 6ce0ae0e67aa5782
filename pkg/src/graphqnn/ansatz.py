"""Graph embedding and the three layered ansatz families.

Every builder returns a :class:`~graphqnn.simulator.CircuitIR`. Gates that
share a slot share one trainable value; that sharing is what makes the
permutation- and cyclic-invariant families symmetric.
"""
from __future__ import annotations

import enum
from itertools import combinations

from .graphs import Graph
from .simulator import CircuitIR, Gate, GateKind, SimulationError


class AnsatzKind(str, enum.Enum):
    PERMUTATION_INVARIANT = "perm"
    CYCLIC_INVARIANT = "cyclic"
    STANDARD = "standard"

    @property
    def default_layers(self) -> int:
        return DEFAULT_LAYERS[self]


# roughly 120 trainable values each for n = 8
DEFAULT_LAYERS = {
    AnsatzKind.PERMUTATION_INVARIANT: 40,
    AnsatzKind.CYCLIC_INVARIANT: 30,
    AnsatzKind.STANDARD: 3,
}


def embed_graph(g: Graph) -> CircuitIR:
    """H on every qubit, one CZ per edge, then H on every qubit again."""
    n = g.n_nodes
    hs = [Gate(GateKind.H, (q,)) for q in range(n)]
    czs = [Gate(GateKind.CZ, edge) for edge in g.edges]
    return CircuitIR(n, hs + czs + hs, 0)


def _rotation_columns(n: int, slot_x: int, slot_y: int) -> list[Gate]:
    return [Gate(GateKind.RX, (q,), (slot_x,)) for q in range(n)] + [
        Gate(GateKind.RY, (q,), (slot_y,)) for q in range(n)
    ]


def _check_layers(layers: int) -> None:
    if layers < 1:
        raise SimulationError(f"layers must be >= 1, got {layers}")


def build_permutation_invariant(n: int, layers: int = 40) -> CircuitIR:
    """Shared RX column, shared RY column, then one shared RZZ on every pair."""
    if n < 2:
        raise SimulationError("the permutation-invariant ansatz needs n >= 2")
    _check_layers(layers)
    gates = []
    for layer in range(layers):
        sx, sy, szz = 3 * layer, 3 * layer + 1, 3 * layer + 2
        gates += _rotation_columns(n, sx, sy)
        gates += [Gate(GateKind.RZZ, pair, (szz,)) for pair in combinations(range(n), 2)]
    return CircuitIR(n, gates, 3 * layers)


def ring_pairs(n: int, distance: int) -> list[tuple[int, int]]:
    """Pairs ``{i, i + distance mod n}`` as sorted tuples in lexicographic order."""
    return sorted({tuple(sorted((i, (i + distance) % n))) for i in range(n)})


def build_cyclic_invariant(n: int, layers: int = 30) -> CircuitIR:
    """Shared RX/RY columns, RZZ on the distance-1 ring, RZZ on the distance-2 ring."""
    if n < 3:
        raise SimulationError("the cyclic-invariant ansatz needs n >= 3")
    _check_layers(layers)
    near, far = ring_pairs(n, 1), ring_pairs(n, 2)
    gates = []
    for layer in range(layers):
        s = 4 * layer
        gates += _rotation_columns(n, s, s + 1)
        gates += [Gate(GateKind.RZZ, pair, (s + 2,)) for pair in near]
        gates += [Gate(GateKind.RZZ, pair, (s + 3,)) for pair in far]
    return CircuitIR(n, gates, 4 * layers)


def build_standard(n: int, drawn_layers: int = 3, sub_blocks: int | None = None) -> CircuitIR:
    """Strongly-entangling template with no parameter sharing.

    A drawn layer is two sub-blocks. Sub-block ``k`` (counting from 0) puts a
    U3 with three fresh slots on every qubit, then CNOTs ``i -> (i + r) mod n``
    for every ``i`` with range ``r = 1 + k % 2``. ``sub_blocks`` overrides the
    count, e.g. 5 sub-blocks give exactly 120 slots on eight qubits.
    """
    if n < 3:
        raise SimulationError("the standard ansatz needs n >= 3")
    _check_layers(drawn_layers)
    blocks = 2 * drawn_layers if sub_blocks is None else sub_blocks
    _check_layers(blocks)
    gates = []
    slot = 0
    for k in range(blocks):
        for q in range(n):
            gates.append(Gate(GateKind.U3, (q,), (slot, slot + 1, slot + 2)))
            slot += 3
        r = 1 + k % 2
        gates += [Gate(GateKind.CNOT, (i, (i + r) % n)) for i in range(n)]
    return CircuitIR(n, gates, slot)


def build_ansatz(kind, n: int, layers: int | None = None) -> CircuitIR:
    kind = AnsatzKind(kind)
    layers = kind.default_layers if layers is None else layers
    if kind is AnsatzKind.PERMUTATION_INVARIANT:
        return build_permutation_invariant(n, layers)
    if kind is AnsatzKind.CYCLIC_INVARIANT:
        return build_cyclic_invariant(n, layers)
    return build_standard(n, layers)


def compose(first: CircuitIR, second: CircuitIR) -> CircuitIR:
    """``first`` followed by ``second`` on the same register and parameter vector."""
    if first.n_qubits != second.n_qubits:
        raise SimulationError(
            f"cannot compose circuits on {first.n_qubits} and {second.n_qubits} qubits"
        )
    return CircuitIR(
        first.n_qubits,
        first.gates + second.gates,
        max(first.slot_count, second.slot_count),
    )
