import numpy as np
import pytest

from graphqnn.simulator import CircuitIR, Gate, GateKind, StateVector


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_state(n, rng):
    amps = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return StateVector(n, amps / np.linalg.norm(amps))


def random_circuit(n, n_gates, rng, slot_count=4):
    """Random mix of every gate kind over ``slot_count`` shared slots."""
    kinds = list(GateKind)
    gates = []
    for _ in range(n_gates):
        kind = kinds[rng.integers(len(kinds))]
        if kind in (GateKind.H, GateKind.RX, GateKind.RY, GateKind.U3):
            wires = (int(rng.integers(n)),)
        else:
            wires = tuple(int(w) for w in rng.choice(n, 2, replace=False))
        n_slots = {GateKind.RX: 1, GateKind.RY: 1, GateKind.RZZ: 1, GateKind.U3: 3}.get(kind, 0)
        slots = tuple(int(s) for s in rng.integers(slot_count, size=n_slots))
        gates.append(Gate(kind, wires, slots))
    return CircuitIR(n, gates, slot_count)


_ACCEPTANCE = []


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
