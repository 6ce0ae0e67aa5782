"""Dense statevector simulation with shared-parameter gradients.

Conventions
-----------
* Qubit 0 is the least-significant bit of the basis-state index.
* ``RX(t) = exp(-i t X / 2)``, ``RY(t) = exp(-i t Y / 2)``,
  ``RZZ(t) = exp(-i t Z⊗Z / 2)``.
* ``U3(a, b, c) = RZ(a) RY(b) RZ(c)``, i.e. ``RZ(c)`` is applied first.

:func:`apply_gate` is the matrix-level reference and has value semantics.
:func:`run_circuit`, :func:`gradient` and :func:`circuit_unitary` compile the
circuit into an opcode table once and execute it with numba kernels on a
private working buffer; inputs are never mutated.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numba
import numpy as np

MAX_QUBITS = 14
NORM_ATOL = 1e-12


class SimulationError(ValueError):
    """Raised for malformed gates, states or circuit/parameter mismatches."""


class GateKind(str, enum.Enum):
    H = "H"
    CZ = "CZ"
    CNOT = "CNOT"
    RX = "RX"
    RY = "RY"
    RZZ = "RZZ"
    U3 = "U3"


_ARITY = {
    GateKind.H: (1, 0),
    GateKind.CZ: (2, 0),
    GateKind.CNOT: (2, 0),
    GateKind.RX: (1, 1),
    GateKind.RY: (1, 1),
    GateKind.RZZ: (2, 1),
    GateKind.U3: (1, 3),
}


@dataclass(frozen=True)
class Gate:
    """One gate. For CNOT, ``wires = (control, target)``.

    Parameterized kinds reference trainable values through ``slots``, which
    index into the parameter vector. U3 takes ``(slot_a, slot_b, slot_c)``.
    """

    kind: GateKind
    wires: tuple[int, ...]
    slots: tuple[int, ...] = ()

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "wires", tuple(int(w) for w in self.wires))
        object.__setattr__(self, "slots", tuple(int(s) for s in self.slots))
        n_wires, n_slots = _ARITY[kind]
        if len(self.wires) != n_wires:
            raise SimulationError(f"{kind.value} takes {n_wires} wire(s), got {self.wires}")
        if len(self.slots) != n_slots:
            raise SimulationError(f"{kind.value} takes {n_slots} slot(s), got {self.slots}")
        if len(set(self.wires)) != len(self.wires):
            raise SimulationError(f"wires must be distinct, got {self.wires}")
        if any(w < 0 for w in self.wires) or any(s < 0 for s in self.slots):
            raise SimulationError("wire and slot indices must be non-negative")

    def __str__(self):
        wires = ",".join(map(str, self.wires))
        slots = ",".join(map(str, self.slots)) if self.slots else "-"
        return f"{self.kind.value} {wires} {slots}"


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized ``2**n_qubits`` complex amplitudes. The array is read-only."""

    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise SimulationError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != 2**self.n_qubits:
            raise SimulationError(
                f"expected {2 ** self.n_qubits} amplitudes, got {amps.shape[0]}"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(2**n_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def from_array(cls, amplitudes) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        n = int(round(np.log2(max(amps.shape[0], 1))))
        return cls(n, amps)

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


@dataclass(frozen=True, eq=True)
class CircuitIR:
    """Ordered gate list with shared parameter slots.

    Construction checks that every referenced slot is ``< slot_count`` and that
    wires fit ``n_qubits``. Whether every slot is referenced at least once is
    a property of well-formed ansatzes, checked by :meth:`unreferenced_slots`.
    """

    n_qubits: int
    gates: tuple[Gate, ...]
    slot_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise SimulationError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        if self.slot_count < 0:
            raise SimulationError("slot_count must be non-negative")
        for gate in self.gates:
            _check_gate(gate, self.n_qubits, self.slot_count)

    def __len__(self):
        return len(self.gates)

    def unreferenced_slots(self) -> list[int]:
        used = {s for g in self.gates for s in g.slots}
        return [s for s in range(self.slot_count) if s not in used]

    def dump(self) -> str:
        """One gate per line as ``KIND wires slots``."""
        return "".join(f"{g}\n" for g in self.gates)

    @cached_property
    def program(self) -> "_Program":
        return _Program.compile(self)


def _check_gate(gate: Gate, n_qubits: int, slot_count: int | None) -> None:
    if any(w >= n_qubits for w in gate.wires):
        raise SimulationError(f"wire out of range for {n_qubits} qubits: {gate}")
    if slot_count is not None and any(s >= slot_count for s in gate.slots):
        raise SimulationError(f"slot out of range for {slot_count} slots: {gate}")


def _as_params(params, slot_count: int) -> np.ndarray:
    theta = np.ascontiguousarray(params, dtype=np.float64).reshape(-1)
    if theta.shape[0] != slot_count:
        raise SimulationError(
            f"circuit declares {slot_count} slots but {theta.shape[0]} parameters were given"
        )
    return theta


def _as_state(state, n_qubits: int | None = None) -> StateVector:
    if not isinstance(state, StateVector):
        state = StateVector.from_array(state)
    if n_qubits is not None and state.n_qubits != n_qubits:
        raise SimulationError(
            f"circuit acts on {n_qubits} qubits but the state has {state.n_qubits}"
        )
    return state


# --------------------------------------------------------------------------
# matrix-level reference


_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
_CZ = np.diag([1, 1, 1, -1]).astype(np.complex128)
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
)


def _rx(t):
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _ry(t):
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def _rz(t):
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def _rzz(t):
    a, b = np.exp(-0.5j * t), np.exp(0.5j * t)
    return np.diag([a, b, b, a])


def gate_matrix(gate: Gate, params=()) -> np.ndarray:
    """Unitary of ``gate`` in the basis ``|w0 w1>`` (first wire most significant)."""
    theta = [float(params[s]) for s in gate.slots]
    kind = gate.kind
    if kind is GateKind.H:
        return _H.copy()
    if kind is GateKind.CZ:
        return _CZ.copy()
    if kind is GateKind.CNOT:
        return _CNOT.copy()
    if kind is GateKind.RX:
        return _rx(theta[0])
    if kind is GateKind.RY:
        return _ry(theta[0])
    if kind is GateKind.RZZ:
        return _rzz(theta[0])
    a, b, c = theta
    return _rz(a) @ _ry(b) @ _rz(c)


def apply_gate(state: StateVector, gate: Gate, params=()) -> StateVector:
    """Return ``gate`` applied to ``state``. ``state`` is left unchanged."""
    state = _as_state(state)
    n = state.n_qubits
    _check_gate(gate, n, None)
    if any(s >= len(params) for s in gate.slots):
        raise SimulationError(f"slot out of range for {len(params)} parameters: {gate}")
    mat = gate_matrix(gate, params)
    k = len(gate.wires)
    # axis of qubit q in the (2,)*n tensor is n-1-q
    axes = [n - 1 - w for w in gate.wires]
    psi = state.amplitudes.reshape((2,) * n)
    out = np.tensordot(mat.reshape((2,) * (2 * k)), psi, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return StateVector(n, out.reshape(-1))


def parity_signs(n_qubits: int) -> np.ndarray:
    """``(-1)**popcount(b)`` for every basis index ``b``."""
    idx = np.arange(2**n_qubits)
    bits = (idx[:, None] >> np.arange(n_qubits)) & 1
    return np.where(bits.sum(axis=1) % 2 == 0, 1.0, -1.0)


def expectation_z_all(state: StateVector) -> float:
    """Exact ``<Z⊗...⊗Z>`` of a normalized state."""
    state = _as_state(state)
    probs = np.abs(state.amplitudes) ** 2
    return float(probs @ parity_signs(state.n_qubits))


# --------------------------------------------------------------------------
# compiled execution

_OP_H, _OP_CZ, _OP_CNOT, _OP_RX, _OP_RY, _OP_RZ, _OP_RZZ = range(7)
_SIMPLE_OPS = {
    GateKind.H: _OP_H,
    GateKind.CZ: _OP_CZ,
    GateKind.CNOT: _OP_CNOT,
    GateKind.RX: _OP_RX,
    GateKind.RY: _OP_RY,
    GateKind.RZZ: _OP_RZZ,
}


@dataclass(frozen=True)
class _Program:
    """Opcode table: one row ``(opcode, wire_a, wire_b, slot)`` per primitive."""

    n_qubits: int
    slot_count: int
    ops: np.ndarray

    @classmethod
    def compile(cls, circuit: CircuitIR) -> "_Program":
        rows = []
        for g in circuit.gates:
            w = g.wires + (-1,) * (2 - len(g.wires))
            if g.kind is GateKind.U3:
                a, b, c = g.slots
                rows += [(_OP_RZ, w[0], -1, c), (_OP_RY, w[0], -1, b), (_OP_RZ, w[0], -1, a)]
            else:
                slot = g.slots[0] if g.slots else -1
                rows.append((_SIMPLE_OPS[g.kind], w[0], w[1], slot))
        ops = np.array(rows, dtype=np.int64).reshape(-1, 4)
        ops.flags.writeable = False
        return cls(circuit.n_qubits, circuit.slot_count, ops)


@numba.njit(cache=True)
def _apply_op(psi, op, a, b, theta, sign):
    """In-place primitive on ``psi``; ``sign=-1`` applies the inverse."""
    dim = psi.shape[0]
    if op == _OP_H:
        r = 1.0 / np.sqrt(2.0)
        m = 1 << a
        for i in range(dim):
            if i & m == 0:
                x, y = psi[i], psi[i | m]
                psi[i] = r * (x + y)
                psi[i | m] = r * (x - y)
    elif op == _OP_CZ:
        m = (1 << a) | (1 << b)
        for i in range(dim):
            if i & m == m:
                psi[i] = -psi[i]
    elif op == _OP_CNOT:
        mc, mt = 1 << a, 1 << b
        for i in range(dim):
            if i & mc and not i & mt:
                j = i | mt
                psi[i], psi[j] = psi[j], psi[i]
    elif op == _OP_RX or op == _OP_RY:
        half = 0.5 * sign * theta
        c, s = np.cos(half), np.sin(half)
        m = 1 << a
        for i in range(dim):
            if i & m == 0:
                x, y = psi[i], psi[i | m]
                if op == _OP_RX:
                    psi[i] = c * x - 1j * s * y
                    psi[i | m] = -1j * s * x + c * y
                else:
                    psi[i] = c * x - s * y
                    psi[i | m] = s * x + c * y
    elif op == _OP_RZ:
        half = 0.5 * sign * theta
        lo = np.cos(half) - 1j * np.sin(half)
        hi = np.cos(half) + 1j * np.sin(half)
        m = 1 << a
        for i in range(dim):
            if i & m:
                psi[i] *= hi
            else:
                psi[i] *= lo
    elif op == _OP_RZZ:
        half = 0.5 * sign * theta
        even = np.cos(half) - 1j * np.sin(half)
        odd = np.cos(half) + 1j * np.sin(half)
        for i in range(dim):
            if ((i >> a) ^ (i >> b)) & 1:
                psi[i] *= odd
            else:
                psi[i] *= even


@numba.njit(cache=True)
def _generator_overlap_imag(lam, psi, op, a, b):
    """``Im <lam| G |psi>`` for the Pauli generator ``G`` of a rotation opcode."""
    acc = 0.0
    dim = psi.shape[0]
    if op == _OP_RX:
        m = 1 << a
        for i in range(dim):
            acc += (np.conj(lam[i]) * psi[i ^ m]).imag
    elif op == _OP_RY:
        m = 1 << a
        for i in range(dim):
            # Y|0> = i|1>, Y|1> = -i|0>
            if i & m:
                acc += (np.conj(lam[i]) * 1j * psi[i ^ m]).imag
            else:
                acc += (np.conj(lam[i]) * -1j * psi[i ^ m]).imag
    elif op == _OP_RZ:
        m = 1 << a
        for i in range(dim):
            v = (np.conj(lam[i]) * psi[i]).imag
            acc += -v if i & m else v
    elif op == _OP_RZZ:
        for i in range(dim):
            v = (np.conj(lam[i]) * psi[i]).imag
            acc += -v if ((i >> a) ^ (i >> b)) & 1 else v
    return acc


@numba.njit(cache=True)
def _run_ops(psi, ops, theta):
    for k in range(ops.shape[0]):
        slot = ops[k, 3]
        t = theta[slot] if slot >= 0 else 0.0
        _apply_op(psi, ops[k, 0], ops[k, 1], ops[k, 2], t, 1.0)


@numba.njit(cache=True)
def _parity_expectation(psi):
    acc = 0.0
    for i in range(psi.shape[0]):
        p = psi[i].real ** 2 + psi[i].imag ** 2
        x = i
        odd = 0
        while x:
            odd ^= x & 1
            x >>= 1
        acc += -p if odd else p
    return acc


@numba.njit(cache=True)
def _adjoint_sweep(psi, ops, theta, slot_count):
    """Reverse-mode sweep over the final state ``psi`` (consumed in place)."""
    grad = np.zeros(slot_count)
    lam = psi.copy()
    for i in range(lam.shape[0]):
        x = i
        odd = 0
        while x:
            odd ^= x & 1
            x >>= 1
        if odd:
            lam[i] = -lam[i]
    for k in range(ops.shape[0] - 1, -1, -1):
        op, a, b, slot = ops[k, 0], ops[k, 1], ops[k, 2], ops[k, 3]
        t = theta[slot] if slot >= 0 else 0.0
        if slot >= 0:
            grad[slot] += _generator_overlap_imag(lam, psi, op, a, b)
        _apply_op(psi, op, a, b, t, -1.0)
        _apply_op(lam, op, a, b, t, -1.0)
    return grad


@numba.njit(cache=True)
def _unitary(ops, theta, dim):
    u = np.zeros((dim, dim), dtype=np.complex128)
    col = np.zeros(dim, dtype=np.complex128)
    for j in range(dim):
        col[:] = 0.0
        col[j] = 1.0
        _run_ops(col, ops, theta)
        u[:, j] = col
    return u


def _prepare(circuit: CircuitIR, params, state):
    theta = _as_params(params, circuit.slot_count)
    if state is None:
        state = StateVector.zero(circuit.n_qubits)
    state = _as_state(state, circuit.n_qubits)
    return theta, state.amplitudes.copy()


def final_state(circuit: CircuitIR, params, state: StateVector | None = None) -> StateVector:
    """State after applying every gate of ``circuit`` to ``state`` (default ``|0...0>``)."""
    theta, psi = _prepare(circuit, params, state)
    _run_ops(psi, circuit.program.ops, theta)
    return StateVector(circuit.n_qubits, psi)


def run_circuit(circuit: CircuitIR, params, state: StateVector | None = None) -> float:
    """``<Z⊗n>`` after running ``circuit`` on ``state`` (default ``|0...0>``)."""
    theta, psi = _prepare(circuit, params, state)
    _run_ops(psi, circuit.program.ops, theta)
    return float(_parity_expectation(psi))


def gradient(circuit: CircuitIR, params, state: StateVector | None = None) -> np.ndarray:
    """Exact ``d<Z⊗n>/dtheta`` per slot, summed over gates that share a slot.

    Uses an adjoint sweep: one forward pass, then one reverse pass that
    un-computes the state while propagating ``Z⊗n |psi>`` backwards.
    """
    theta, psi = _prepare(circuit, params, state)
    ops = circuit.program.ops
    _run_ops(psi, ops, theta)
    return _adjoint_sweep(psi, ops, theta, circuit.slot_count)


def value_and_gradient(
    circuit: CircuitIR, params, state: StateVector | None = None
) -> tuple[float, np.ndarray]:
    theta, psi = _prepare(circuit, params, state)
    ops = circuit.program.ops
    _run_ops(psi, ops, theta)
    value = float(_parity_expectation(psi))
    return value, _adjoint_sweep(psi, ops, theta, circuit.slot_count)


def circuit_unitary(circuit: CircuitIR, params) -> np.ndarray:
    """Dense ``2**n x 2**n`` unitary of ``circuit``. Meant for small ``n``."""
    theta = _as_params(params, circuit.slot_count)
    return _unitary(circuit.program.ops, theta, 2**circuit.n_qubits)


def batch_expectation(unitary: np.ndarray, states: np.ndarray) -> np.ndarray:
    """``<Z⊗n>`` of ``unitary @ s`` for each column ``s`` of ``states``."""
    out = unitary @ states
    n = int(round(np.log2(unitary.shape[0])))
    return parity_signs(n) @ (out.real**2 + out.imag**2)
