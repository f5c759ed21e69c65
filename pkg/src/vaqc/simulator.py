"""Dense statevector simulation.

Ordering convention: qubit k is bit k of the amplitude index (qubit 0 is the
least significant bit). Rendered bitstrings put classical bit 0 leftmost.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import cos, pi, sin, sqrt

import numpy as np

from .circuit import Circuit, Gate, GateKind, Measure

MAX_QUBITS = 20
MAX_UNITARY_QUBITS = 10
PROB_CUTOFF = 1e-12


class SimulationError(ValueError):
    pass


_S2 = 1 / sqrt(2)
_FIXED = {
    GateKind.I: np.eye(2, dtype=complex),
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    GateKind.H: np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    GateKind.S: np.array([[1, 0], [0, 1j]], dtype=complex),
    GateKind.SDG: np.array([[1, 0], [0, -1j]], dtype=complex),
    GateKind.T: np.array([[1, 0], [0, np.exp(1j * pi / 4)]], dtype=complex),
    GateKind.TDG: np.array([[1, 0], [0, np.exp(-1j * pi / 4)]], dtype=complex),
    # two-qubit matrices in the basis |q1 q0>, first listed qubit = q0
    GateKind.CX: np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex),
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(complex),
    GateKind.SWAP: np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def gate_matrix(kind: GateKind, param: float | None = None) -> np.ndarray:
    """Matrix of ``kind``. Two-qubit matrices index the first operand as the low bit."""
    if kind is GateKind.RX:
        c, s = cos(param / 2), sin(param / 2)
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if kind is GateKind.RY:
        c, s = cos(param / 2), sin(param / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind is GateKind.RZ:
        return np.array([[np.exp(-0.5j * param), 0], [0, np.exp(0.5j * param)]], dtype=complex)
    return _FIXED[kind].copy()


@dataclass
class Statevector:
    num_qubits: int
    amplitudes: np.ndarray

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.probabilities())))


@dataclass
class Distribution:
    num_bits: int
    probabilities: dict[str, float]

    def to_json(self) -> str:
        return json.dumps(dict(sorted(self.probabilities.items())))


@dataclass
class Histogram:
    shots: int
    counts: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(dict(sorted(self.counts.items())))


def apply_gate(state: np.ndarray, gate: Gate, num_qubits: int) -> None:
    """Apply ``gate`` in place to ``state`` of shape (2**n,) or (2**n, batch)."""
    batch = state.reshape(2 ** num_qubits, -1)
    kind = gate.kind
    if kind.arity == 1:
        if kind is GateKind.I:
            return
        q = gate.qubits[0]
        m = gate_matrix(kind, gate.param)
        v = batch.reshape(2 ** (num_qubits - q - 1), 2, 2 ** q, -1)
        a0 = v[:, 0].copy()
        a1 = v[:, 1]
        if m[0, 1] == 0 and m[1, 0] == 0:
            v[:, 0] *= m[0, 0]
            v[:, 1] *= m[1, 1]
            return
        v[:, 0] = m[0, 0] * a0 + m[0, 1] * a1
        v[:, 1] = m[1, 0] * a0 + m[1, 1] * a1
        return
    a, b = gate.qubits
    hi, lo = max(a, b), min(a, b)
    v = batch.reshape(2 ** (num_qubits - hi - 1), 2, 2 ** (hi - lo - 1), 2, 2 ** lo, -1)

    def sl(bit_a: int, bit_b: int):
        bits = {a: bit_a, b: bit_b}
        return (slice(None), bits[hi], slice(None), bits[lo])

    if kind is GateKind.CX:
        tmp = v[sl(1, 0)].copy()
        v[sl(1, 0)] = v[sl(1, 1)]
        v[sl(1, 1)] = tmp
    elif kind is GateKind.CZ:
        v[sl(1, 1)] *= -1
    elif kind is GateKind.SWAP:
        tmp = v[sl(1, 0)].copy()
        v[sl(1, 0)] = v[sl(0, 1)]
        v[sl(0, 1)] = tmp
    else:  # pragma: no cover - every two-qubit kind is handled above
        raise SimulationError(f"no kernel for {kind}")


def run_statevector(circuit: Circuit, max_qubits: int = MAX_QUBITS) -> Statevector:
    """Apply every gate of a measure-free circuit to |0...0>."""
    if circuit.has_measure():
        raise SimulationError("circuit contains measurements; use measurement_distribution")
    return _evolve(circuit, max_qubits)


def _evolve(circuit: Circuit, max_qubits: int) -> Statevector:
    n = circuit.num_qubits
    if n > max_qubits:
        raise SimulationError(f"{n} qubits exceeds the simulator cap of {max_qubits}")
    state = np.zeros(2 ** n, dtype=complex)
    state[0] = 1.0
    for ins in circuit:
        if isinstance(ins, Gate):
            apply_gate(state, ins, n)
    return Statevector(n, state)


def measurement_distribution(circuit: Circuit, max_qubits: int = MAX_QUBITS) -> Distribution:
    """Exact outcome probabilities of the circuit's classical register.

    Measurements are terminal, so the measure-free part is simulated and
    |amplitude|^2 is marginalised onto the measured bits. Unwritten bits read 0.
    """
    measures = circuit.measures
    if not measures:
        raise SimulationError("circuit has no measurements; the distribution would be empty")
    probs = _evolve(circuit, max_qubits).probabilities()
    return _marginal(probs, measures, circuit.num_cbits)


def _marginal(probs: np.ndarray, measures: list[Measure], num_cbits: int) -> Distribution:
    idx = np.arange(probs.size)
    key = np.zeros(probs.size, dtype=np.int64)
    for m in measures:
        # cbit 0 is the leftmost character, i.e. the most significant bit of the key
        key |= ((idx >> m.qubit) & 1) << (num_cbits - 1 - m.cbit)
    totals = np.bincount(key, weights=probs, minlength=2 ** num_cbits)
    out = {format(k, f"0{num_cbits}b"): float(p)
           for k, p in enumerate(totals) if p >= PROB_CUTOFF}
    return Distribution(num_cbits, out)


def sample(dist: Distribution, shots: int, seed: int = 0) -> Histogram:
    """Draw ``shots`` outcomes from ``dist`` with a seeded PCG64 generator."""
    if shots < 1:
        raise SimulationError("shots must be at least 1")
    keys = sorted(dist.probabilities)
    p = np.array([dist.probabilities[k] for k in keys])
    rng = np.random.Generator(np.random.PCG64(seed & 0xFFFFFFFFFFFFFFFF))
    draws = rng.multinomial(shots, p / p.sum())
    return Histogram(shots, {k: int(c) for k, c in zip(keys, draws) if c})


def execute(circuit: Circuit, shots: int, seed: int = 0) -> Histogram:
    return sample(measurement_distribution(circuit), shots, seed)


def circuit_unitary(circuit: Circuit, max_qubits: int = MAX_UNITARY_QUBITS) -> np.ndarray:
    """Full 2**n x 2**n matrix of a measure-free circuit."""
    n = circuit.num_qubits
    if n > max_qubits:
        raise SimulationError(f"{n} qubits exceeds the unitary cap of {max_qubits}")
    if circuit.has_measure():
        raise SimulationError("circuit contains measurements")
    u = np.eye(2 ** n, dtype=complex)
    for ins in circuit:
        apply_gate(u, ins, n)
    return u


def equivalent_up_to_global_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    """True iff ``a`` ~= phase * ``b`` elementwise, phase taken from b's largest entry."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    k = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[k]) == 0:
        return bool(np.max(np.abs(a), initial=0.0) <= tol)
    ratio = a[k] / b[k]
    if abs(ratio) == 0:
        return False
    phase = ratio / abs(ratio)
    return bool(np.max(np.abs(a - phase * b)) <= tol)
