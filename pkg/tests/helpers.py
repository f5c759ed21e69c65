"""Shared test utilities: random circuits and an independent dense-matrix oracle.

The oracle builds gate matrices from scratch and embeds them by explicit
basis enumeration, so it shares no code with the simulator's kernels.
"""
from __future__ import annotations

import cmath
import math
from pathlib import Path

import numpy as np

from vaqc.analyzer import load_registry
from vaqc.circuit import Circuit, Gate, GateKind, Measure

DATA = Path(__file__).parent / "data"
K = GateKind


def registry():
    return {b.id: b for b in load_registry(DATA / "registry.json")}


def one_qubit_matrix(kind: GateKind, theta: float | None = None) -> np.ndarray:
    r = 1 / math.sqrt(2)
    table = {
        K.I: [[1, 0], [0, 1]],
        K.X: [[0, 1], [1, 0]],
        K.Y: [[0, -1j], [1j, 0]],
        K.Z: [[1, 0], [0, -1]],
        K.H: [[r, r], [r, -r]],
        K.S: [[1, 0], [0, 1j]],
        K.SDG: [[1, 0], [0, -1j]],
        K.T: [[1, 0], [0, cmath.exp(1j * math.pi / 4)]],
        K.TDG: [[1, 0], [0, cmath.exp(-1j * math.pi / 4)]],
    }
    if kind in table:
        return np.array(table[kind], dtype=complex)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if kind is K.RX:
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind is K.RY:
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind is K.RZ:
        return np.diag([cmath.exp(-1j * theta / 2), cmath.exp(1j * theta / 2)])
    raise KeyError(kind)


def embed(gate: Gate, n: int) -> np.ndarray:
    """Full 2**n matrix of one gate, built by enumerating basis states."""
    dim = 2 ** n
    u = np.zeros((dim, dim), dtype=complex)
    if gate.kind.arity == 1:
        q = gate.qubits[0]
        m = one_qubit_matrix(gate.kind, gate.param)
        for col in range(dim):
            b = (col >> q) & 1
            for out_bit in (0, 1):
                row = (col & ~(1 << q)) | (out_bit << q)
                u[row, col] += m[out_bit, b]
        return u
    a, b = gate.qubits
    for col in range(dim):
        ba, bb = (col >> a) & 1, (col >> b) & 1
        row, amp = col, 1
        if gate.kind is K.CX and ba:
            row = col ^ (1 << b)
        elif gate.kind is K.CZ and ba and bb:
            amp = -1
        elif gate.kind is K.SWAP and ba != bb:
            row = col ^ (1 << a) ^ (1 << b)
        u[row, col] = amp
    return u


def dense_unitary(circuit: Circuit) -> np.ndarray:
    n = circuit.num_qubits
    u = np.eye(2 ** n, dtype=complex)
    for ins in circuit:
        assert isinstance(ins, Gate)
        u = embed(ins, n) @ u
    return u


def phase_equal(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    """Independent global-phase comparison via the best-fit phase <b, a>."""
    inner = np.vdot(b.ravel(), a.ravel())
    if abs(inner) == 0:
        return bool(np.max(np.abs(a)) <= tol and np.max(np.abs(b)) <= tol)
    phase = inner / abs(inner)
    return bool(np.max(np.abs(a - phase * b)) <= tol)


ALL_KINDS = list(GateKind)


def random_circuit(rng: np.random.Generator, num_qubits: int, num_gates: int,
                   kinds=ALL_KINDS, special_angles: bool = True) -> Circuit:
    """Measure-free random circuit. Gates repeat often so passes have work to do."""
    instrs = []
    for _ in range(num_gates):
        if instrs and rng.random() < 0.25:
            prev = instrs[-1]
            if all(q < num_qubits for q in prev.qubits):
                instrs.append(prev)
                continue
        kind = kinds[rng.integers(len(kinds))]
        if kind.arity == 2 and num_qubits < 2:
            kind = K.H
        qubits = tuple(int(q) for q in rng.choice(num_qubits, size=kind.arity, replace=False))
        theta = None
        if kind.num_params:
            if special_angles and rng.random() < 0.5:
                theta = float(rng.integers(-8, 9) * math.pi / 4)
            else:
                theta = float(rng.uniform(-2 * math.pi, 2 * math.pi))
        instrs.append(Gate(kind, qubits, theta))
    return Circuit(num_qubits, 0, instrs)


def with_measures(circuit: Circuit, qubits=None) -> Circuit:
    qubits = list(range(circuit.num_qubits)) if qubits is None else list(qubits)
    out = Circuit(circuit.num_qubits, len(qubits), circuit.instructions)
    for c, q in enumerate(qubits):
        out.append(Measure(q, c))
    return out


def isometry(layout: dict[int, int], n_logical: int, n_physical: int) -> np.ndarray:
    """Map logical basis |x> to the physical basis state with bit layout[q] = x_q, others 0."""
    e = np.zeros((2 ** n_physical, 2 ** n_logical))
    for x in range(2 ** n_logical):
        y = 0
        for q in range(n_logical):
            if (x >> q) & 1:
                y |= 1 << layout[q]
        e[y, x] = 1
    return e
