"""OpenQASM 2.0 and Quil emitters."""
from __future__ import annotations

from math import pi

from .circuit import Circuit, GateKind, Measure
from .transpiler import TranspiledProgram
from .vaql import format_angle

K = GateKind


class CodegenError(ValueError):
    pass


QASM_NAMES = {
    K.I: "id", K.X: "x", K.Y: "y", K.Z: "z", K.H: "h", K.S: "s", K.SDG: "sdg",
    K.T: "t", K.TDG: "tdg", K.RX: "rx", K.RY: "ry", K.RZ: "rz",
    K.CX: "cx", K.CZ: "cz", K.SWAP: "swap",
}

QUIL_NAMES = {
    K.I: "I", K.X: "X", K.Y: "Y", K.Z: "Z", K.H: "H", K.S: "S", K.T: "T",
    K.RX: "RX", K.RY: "RY", K.RZ: "RZ", K.CX: "CNOT", K.CZ: "CZ", K.SWAP: "SWAP",
}
# Quil has no S-dagger / T-dagger standard gates; emitted as RZ (equal up to global phase)
QUIL_AS_RZ = {K.SDG: -pi / 2, K.TDG: -pi / 4}


def _circuit(program) -> Circuit:
    return program.circuit if isinstance(program, TranspiledProgram) else program


def emit_qasm2(program: TranspiledProgram | Circuit) -> str:
    c = _circuit(program)
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";',
             f"qreg q[{c.num_qubits}];", f"creg c[{max(c.num_cbits, 1)}];"]
    for ins in c:
        if isinstance(ins, Measure):
            lines.append(f"measure q[{ins.qubit}] -> c[{ins.cbit}];")
            continue
        name = QASM_NAMES.get(ins.kind)
        if name is None:  # pragma: no cover - every kind has a qelib1 name
            raise CodegenError(f"no OpenQASM 2.0 name for {ins.kind.mnemonic}")
        if ins.param is not None:
            name += f"({format_angle(ins.param)})"
        lines.append(f"{name} {','.join(f'q[{q}]' for q in ins.qubits)};")
    return "\n".join(lines) + "\n"


def emit_quil(program: TranspiledProgram | Circuit) -> str:
    c = _circuit(program)
    lines = []
    if c.has_measure():
        lines.append(f"DECLARE ro BIT[{c.num_cbits}]")
    for ins in c:
        if isinstance(ins, Measure):
            lines.append(f"MEASURE {ins.qubit} ro[{ins.cbit}]")
            continue
        qubits = " ".join(map(str, ins.qubits))
        if ins.kind in QUIL_AS_RZ:
            lines.append(f"RZ({format_angle(QUIL_AS_RZ[ins.kind])}) {qubits}")
            continue
        name = QUIL_NAMES.get(ins.kind)
        if name is None:  # pragma: no cover
            raise CodegenError(f"no Quil name for {ins.kind.mnemonic}")
        if ins.param is not None:
            name += f"({format_angle(ins.param)})"
        lines.append(f"{name} {qubits}")
    return "\n".join(lines) + "\n" if lines else ""


EMITTERS = {"qasm2": emit_qasm2, "quil": emit_quil}
