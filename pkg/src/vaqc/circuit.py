"""Vendor-agnostic circuit IR.

A :class:`Circuit` is an ordered list of :class:`Gate` and :class:`Measure`
instructions over a quantum and a classical register. All qubits start in
|0>. Measurement is terminal per qubit: once a qubit is measured, no further
instruction may touch it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence, Union


class CircuitError(ValueError):
    """Raised when an instruction would break a circuit invariant."""


class GateKind(Enum):
    I = "i"
    X = "x"
    Y = "y"
    Z = "z"
    H = "h"
    S = "s"
    SDG = "sdg"
    T = "t"
    TDG = "tdg"
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    CX = "cx"
    CZ = "cz"
    SWAP = "swap"

    @property
    def mnemonic(self) -> str:
        return self.value

    @property
    def arity(self) -> int:
        return 2 if self in _TWO_QUBIT else 1

    @property
    def num_params(self) -> int:
        return 1 if self in ROTATIONS else 0

    @classmethod
    def from_mnemonic(cls, name: str) -> "GateKind":
        try:
            return cls(name)
        except ValueError:
            raise CircuitError(f"unknown gate mnemonic {name!r}") from None


_TWO_QUBIT = frozenset({GateKind.CX, GateKind.CZ, GateKind.SWAP})
ROTATIONS = frozenset({GateKind.RX, GateKind.RY, GateKind.RZ})


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    qubits: tuple[int, ...]
    param: float | None = None

    def __post_init__(self):
        qubits = tuple(self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if len(qubits) != self.kind.arity:
            raise CircuitError(
                f"{self.kind.mnemonic} acts on {self.kind.arity} qubit(s), got {len(qubits)}")
        if (self.param is None) != (self.kind.num_params == 0):
            raise CircuitError(f"{self.kind.mnemonic} takes {self.kind.num_params} parameter(s)")

    def __str__(self) -> str:
        arg = "" if self.param is None else f"({self.param})"
        return f"{self.kind.mnemonic}{arg} {', '.join(map(str, self.qubits))}"


@dataclass(frozen=True)
class Measure:
    qubit: int
    cbit: int

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)

    def __str__(self) -> str:
        return f"measure {self.qubit} -> {self.cbit}"


Instruction = Union[Gate, Measure]


@dataclass(frozen=True)
class Violation:
    position: int
    message: str


class Circuit:
    """Ordered instruction list over ``num_qubits`` qubits and ``num_cbits`` bits.

    The constructor does not check the instruction list; use :meth:`append`
    (or :func:`validate`) when the input is untrusted.
    """

    def __init__(self, num_qubits: int, num_cbits: int = 0,
                 instructions: Iterable[Instruction] = ()):
        if num_qubits < 1:
            raise CircuitError("a circuit needs at least one qubit")
        if num_cbits < 0:
            raise CircuitError("num_cbits must be non-negative")
        self.num_qubits = num_qubits
        self.num_cbits = num_cbits
        self._instructions: list[Instruction] = list(instructions)

    @property
    def instructions(self) -> tuple[Instruction, ...]:
        return tuple(self._instructions)

    def __len__(self) -> int:
        return len(self._instructions)

    def __iter__(self):
        return iter(self._instructions)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.num_qubits == other.num_qubits and self.num_cbits == other.num_cbits
                and self._instructions == other._instructions)

    def __repr__(self) -> str:
        body = "; ".join(map(str, self._instructions))
        return f"Circuit({self.num_qubits}q, {self.num_cbits}c: [{body}])"

    def copy(self) -> "Circuit":
        return Circuit(self.num_qubits, self.num_cbits, self._instructions)

    @property
    def gates(self) -> list[Gate]:
        return [ins for ins in self._instructions if isinstance(ins, Gate)]

    @property
    def measures(self) -> list[Measure]:
        return [ins for ins in self._instructions if isinstance(ins, Measure)]

    def has_measure(self) -> bool:
        return any(isinstance(ins, Measure) for ins in self._instructions)

    def append(self, instr: Instruction) -> "Circuit":
        """Append ``instr`` if the circuit stays valid; raise CircuitError otherwise."""
        measured = {m.qubit for m in self.measures}
        written = {m.cbit for m in self.measures}
        problem = _check(instr, self.num_qubits, self.num_cbits, measured, written)
        if problem:
            raise CircuitError(problem)
        self._instructions.append(instr)
        return self

    def extend(self, instrs: Iterable[Instruction]) -> "Circuit":
        for instr in instrs:
            self.append(instr)
        return self

    # builder shorthands
    def gate(self, kind: GateKind | str, *qubits: int, param: float | None = None) -> "Circuit":
        if isinstance(kind, str):
            kind = GateKind.from_mnemonic(kind)
        return self.append(Gate(kind, qubits, param))

    def h(self, q: int) -> "Circuit":
        return self.gate(GateKind.H, q)

    def x(self, q: int) -> "Circuit":
        return self.gate(GateKind.X, q)

    def cx(self, control: int, target: int) -> "Circuit":
        return self.gate(GateKind.CX, control, target)

    def rx(self, theta: float, q: int) -> "Circuit":
        return self.gate(GateKind.RX, q, param=theta)

    def ry(self, theta: float, q: int) -> "Circuit":
        return self.gate(GateKind.RY, q, param=theta)

    def rz(self, theta: float, q: int) -> "Circuit":
        return self.gate(GateKind.RZ, q, param=theta)

    def measure(self, qubit: int, cbit: int) -> "Circuit":
        return self.append(Measure(qubit, cbit))

    def measure_all(self) -> "Circuit":
        for q in range(min(self.num_qubits, self.num_cbits)):
            self.measure(q, q)
        return self

    def without_measures(self) -> "Circuit":
        return Circuit(self.num_qubits, self.num_cbits,
                       [ins for ins in self._instructions if isinstance(ins, Gate)])


def _check(instr: Instruction, num_qubits: int, num_cbits: int,
           measured: set[int], written: set[int]) -> str | None:
    for q in instr.qubits:
        if not 0 <= q < num_qubits:
            return f"qubit index {q} out of range for {num_qubits} qubit(s)"
    if isinstance(instr, Measure):
        if not 0 <= instr.cbit < num_cbits:
            return f"cbit index {instr.cbit} out of range for {num_cbits} cbit(s)"
        if instr.qubit in measured:
            return f"qubit {instr.qubit} already measured"
        if instr.cbit in written:
            return f"cbit {instr.cbit} written by more than one measure"
        return None
    if len(set(instr.qubits)) != len(instr.qubits):
        return f"{instr.kind.mnemonic} needs distinct qubits, got {instr.qubits}"
    if instr.param is not None:
        if not isinstance(instr.param, (int, float)) or not math.isfinite(instr.param):
            return f"angle must be a finite real number, got {instr.param!r}"
    for q in instr.qubits:
        if q in measured:
            return f"gate on qubit {q} after its measurement"
    return None


def new_circuit(num_qubits: int, num_cbits: int = 0) -> Circuit:
    return Circuit(num_qubits, num_cbits)


def append(circuit: Circuit, instr: Instruction) -> Circuit:
    return circuit.append(instr)


def validate(circuit: Circuit) -> list[Violation]:
    """Return every invariant violation with its instruction position (empty if valid)."""
    measured: set[int] = set()
    written: set[int] = set()
    out = []
    for pos, instr in enumerate(circuit):
        problem = _check(instr, circuit.num_qubits, circuit.num_cbits, measured, written)
        if problem:
            out.append(Violation(pos, problem))
        if isinstance(instr, Measure):
            measured.add(instr.qubit)
            written.add(instr.cbit)
    return out


def bell_circuit() -> Circuit:
    """H on q0, CX q0->q1, then measure both qubits into their own bits."""
    return Circuit(2, 2).h(0).cx(0, 1).measure(0, 0).measure(1, 1)


def from_gates(num_qubits: int, gates: Sequence[tuple], num_cbits: int = 0) -> Circuit:
    """Build a checked circuit from ``(kind, qubits...)`` or ``(kind, param, qubits...)`` tuples."""
    c = Circuit(num_qubits, num_cbits)
    for item in gates:
        kind = item[0] if isinstance(item[0], GateKind) else GateKind.from_mnemonic(item[0])
        if kind.num_params:
            c.append(Gate(kind, tuple(item[2:]), float(item[1])))
        else:
            c.append(Gate(kind, tuple(item[1:])))
    return c
