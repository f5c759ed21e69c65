"""Vendor-agnostic quantum circuit toolchain: IR, optimizer, backend selection,
transpiler, code generators, simulator, hybrid algorithms and a job service."""
from .circuit import Circuit, CircuitError, Gate, GateKind, Measure, bell_circuit, new_circuit, validate
from .vaql import SourceError, parse_vaql, print_vaql

__all__ = [
    "Circuit", "CircuitError", "Gate", "GateKind", "Measure", "bell_circuit", "new_circuit",
    "validate", "SourceError", "parse_vaql", "print_vaql",
]
__version__ = "0.1.0"
