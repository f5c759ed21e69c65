"""Circuit profiling, backend registry and ranked hardware selection."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .circuit import Circuit, Gate, GateKind, Measure
from .optimizer import depth
from .transpiler import TranspileError, TranspiledProgram, transpile


class RegistryError(ValueError):
    pass


class NotNativeError(ValueError):
    pass


@dataclass
class CircuitProfile:
    num_qubits: int
    num_cbits: int
    depth: int
    gate_histogram: dict[str, int]
    t_count: int
    two_qubit_count: int
    measure_count: int

    def to_dict(self) -> dict:
        return asdict(self)


def profile(circuit: Circuit) -> CircuitProfile:
    hist = Counter("measure" if isinstance(ins, Measure) else ins.kind.mnemonic for ins in circuit)
    return CircuitProfile(
        num_qubits=circuit.num_qubits,
        num_cbits=circuit.num_cbits,
        depth=depth(circuit),
        gate_histogram=dict(sorted(hist.items())),
        t_count=hist["t"] + hist["tdg"],
        two_qubit_count=sum(1 for g in circuit.gates if g.kind.arity == 2),
        measure_count=hist["measure"],
    )


_FIELDS = ("id", "vendor", "num_qubits", "native_gates", "coupling_map", "error_1q",
           "error_2q", "readout_error", "cost_per_shot", "assembler")


@dataclass(frozen=True)
class BackendDescriptor:
    id: str
    vendor: str
    num_qubits: int
    native_gates: frozenset[str]
    coupling_map: frozenset[tuple[int, int]]
    error_1q: float = 0.0
    error_2q: float = 0.0
    readout_error: float = 0.0
    cost_per_shot: float = 0.0
    assembler: str = "qasm2"

    def __post_init__(self):
        object.__setattr__(self, "native_gates", frozenset(g.lower() for g in self.native_gates))
        object.__setattr__(self, "coupling_map", frozenset((int(a), int(b)) for a, b in self.coupling_map))
        if self.num_qubits < 1:
            raise RegistryError(f"{self.id}: num_qubits must be at least 1")
        for a, b in self.coupling_map:
            if not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits) or a == b:
                raise RegistryError(f"{self.id}: bad coupling pair ({a}, {b})")
        for name in ("error_1q", "error_2q", "readout_error"):
            if not 0 <= getattr(self, name) < 1:
                raise RegistryError(f"{self.id}: {name} must lie in [0, 1)")
        if self.cost_per_shot < 0:
            raise RegistryError(f"{self.id}: cost_per_shot must be non-negative")
        if self.assembler not in ("qasm2", "quil"):
            raise RegistryError(f"{self.id}: assembler must be 'qasm2' or 'quil'")
        unknown = self.native_gates - {k.mnemonic for k in GateKind}
        if unknown:
            raise RegistryError(f"{self.id}: unknown native gates {sorted(unknown)}")

    @classmethod
    def from_dict(cls, data: dict) -> "BackendDescriptor":
        extra = set(data) - set(_FIELDS)
        missing = set(_FIELDS) - set(data)
        if extra:
            raise RegistryError(f"unknown backend field(s): {sorted(extra)}")
        if missing:
            raise RegistryError(f"missing backend field(s): {sorted(missing)}")
        return cls(**{k: data[k] for k in _FIELDS})

    def to_dict(self) -> dict:
        return {
            "id": self.id, "vendor": self.vendor, "num_qubits": self.num_qubits,
            "native_gates": sorted(self.native_gates),
            "coupling_map": [list(p) for p in sorted(self.coupling_map)],
            "error_1q": self.error_1q, "error_2q": self.error_2q,
            "readout_error": self.readout_error, "cost_per_shot": self.cost_per_shot,
            "assembler": self.assembler,
        }


def load_registry(source: str | Path | list) -> list[BackendDescriptor]:
    """Load a registry from a JSON file path or an already-decoded list."""
    data = json.loads(Path(source).read_text(encoding="utf-8")) if isinstance(source, (str, Path)) else source
    if not isinstance(data, list):
        raise RegistryError("backend registry must be a JSON array")
    backends = [BackendDescriptor.from_dict(d) for d in data]
    ids = [b.id for b in backends]
    if len(set(ids)) != len(ids):
        raise RegistryError("duplicate backend ids in registry")
    return backends


def dump_registry(backends: Iterable[BackendDescriptor]) -> str:
    return json.dumps([b.to_dict() for b in backends], indent=2)


def estimate_success(transpiled: Circuit, backend: BackendDescriptor) -> float:
    """Fidelity product (1-e1)^n1 * (1-e2)^n2 * (1-er)^nm over the executed program."""
    n1 = n2 = nm = 0
    for ins in transpiled:
        if isinstance(ins, Measure):
            nm += 1
            continue
        if ins.kind.mnemonic not in backend.native_gates:
            raise NotNativeError(f"{ins.kind.mnemonic} is not native on {backend.id}")
        if ins.kind.arity == 2:
            if ins.qubits not in backend.coupling_map:
                raise NotNativeError(f"{ins} is not on a coupled pair of {backend.id}")
            n2 += 1
        else:
            n1 += 1
    return ((1 - backend.error_1q) ** n1) * ((1 - backend.error_2q) ** n2) * ((1 - backend.readout_error) ** nm)


@dataclass
class SelectionEntry:
    backend_id: str
    success: float | None
    total_cost: float | None
    feasible: bool
    reason: str | None = None
    program: TranspiledProgram | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {"backend_id": self.backend_id, "success": self.success, "total_cost": self.total_cost,
                "feasible": self.feasible, "reason": self.reason}


@dataclass
class SelectionResult:
    entries: list[SelectionEntry]

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def feasible(self) -> list[SelectionEntry]:
        return [e for e in self.entries if e.feasible]

    @property
    def best(self) -> SelectionEntry | None:
        feasible = self.feasible
        return feasible[0] if feasible else None

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def filter_backends(circuit: Circuit, registry: Sequence[BackendDescriptor],
                    trusted_vendors: Iterable[str] | None = None, shots: int = 1) -> SelectionResult:
    """Feasibility check: enough qubits, trusted vendor and a successful transpile.

    Feasible entries carry the success estimate of their transpiled program.
    """
    trusted = None if trusted_vendors is None else set(trusted_vendors)
    entries = []
    for b in registry:
        if trusted is not None and b.vendor not in trusted:
            entries.append(SelectionEntry(b.id, None, None, False, "untrusted vendor"))
        elif circuit.num_qubits > b.num_qubits:
            entries.append(SelectionEntry(b.id, None, None, False, "insufficient qubits"))
        else:
            try:
                prog = transpile(circuit, b)
            except TranspileError as exc:
                entries.append(SelectionEntry(b.id, None, None, False, f"transpilation failed: {exc}"))
                continue
            entries.append(SelectionEntry(b.id, estimate_success(prog.circuit, b),
                                          shots * b.cost_per_shot, True, None, prog))
    return SelectionResult(entries)


def select_backend(circuit: Circuit, registry: Sequence[BackendDescriptor], objective: str = "success",
                   shots: int = 1, trusted_vendors: Iterable[str] | None = None) -> SelectionResult:
    """Rank feasible backends by ``objective`` ("success" or "cost"); infeasible ones follow
    in registry order."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    if objective == "success":
        key = lambda e: (-e.success, e.total_cost, e.backend_id)
    elif objective == "cost":
        key = lambda e: (e.total_cost, -e.success, e.backend_id)
    else:
        raise ValueError(f"objective must be 'success' or 'cost', got {objective!r}")
    result = filter_backends(circuit, registry, trusted_vendors, shots)
    ranked = sorted(result.feasible, key=key)
    return SelectionResult(ranked + [e for e in result.entries if not e.feasible])
