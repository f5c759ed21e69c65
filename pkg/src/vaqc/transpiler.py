"""Hardware-dependent compilation: native-gate decomposition, placement and routing."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from math import pi
from typing import Callable, TYPE_CHECKING

from .circuit import Circuit, Gate, GateKind, Measure
from .optimizer import cancel_inverse_pairs, merge_rotations

if TYPE_CHECKING:
    from .analyzer import BackendDescriptor

K = GateKind


class TranspileError(ValueError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.message = message


# Each rule maps a gate on qubit roles (a[, b]) with angle theta to a sequence of
# (kind, roles, angle-or-None). Rules may emit non-native gates; expansion recurses.
Rule = Callable[[float | None], list[tuple[GateKind, tuple[int, ...], float | None]]]

DECOMPOSITION_RULES: dict[GateKind, Rule] = {
    K.I: lambda t: [],
    K.X: lambda t: [(K.RX, (0,), pi)],
    K.Y: lambda t: [(K.RZ, (0,), pi), (K.RX, (0,), pi)],
    K.Z: lambda t: [(K.RZ, (0,), pi)],
    K.H: lambda t: [(K.RZ, (0,), pi / 2), (K.RX, (0,), pi / 2), (K.RZ, (0,), pi / 2)],
    K.S: lambda t: [(K.RZ, (0,), pi / 2)],
    K.SDG: lambda t: [(K.RZ, (0,), -pi / 2)],
    K.T: lambda t: [(K.RZ, (0,), pi / 4)],
    K.TDG: lambda t: [(K.RZ, (0,), -pi / 4)],
    K.RY: lambda t: [(K.RZ, (0,), -pi / 2), (K.RX, (0,), t), (K.RZ, (0,), pi / 2)],
    K.SWAP: lambda t: [(K.CX, (0, 1), None), (K.CX, (1, 0), None), (K.CX, (0, 1), None)],
}
# used only when the named two-qubit gate is not native
CX_VIA_CZ: Rule = lambda t: [(K.H, (1,), None), (K.CZ, (0, 1), None), (K.H, (1,), None)]
CZ_VIA_CX: Rule = lambda t: [(K.H, (1,), None), (K.CX, (0, 1), None), (K.H, (1,), None)]
CX_REVERSED: Rule = lambda t: [(K.H, (0,), None), (K.H, (1,), None), (K.CX, (1, 0), None),
                               (K.H, (0,), None), (K.H, (1,), None)]


def _instantiate(rule: Rule, gate: Gate) -> list[Gate]:
    return [Gate(kind, tuple(gate.qubits[r] for r in roles), theta)
            for kind, roles, theta in rule(gate.param)]


def check_native_set(native: set[str]) -> None:
    if not {"rx", "rz"} <= native or not ({"cx", "cz"} & native):
        raise TranspileError("decompose", f"native gate set {sorted(native)} is not universal "
                             "(needs rx, rz and one of cx/cz)")


def _expand(gate: Gate, native: set[str], depth: int = 0) -> list[Gate]:
    if gate.kind.mnemonic in native:
        return [gate]
    if depth > 8:  # pragma: no cover - the rule table is acyclic for universal sets
        raise TranspileError("decompose", f"cannot decompose {gate}")
    if gate.kind is K.CX:
        rule = CX_VIA_CZ
    elif gate.kind is K.CZ:
        rule = CZ_VIA_CX
    else:
        rule = DECOMPOSITION_RULES[gate.kind]
    out = []
    for g in _instantiate(rule, gate):
        out.extend(_expand(g, native, depth + 1))
    return out


def decompose_to_native(circuit: Circuit, native) -> Circuit:
    """Rewrite every non-native gate through the rule table until all are native."""
    native = {g.lower() for g in native}
    check_native_set(native)
    out = []
    for ins in circuit:
        out.extend([ins] if isinstance(ins, Measure) else _expand(ins, native))
    return Circuit(circuit.num_qubits, circuit.num_cbits, out)


@dataclass
class Layout:
    initial: dict[int, int]
    final: dict[int, int]

    def to_dict(self) -> dict:
        return {"initial": {str(k): v for k, v in sorted(self.initial.items())},
                "final": {str(k): v for k, v in sorted(self.final.items())}}


@dataclass
class TranspiledProgram:
    circuit: Circuit
    layout: Layout
    backend_id: str
    swap_count: int

    def to_dict(self) -> dict:
        from .vaql import print_vaql
        return {"backend_id": self.backend_id, "circuit": print_vaql(self.circuit),
                "layout": self.layout.to_dict(), "swap_count": self.swap_count}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _neighbors(backend: "BackendDescriptor") -> list[list[int]]:
    adj: list[set[int]] = [set() for _ in range(backend.num_qubits)]
    for a, b in backend.coupling_map:
        adj[a].add(b)
        adj[b].add(a)
    return [sorted(s) for s in adj]


def _distances(adj: list[list[int]]) -> list[list[float]]:
    n = len(adj)
    dist = [[float("inf")] * n for _ in range(n)]
    for s in range(n):
        dist[s][s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if dist[s][v] == float("inf"):
                    dist[s][v] = dist[s][u] + 1
                    queue.append(v)
    return dist


def _shortest_path(adj: list[list[int]], src: int, dst: int) -> list[int] | None:
    """BFS path; neighbours visited in ascending order so ties favour low indices."""
    prev = {src: None}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if u == dst:
            break
        for v in adj[u]:
            if v not in prev:
                prev[v] = u
                queue.append(v)
    if dst not in prev:
        return None
    path = [dst]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    return path[::-1]


def _placement_cost(layout: list[int], pairs: dict[tuple[int, int], int], dist) -> float:
    return sum(w * max(dist[layout[a]][layout[b]] - 1, 0) for (a, b), w in pairs.items())


def _initial_layout(circuit: Circuit, backend: "BackendDescriptor", dist) -> list[int]:
    """Identity embedding plus one greedy improvement round over single-qubit moves."""
    n, big_n = circuit.num_qubits, backend.num_qubits
    pairs: dict[tuple[int, int], int] = {}
    for ins in circuit:
        if isinstance(ins, Gate) and ins.kind.arity == 2:
            key = tuple(sorted(ins.qubits))
            pairs[key] = pairs.get(key, 0) + 1
    # full permutation over physical qubits; logical ids >= n are placeholders
    layout = list(range(big_n))
    best = _placement_cost(layout, pairs, dist)
    if best == 0:
        return layout[:n]
    for lq in range(n):
        choice = None
        for pq in range(big_n):
            if pq == layout[lq]:
                continue
            trial = layout.copy()
            other = trial.index(pq)
            trial[lq], trial[other] = trial[other], trial[lq]
            cost = _placement_cost(trial, pairs, dist)
            if cost < best:
                best, choice = cost, trial
        if choice is not None:
            layout = choice
    return layout[:n]


def _orient(gate: Gate, backend: "BackendDescriptor", native: set[str]) -> list[Gate]:
    """Make a two-qubit gate on adjacent physical qubits respect edge direction."""
    a, b = gate.qubits
    if (a, b) in backend.coupling_map:
        return [gate]
    if (b, a) not in backend.coupling_map:  # pragma: no cover - caller guarantees adjacency
        raise TranspileError("routing", f"{gate} is not on a coupled pair")
    if gate.kind in (K.CZ, K.SWAP):
        return [Gate(gate.kind, (b, a))]
    out = []
    for g in _instantiate(CX_REVERSED, gate):
        out.extend(_expand(g, native))
    return out


def _lower(gate: Gate, backend: "BackendDescriptor", native: set[str]) -> list[Gate]:
    """Decompose (if needed) and orient a gate already placed on physical qubits."""
    out = []
    for g in _expand(gate, native):
        out.extend(_orient(g, backend, native) if g.kind.arity == 2 else [g])
    return out


def place_and_route(circuit: Circuit, backend: "BackendDescriptor",
                    placement: str = "greedy") -> tuple[Circuit, Layout, int]:
    """Map logical to physical qubits and insert SWAPs for non-adjacent operands.

    ``placement="identity"`` skips the greedy improvement of the initial layout.

    Measurements are emitted after all gates, retargeted via the final layout;
    this is safe because measurement is terminal per qubit.
    Returns the routed circuit, its layout and the number of SWAPs inserted.
    """
    if circuit.num_qubits > backend.num_qubits:
        raise TranspileError("placement", f"insufficient qubits: circuit needs {circuit.num_qubits}, "
                             f"backend {backend.id} has {backend.num_qubits}")
    native = {g.lower() for g in backend.native_gates}
    adj = _neighbors(backend)
    dist = _distances(adj)
    if placement == "greedy":
        l2p = _initial_layout(circuit, backend, dist)
    elif placement == "identity":
        l2p = list(range(circuit.num_qubits))
    else:
        raise ValueError(f"placement must be 'greedy' or 'identity', got {placement!r}")
    initial = dict(enumerate(l2p))
    p2l = {p: l for l, p in enumerate(l2p)}
    out: list[Gate] = []
    measures: list[Measure] = []
    swaps = 0
    for ins in circuit:
        if isinstance(ins, Measure):
            measures.append(ins)
            continue
        phys = tuple(l2p[q] for q in ins.qubits)
        if len(phys) == 2 and dist[phys[0]][phys[1]] > 1:
            path = _shortest_path(adj, phys[0], phys[1])
            if path is None:
                raise TranspileError("routing", f"physical qubits {phys[0]} and {phys[1]} are in "
                                     f"different components of {backend.id}'s coupling graph")
            for u, v in zip(path, path[1:-1]):
                out.extend(_lower(Gate(K.SWAP, (u, v)), backend, native))
                swaps += 1
                lu, lv = p2l.get(u), p2l.get(v)
                if lu is not None:
                    l2p[lu] = v
                if lv is not None:
                    l2p[lv] = u
                p2l[u], p2l[v] = lv, lu
            phys = tuple(l2p[q] for q in ins.qubits)
        out.extend(_lower(Gate(ins.kind, phys, ins.param), backend, native))
    final = dict(enumerate(l2p))
    routed = Circuit(backend.num_qubits, circuit.num_cbits,
                     out + [Measure(l2p[m.qubit], m.cbit) for m in measures])
    return routed, Layout(initial, final), swaps


def transpile(circuit: Circuit, backend: "BackendDescriptor", placement: str = "greedy") -> TranspiledProgram:
    """decompose -> place/route -> peephole cleanup; every emitted gate is native."""
    if circuit.num_qubits > backend.num_qubits:
        raise TranspileError("placement", f"insufficient qubits: circuit needs {circuit.num_qubits}, "
                             f"backend {backend.id} has {backend.num_qubits}")
    lowered = decompose_to_native(circuit, backend.native_gates)
    routed, layout, swaps = place_and_route(lowered, backend, placement)
    cleaned, _ = cancel_inverse_pairs(routed)
    cleaned, _ = merge_rotations(cleaned)
    return TranspiledProgram(cleaned, layout, backend.id, swaps)
