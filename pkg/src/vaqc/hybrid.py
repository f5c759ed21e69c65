"""Hybrid classical-quantum loops: parameterized circuits, Pauli observables,
VQE and QAOA for MaxCut.

Pauli strings and bitstrings are indexed left to right: character k belongs
to qubit (or graph vertex) k.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .circuit import Circuit, Gate, GateKind, Measure
from .simulator import measurement_distribution, run_statevector, sample

K = GateKind
MAX_BRUTEFORCE_VERTICES = 24
MAX_VQE_QUBITS = 12


class HybridError(ValueError):
    pass


@dataclass(frozen=True)
class Param:
    """Symbolic angle slot; the bound angle is ``scale * value``."""
    name: str
    scale: float = 1.0


@dataclass
class ParameterizedCircuit:
    num_qubits: int
    num_cbits: int
    instructions: list
    parameters: list[str]

    def __post_init__(self):
        slots = {ins.param.name for ins in self.instructions
                 if isinstance(ins, Gate) and isinstance(ins.param, Param)}
        unknown = slots - set(self.parameters)
        if unknown:
            raise HybridError(f"slots {sorted(unknown)} missing from the parameter list")

    def bind(self, values: dict[str, float]) -> Circuit:
        return bind_parameters(self, values)

    def bind_vector(self, vector: Sequence[float]) -> Circuit:
        return bind_parameters(self, dict(zip(self.parameters, vector, strict=True)))


def bind_parameters(pc: ParameterizedCircuit, values: dict[str, float]) -> Circuit:
    missing = set(pc.parameters) - set(values)
    extra = set(values) - set(pc.parameters)
    if missing or extra:
        raise HybridError(f"parameter mismatch: missing {sorted(missing)}, unknown {sorted(extra)}")
    c = Circuit(pc.num_qubits, pc.num_cbits)
    for ins in pc.instructions:
        if isinstance(ins, Gate) and isinstance(ins.param, Param):
            ins = Gate(ins.kind, ins.qubits, float(ins.param.scale * values[ins.param.name]))
        c.append(ins)
    return c


@dataclass
class Observable:
    """Weighted sum of Pauli strings over ``num_qubits`` qubits."""
    terms: list[tuple[float, str]]

    def __post_init__(self):
        if not self.terms:
            raise HybridError("observable has no terms")
        sizes = {len(p) for _, p in self.terms}
        if len(sizes) != 1:
            raise HybridError("all Pauli strings must have the same length")
        for coeff, pauli in self.terms:
            if not math.isfinite(coeff):
                raise HybridError("coefficients must be finite")
            if set(pauli) - set("IXYZ") or not pauli:
                raise HybridError(f"bad Pauli string {pauli!r}")
        self.terms = [(float(c), p) for c, p in self.terms]

    @property
    def num_qubits(self) -> int:
        return len(self.terms[0][1])

    @classmethod
    def from_json(cls, source: str | Path | list) -> "Observable":
        data = json.loads(Path(source).read_text(encoding="utf-8")) if isinstance(source, (str, Path)) else source
        return cls([(float(c), str(p)) for c, p in data])

    def to_list(self) -> list:
        return [[c, p] for c, p in self.terms]


def _pauli_expectation(psi: np.ndarray, pauli: str) -> complex:
    idx = np.arange(psi.size)
    flip = zmask = 0
    n_y = 0
    for q, ch in enumerate(pauli):
        if ch in "XY":
            flip |= 1 << q
        if ch in "ZY":
            zmask |= 1 << q
        n_y += ch == "Y"
    # P|i> = i^{nY} (-1)^{popcount(i & zmask)} |i ^ flip>
    parity = np.zeros(psi.size, dtype=np.int64)
    masked = idx & zmask
    while np.any(masked):
        parity ^= masked & 1
        masked >>= 1
    signs = 1 - 2 * parity
    return (1j ** n_y) * np.vdot(psi[idx ^ flip], signs * psi)


def expectation(circuit: Circuit, obs: Observable) -> float:
    """Exact <psi|O|psi> for the state prepared by a measure-free circuit."""
    if obs.num_qubits != circuit.num_qubits:
        raise HybridError(f"observable acts on {obs.num_qubits} qubits, circuit has {circuit.num_qubits}")
    psi = run_statevector(circuit).amplitudes
    total = sum(coeff * _pauli_expectation(psi, pauli) for coeff, pauli in obs.terms)
    if abs(total.imag) > 1e-9:
        raise HybridError(f"expectation has imaginary part {total.imag}")
    return float(total.real)


@dataclass(frozen=True)
class Graph:
    num_vertices: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        norm = set()
        for i, j in self.edges:
            if i == j:
                raise HybridError(f"self-loop on vertex {i}")
            if not (0 <= i < self.num_vertices and 0 <= j < self.num_vertices):
                raise HybridError(f"edge ({i}, {j}) out of range")
            e = (min(i, j), max(i, j))
            if e in norm:
                raise HybridError(f"duplicate edge {e}")
            norm.add(e)
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @classmethod
    def from_json(cls, source: str | Path | dict) -> "Graph":
        data = json.loads(Path(source).read_text(encoding="utf-8")) if isinstance(source, (str, Path)) else source
        return cls(int(data["n"]), tuple((int(i), int(j)) for i, j in data["edges"]))

    def cut_value(self, bits: str) -> int:
        return sum(bits[i] != bits[j] for i, j in self.edges)

    def cost_observable(self) -> Observable:
        """C = sum over edges of (1 - Z_i Z_j) / 2."""
        n = self.num_vertices
        terms = [(len(self.edges) / 2, "I" * n)]
        for i, j in self.edges:
            p = ["I"] * n
            p[i] = p[j] = "Z"
            terms.append((-0.5, "".join(p)))
        return Observable(terms)


def maxcut_bruteforce(g: Graph) -> tuple[int, str]:
    """Exhaustive MaxCut; returns the lexicographically smallest optimal assignment."""
    if g.num_vertices > MAX_BRUTEFORCE_VERTICES:
        raise HybridError(f"brute force limited to {MAX_BRUTEFORCE_VERTICES} vertices")
    best, best_bits = -1, ""
    for combo in itertools.product("01", repeat=g.num_vertices):
        bits = "".join(combo)
        v = g.cut_value(bits)
        if v > best:
            best, best_bits = v, bits
    return best, best_bits


def qaoa_template(g: Graph, p: int) -> ParameterizedCircuit:
    if p < 1:
        raise HybridError("QAOA needs at least one layer")
    n = g.num_vertices
    ins: list = [Gate(K.H, (q,)) for q in range(n)]
    for k in range(p):
        gamma, beta = Param(f"gamma_{k}", 2.0), Param(f"beta_{k}", 2.0)
        for i, j in g.edges:
            ins += [Gate(K.CX, (i, j)), Gate(K.RZ, (j,), gamma), Gate(K.CX, (i, j))]
        ins += [Gate(K.RX, (q,), beta) for q in range(n)]
    names = [f"gamma_{k}" for k in range(p)] + [f"beta_{k}" for k in range(p)]
    return ParameterizedCircuit(n, 0, ins, names)


def build_qaoa_circuit(g: Graph, gammas: Sequence[float], betas: Sequence[float]) -> Circuit:
    """H layer, then per layer CX-RZ(2 gamma)-CX per edge and RX(2 beta) per qubit."""
    if len(gammas) != len(betas):
        raise HybridError("gammas and betas must have equal length")
    p = len(gammas)
    return qaoa_template(g, p).bind_vector(list(gammas) + list(betas))


@dataclass
class VariationalResult:
    best_params: list[float]
    best_value: float
    evaluations: int
    history: list[tuple[list[float], float]] = field(repr=False)
    best_bitstring: str | None = None
    best_cut: int | None = None
    counts: dict[str, int] | None = None

    def to_dict(self) -> dict:
        out = {"best_params": self.best_params, "best_value": self.best_value,
               "evaluations": self.evaluations,
               "history": [{"params": p, "value": v} for p, v in self.history]}
        if self.best_bitstring is not None:
            out.update(best_bitstring=self.best_bitstring, best_cut=self.best_cut,
                       counts=dict(sorted(self.counts.items())))
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def coordinate_descent(f: Callable[[list[float]], float], x0: Sequence[float], step: float,
                       min_step: float = 1e-3) -> tuple[list[float], float]:
    """Derivative-free minimiser: try +/-step per coordinate, halve the step when a sweep stalls."""
    x = list(map(float, x0))
    fx = f(x)
    while step >= min_step:
        improved = False
        for i in range(len(x)):
            for d in (step, -step):
                trial = x.copy()
                trial[i] += d
                ft = f(trial)
                if ft < fx:
                    x, fx, improved = trial, ft, True
                    break
        if not improved:
            step /= 2
    return x, fx


class _Recorder:
    def __init__(self, fn: Callable[[list[float]], float]):
        self.fn = fn
        self.history: list[tuple[list[float], float]] = []

    def __call__(self, x: list[float]) -> float:
        v = self.fn(x)
        self.history.append((list(x), v))
        return v


def run_qaoa(g: Graph, p: int = 1, grid: int = 32, shots: int = 1024, seed: int = 0) -> VariationalResult:
    """Maximise <C> by grid search over [0, pi)^(2p) then coordinate descent,
    and sample the best circuit to report the best observed cut."""
    if p < 1:
        raise HybridError("p must be at least 1")
    if p > 2:
        raise HybridError("grid search supports p <= 2; bind explicit angles for deeper circuits")
    if grid < 2:
        raise HybridError("grid needs at least 2 points per axis")
    template = qaoa_template(g, p)
    cost = g.cost_observable()
    rec = _Recorder(lambda x: expectation(template.bind_vector(x), cost))
    axis = [math.pi * k / grid for k in range(grid)]
    best_x, best_v = None, -math.inf
    for point in itertools.product(axis, repeat=2 * p):
        v = rec(list(point))
        if v > best_v:
            best_x, best_v = list(point), v
    x, neg = coordinate_descent(lambda v: -rec(v), best_x, math.pi / grid)
    if -neg > best_v:
        best_x, best_v = x, -neg
    measured = template.bind_vector(best_x)
    final = Circuit(g.num_vertices, g.num_vertices,
                    list(measured) + [Measure(q, q) for q in range(g.num_vertices)])
    hist = sample(measurement_distribution(final), shots, seed)
    bits = max(sorted(hist.counts), key=g.cut_value)
    return VariationalResult(best_x, best_v, len(rec.history), rec.history,
                             bits, g.cut_value(bits), hist.counts)


def vqe_ansatz(n: int, reps: int) -> ParameterizedCircuit:
    """reps x [RY per qubit, CX chain 0->1->...] followed by a final RY layer."""
    if reps < 1:
        raise HybridError("reps must be at least 1")
    ins: list = []
    names: list[str] = []

    def ry_layer(layer: int):
        for q in range(n):
            name = f"theta_{layer}_{q}"
            names.append(name)
            ins.append(Gate(K.RY, (q,), Param(name)))

    for r in range(reps):
        ry_layer(r)
        ins.extend(Gate(K.CX, (q, q + 1)) for q in range(n - 1))
    ry_layer(reps)
    return ParameterizedCircuit(n, 0, ins, names)


def run_vqe(obs: Observable, reps: int = 1, restarts: int = 5, seed: int = 0,
            step: float = math.pi / 4) -> VariationalResult:
    """Minimise <obs> over the RY/CX ansatz from ``restarts`` random starts."""
    n = obs.num_qubits
    if n > MAX_VQE_QUBITS:
        raise HybridError(f"VQE limited to {MAX_VQE_QUBITS} qubits")
    if restarts < 1:
        raise HybridError("restarts must be at least 1")
    ansatz = vqe_ansatz(n, reps)
    rec = _Recorder(lambda x: expectation(ansatz.bind_vector(x), obs))
    rng = np.random.default_rng(seed)
    candidates = []
    for _ in range(restarts):
        x0 = rng.uniform(0, 2 * math.pi, len(ansatz.parameters))
        candidates.append(coordinate_descent(rec, x0, step))
    best_x, best_v = min(candidates, key=lambda c: (c[1], c[0]))
    return VariationalResult(best_x, best_v, len(rec.history), rec.history)
