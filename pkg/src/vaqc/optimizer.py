"""Hardware-independent rewrite passes.

Every pass maps a circuit to an equivalent one (same unitary up to global
phase) and never touches measurements. :func:`optimize` drives them to a
fixpoint.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from math import pi
from typing import Sequence

from .circuit import Circuit, Gate, GateKind, Measure, ROTATIONS
from .simulator import circuit_unitary, equivalent_up_to_global_phase

ZERO_ANGLE = 1e-12
MAX_ROUNDS = 100

K = GateKind

_INVERSE = {
    K.H: K.H, K.X: K.X, K.Y: K.Y, K.Z: K.Z,
    K.CX: K.CX, K.CZ: K.CZ, K.SWAP: K.SWAP,
    K.S: K.SDG, K.SDG: K.S, K.T: K.TDG, K.TDG: K.T,
}
_SYMMETRIC = frozenset({K.CZ, K.SWAP})


@dataclass
class PassReport:
    name: str
    gates_before: int
    gates_after: int
    depth_before: int
    depth_after: int
    rewrites: int
    objective: str = "size"

    def to_dict(self) -> dict:
        return asdict(self)


def depth(circuit: Circuit) -> int:
    """Greedy ASAP layer count; measurements count as instructions."""
    level = [0] * circuit.num_qubits
    for ins in circuit:
        layer = max(level[q] for q in ins.qubits) + 1
        for q in ins.qubits:
            level[q] = layer
    return max(level, default=0)


def _report(name: str, before: Circuit, after: Circuit, rewrites: int) -> PassReport:
    return PassReport(name, len(before.gates), len(after.gates), depth(before), depth(after), rewrites)


def _is_inverse(first: Gate, second: Gate) -> bool:
    if _INVERSE.get(first.kind) is not second.kind:
        return False
    if first.qubits == second.qubits:
        return True
    return first.kind in _SYMMETRIC and set(first.qubits) == set(second.qubits)


def _peephole(circuit: Circuit, combine) -> tuple[list, int]:
    """Stack-based adjacent-pair rewriting.

    ``combine(prev, cur)`` is called when ``prev`` is the latest surviving
    instruction on every qubit of ``cur`` and acts on the same qubit set. It
    returns None (no rewrite), [] (delete both) or [gate] (replace both).
    """
    out: list = []
    stacks: list[list[int]] = [[] for _ in range(circuit.num_qubits)]
    rewrites = 0
    for ins in circuit:
        qs = ins.qubits
        if isinstance(ins, Gate):
            tops = {stacks[q][-1] if stacks[q] else None for q in qs}
            if len(tops) == 1 and None not in tops:
                j = tops.pop()
                prev = out[j]
                if isinstance(prev, Gate) and set(prev.qubits) == set(qs):
                    result = combine(prev, ins)
                    if result is not None:
                        rewrites += 1
                        for q in qs:
                            stacks[q].pop()
                        out[j] = None
                        if result:
                            ins = result[0]
                        else:
                            continue
        out.append(ins)
        for q in qs:
            stacks[q].append(len(out) - 1)
    return [ins for ins in out if ins is not None], rewrites


def cancel_inverse_pairs(circuit: Circuit) -> tuple[Circuit, PassReport]:
    """Delete adjacent gate pairs that multiply to the identity, to a fixpoint."""
    cur, total = circuit, 0
    while True:
        instrs, n = _peephole(cur, lambda a, b: [] if _is_inverse(a, b) else None)
        cur = Circuit(circuit.num_qubits, circuit.num_cbits, instrs)
        total += n
        if n == 0:
            break
    return cur, _report("cancel_inverse_pairs", circuit, cur, total)


def canonical_angle(theta: float) -> float:
    """Reduce to (-pi, pi]."""
    t = theta % (2 * pi)
    if t > pi:
        t -= 2 * pi
    return t


def _merge(a: Gate, b: Gate):
    if a.kind is not b.kind or a.kind not in ROTATIONS:
        return None
    theta = canonical_angle(a.param + b.param)
    if abs(theta) < ZERO_ANGLE:
        return []
    return [Gate(a.kind, a.qubits, theta)]


def merge_rotations(circuit: Circuit) -> tuple[Circuit, PassReport]:
    """Fuse adjacent same-axis rotations on one qubit; drop near-zero results."""
    cur, total = circuit, 0
    while True:
        instrs, n = _peephole(cur, _merge)
        cur = Circuit(circuit.num_qubits, circuit.num_cbits, instrs)
        total += n
        if n == 0:
            break
    return cur, _report("merge_rotations", circuit, cur, total)


def remap_qubits(circuit: Circuit, remap: dict[int, int], num_qubits: int) -> Circuit:
    out = []
    for ins in circuit:
        if isinstance(ins, Measure):
            out.append(Measure(remap[ins.qubit], ins.cbit))
        else:
            out.append(Gate(ins.kind, tuple(remap[q] for q in ins.qubits), ins.param))
    return Circuit(num_qubits, circuit.num_cbits, out)


def remove_idle_qubits(circuit: Circuit) -> tuple[Circuit, dict[int, int]]:
    """Drop qubits no instruction touches; at least one qubit is always kept."""
    used = sorted({q for ins in circuit for q in ins.qubits}) or [0]
    remap = {old: new for new, old in enumerate(used)}
    if len(used) == circuit.num_qubits:
        return circuit.copy(), remap
    return remap_qubits(circuit, remap, len(used)), remap


@dataclass(frozen=True)
class Template:
    """A gate pattern over qubit roles 0..k-1 and an equivalent replacement.

    Construction checks the two sequences against the unitary oracle and
    raises TemplateError if they differ beyond global phase.
    """
    name: str
    pattern: tuple[Gate, ...]
    replacement: tuple[Gate, ...]
    num_roles: int = field(init=False)

    def __post_init__(self):
        roles = {q for g in self.pattern + self.replacement for q in g.qubits}
        if not self.pattern or roles != set(range(len(roles))):
            raise TemplateError(f"{self.name}: roles must be 0..k-1 and the pattern non-empty")
        object.__setattr__(self, "num_roles", len(roles))
        if not equivalent_up_to_global_phase(self.pattern_unitary(), self.replacement_unitary(), 1e-12):
            raise TemplateError(f"{self.name}: pattern and replacement are not equivalent")

    def pattern_unitary(self):
        return circuit_unitary(Circuit(self.num_roles, 0, self.pattern))

    def replacement_unitary(self):
        return circuit_unitary(Circuit(self.num_roles, 0, self.replacement))


class TemplateError(ValueError):
    pass


def _g(kind: GateKind, *qubits: int) -> Gate:
    return Gate(kind, qubits)


BUILTIN_TEMPLATES: tuple[Template, ...] = (
    Template("cx_reversal",
             (_g(K.H, 0), _g(K.H, 1), _g(K.CX, 0, 1), _g(K.H, 0), _g(K.H, 1)),
             (_g(K.CX, 1, 0),)),
    Template("t_t_to_s", (_g(K.T, 0), _g(K.T, 0)), (_g(K.S, 0),)),
    Template("s_s_to_z", (_g(K.S, 0), _g(K.S, 0)), (_g(K.Z, 0),)),
    Template("h_z_h_to_x", (_g(K.H, 0), _g(K.Z, 0), _g(K.H, 0)), (_g(K.X, 0),)),
)


def _bind(pattern_gate: Gate, ins, roles: dict[int, int], taken: set[int], dirty: set[int]) -> dict | None:
    """Try to match ``ins`` to ``pattern_gate``; return the extended role binding or None."""
    if not isinstance(ins, Gate) or ins.kind is not pattern_gate.kind or ins.param != pattern_gate.param:
        return None
    new = dict(roles)
    for role, q in zip(pattern_gate.qubits, ins.qubits):
        if role in new:
            if new[role] != q:
                return None
        else:
            if q in taken or q in dirty or q in new.values():
                return None
            new[role] = q
    return new


def _match_at(instrs: list, start: int, tpl: Template) -> tuple[list[int], dict[int, int]] | None:
    roles = _bind(tpl.pattern[0], instrs[start], {}, set(), set())
    if roles is None:
        return None
    positions = [start]
    dirty: set[int] = set()  # qubits touched by skipped instructions
    k = 1
    j = start + 1
    while k < len(tpl.pattern) and j < len(instrs):
        ins = instrs[j]
        bound = set(roles.values())
        if bound & set(ins.qubits):
            new = _bind(tpl.pattern[k], ins, roles, set(), dirty)
            if new is None:
                return None
        else:
            new = _bind(tpl.pattern[k], ins, roles, bound, dirty)
        if new is not None:
            roles = new
            positions.append(j)
            k += 1
        else:
            dirty.update(ins.qubits)
        j += 1
    if k < len(tpl.pattern):
        return None
    return positions, roles


def apply_templates(circuit: Circuit, library: Sequence[Template] = BUILTIN_TEMPLATES) -> tuple[Circuit, PassReport]:
    """One greedy left-to-right pass replacing template occurrences.

    An occurrence is a set of instructions matching the pattern in order such
    that no other instruction in between touches the involved qubits; the
    replacement is placed where the first matched instruction was.
    """
    instrs = list(circuit)
    rewrites = 0
    i = 0
    while i < len(instrs):
        for tpl in library:
            found = _match_at(instrs, i, tpl)
            if found is None:
                continue
            positions, roles = found
            repl = [Gate(g.kind, tuple(roles[r] for r in g.qubits), g.param) for g in tpl.replacement]
            drop = set(positions)
            instrs = ([ins for p, ins in enumerate(instrs[:i]) if p not in drop] + repl
                      + [ins for p, ins in enumerate(instrs[i:], start=i) if p not in drop])
            rewrites += 1
            i += len(repl) - 1
            break
        i += 1
    out = Circuit(circuit.num_qubits, circuit.num_cbits, instrs)
    return out, _report("apply_templates", circuit, out, rewrites)


@dataclass
class OptimizationResult:
    circuit: Circuit
    reports: list[PassReport]
    remap: dict[int, int]

    def __iter__(self):
        return iter((self.circuit, self.reports))

    def reports_json(self) -> str:
        return json.dumps([r.to_dict() for r in self.reports], indent=2)


def optimize(circuit: Circuit, objective: str = "size",
             templates: Sequence[Template] = BUILTIN_TEMPLATES) -> OptimizationResult:
    """Run all passes in rounds until none rewrites (at most 100 rounds).

    ``objective`` ("size" or "depth") is the cost recorded on each report.
    ``remap`` maps surviving original qubits to their new indices.
    """
    if objective not in ("size", "depth"):
        raise ValueError(f"objective must be 'size' or 'depth', got {objective!r}")
    reports: list[PassReport] = []
    remap = {q: q for q in range(circuit.num_qubits)}
    cur = circuit
    for _ in range(MAX_ROUNDS):
        changed = 0
        for fn in (cancel_inverse_pairs, merge_rotations):
            cur, rep = fn(cur)
            reports.append(rep)
            changed += rep.rewrites
        before = cur
        cur, rep = apply_templates(cur, templates)
        reports.append(rep)
        changed += rep.rewrites
        before = cur
        cur, step = remove_idle_qubits(cur)
        removed = before.num_qubits - cur.num_qubits
        reports.append(_report("remove_idle_qubits", before, cur, removed))
        remap = {old: step[new] for old, new in remap.items() if new in step}
        changed += removed
        if not changed:
            break
    for rep in reports:
        rep.objective = objective
    return OptimizationResult(cur, reports, remap)
