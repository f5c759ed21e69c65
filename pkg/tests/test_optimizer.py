import math

import numpy as np
import pytest

from helpers import dense_unitary, phase_equal, random_circuit, with_measures
from vaqc.circuit import Circuit, Gate, GateKind, Measure, bell_circuit, from_gates
from vaqc.optimizer import (BUILTIN_TEMPLATES, Template, TemplateError, apply_templates, cancel_inverse_pairs,
                            canonical_angle, depth, merge_rotations, optimize, remap_qubits,
                            remove_idle_qubits)

K = GateKind


def lift(result, num_qubits: int) -> Circuit:
    """Express an optimized circuit on the original qubit indices."""
    back = {new: old for old, new in result.remap.items()}
    return remap_qubits(result.circuit, back, num_qubits)


def test_cancel_examples():
    out, rep = cancel_inverse_pairs(from_gates(1, [("h", 0), ("h", 0)]))
    assert len(out) == 0 and rep.rewrites == 1
    out, _ = cancel_inverse_pairs(from_gates(2, [("h", 0), ("x", 1), ("h", 0)]))
    assert out.instructions == (Gate(K.X, (1,)),)
    c = from_gates(1, [("h", 0), ("x", 0), ("h", 0)])
    out, rep = cancel_inverse_pairs(c)
    assert out == c and rep.rewrites == 0


@pytest.mark.parametrize("a, b", [("s", "sdg"), ("sdg", "s"), ("t", "tdg"), ("tdg", "t"),
                                  ("x", "x"), ("y", "y"), ("z", "z")])
def test_cancel_adjoint_pairs(a, b):
    out, _ = cancel_inverse_pairs(from_gates(1, [(a, 0), (b, 0)]))
    assert len(out) == 0


def test_cancel_two_qubit_roles():
    out, _ = cancel_inverse_pairs(from_gates(2, [("cx", 0, 1), ("cx", 1, 0)]))
    assert len(out) == 2
    for kind in ("cz", "swap"):
        out, _ = cancel_inverse_pairs(from_gates(2, [(kind, 0, 1), (kind, 1, 0)]))
        assert len(out) == 0
    out, _ = cancel_inverse_pairs(from_gates(3, [("cx", 0, 1), ("h", 2), ("cx", 0, 1)]))
    assert out.instructions == (Gate(K.H, (2,)),)
    # a gate on one operand blocks the pair
    c = from_gates(2, [("cx", 0, 1), ("x", 1), ("cx", 0, 1)])
    assert cancel_inverse_pairs(c)[0] == c


def test_cancel_nested_to_fixpoint():
    out, rep = cancel_inverse_pairs(from_gates(1, [("h", 0), ("s", 0), ("sdg", 0), ("h", 0)]))
    assert len(out) == 0 and rep.rewrites == 2


def test_merge_examples():
    out, _ = merge_rotations(from_gates(1, [("rz", 0.3, 0), ("rz", 0.4, 0)]))
    assert len(out) == 1 and out.gates[0].kind is K.RZ
    assert out.gates[0].param == pytest.approx(0.7, abs=1e-15)
    out, _ = merge_rotations(from_gates(1, [("rx", math.pi, 0), ("rx", math.pi, 0)]))
    assert len(out) == 0
    c = from_gates(1, [("rz", 0.3, 0), ("rx", 0.1, 0), ("rz", 0.4, 0)])
    assert merge_rotations(c)[0] == c


def test_merge_canonicalizes_angle():
    out, _ = merge_rotations(from_gates(1, [("ry", 3.0, 0), ("ry", 3.0, 0)]))
    theta = out.gates[0].param
    assert -math.pi < theta <= math.pi
    assert theta == pytest.approx(6.0 - 2 * math.pi)
    assert canonical_angle(-math.pi) == pytest.approx(math.pi)


def test_remove_idle_examples():
    c = from_gates(3, [("h", 0), ("cx", 0, 2)])
    out, remap = remove_idle_qubits(c)
    assert remap == {0: 0, 2: 1}
    assert out == from_gates(2, [("h", 0), ("cx", 0, 1)])
    out, remap = remove_idle_qubits(bell_circuit())
    assert out == bell_circuit() and remap == {0: 0, 1: 1}
    out, remap = remove_idle_qubits(Circuit(5))
    assert out.num_qubits == 1 and len(out) == 0 and remap == {0: 0}


def test_templates_verified_at_load():
    for tpl in BUILTIN_TEMPLATES:
        assert phase_equal(dense_unitary(Circuit(tpl.num_roles, 0, tpl.pattern)),
                           dense_unitary(Circuit(tpl.num_roles, 0, tpl.replacement)), 1e-12)
    with pytest.raises(TemplateError):
        Template("bogus", (Gate(K.T, (0,)),), (Gate(K.S, (0,)),))


def test_template_examples():
    c = from_gates(2, [("h", 0), ("h", 1), ("cx", 0, 1), ("h", 0), ("h", 1)])
    out, rep = apply_templates(c)
    assert out.instructions == (Gate(K.CX, (1, 0)),) and rep.rewrites == 1
    out, _ = apply_templates(from_gates(1, [("t", 0), ("t", 0)]))
    assert out.instructions == (Gate(K.S, (0,)),)
    c = from_gates(2, [("x", 0), ("cx", 0, 1)])
    out, rep = apply_templates(c)
    assert out == c and rep.rewrites == 0


def test_template_skips_disjoint_and_respects_blockers():
    c = from_gates(3, [("t", 0), ("x", 2), ("t", 0)])
    out, _ = apply_templates(c)
    assert out.instructions == (Gate(K.S, (0,)), Gate(K.X, (2,)))
    c = from_gates(2, [("h", 0), ("x", 1), ("h", 1), ("cx", 0, 1), ("h", 0), ("h", 1)])
    out, rep = apply_templates(c)
    assert rep.rewrites == 0
    # verify soundness of a match that skips an unrelated gate
    c = from_gates(3, [("h", 0), ("x", 2), ("h", 1), ("cx", 0, 1), ("h", 0), ("h", 1)])
    out, rep = apply_templates(c)
    assert rep.rewrites == 1
    assert phase_equal(dense_unitary(out), dense_unitary(c), 1e-12)


def test_optimize_examples():
    res = optimize(from_gates(2, [("h", 0), ("h", 0), ("x", 1)]))
    assert res.circuit == from_gates(1, [("x", 0)])
    assert res.remap == {1: 0}
    res = optimize(bell_circuit())
    assert res.circuit == bell_circuit()
    res = optimize(from_gates(1, [("t", 0), ("t", 0), ("sdg", 0)]))
    assert len(res.circuit) == 0


def test_optimize_unpacks_and_reports():
    circuit, reports = optimize(from_gates(1, [("h", 0), ("h", 0)]), "depth")
    assert len(circuit) == 0
    assert reports and all(r.objective == "depth" for r in reports)
    with pytest.raises(ValueError):
        optimize(circuit, "speed")


def test_depth():
    assert depth(bell_circuit()) == 3
    assert depth(Circuit(1)) == 0


def test_soundness_and_monotonicity_random():
    rng = np.random.default_rng(77)
    for _ in range(150):
        n = int(rng.integers(1, 6))
        c = random_circuit(rng, n, int(rng.integers(0, 31)))
        res = optimize(c)
        assert len(res.circuit.gates) <= len(c.gates)
        assert phase_equal(dense_unitary(lift(res, n)), dense_unitary(c), 1e-9)
        for fn in (cancel_inverse_pairs, merge_rotations):
            out, rep = fn(c)
            assert depth(out) <= depth(c)
            assert rep.gates_after <= rep.gates_before


def test_measurements_untouched():
    rng = np.random.default_rng(12)
    for _ in range(50):
        n = int(rng.integers(1, 5))
        c = with_measures(random_circuit(rng, n, 20))
        res = optimize(c)
        before = {(m.qubit, m.cbit) for m in c.measures}
        back = {v: k for k, v in res.remap.items()}
        after = {(back[m.qubit], m.cbit) for m in res.circuit.measures}
        assert before == after
