import itertools
import json
import math

import numpy as np
import pytest

from helpers import dense_unitary, embed, one_qubit_matrix, random_circuit, with_measures
from vaqc.circuit import Circuit, Gate, GateKind, Measure, bell_circuit
from vaqc.simulator import (Distribution, SimulationError, circuit_unitary, equivalent_up_to_global_phase,
                            gate_matrix, measurement_distribution, run_statevector, sample)

K = GateKind
R = 1 / math.sqrt(2)


def test_empty_circuit_state():
    np.testing.assert_allclose(run_statevector(Circuit(1)).amplitudes, [1, 0])


def test_hadamard_superposition():
    np.testing.assert_allclose(run_statevector(Circuit(1).h(0)).amplitudes, [R, R], atol=1e-15)


def test_bell_state_ordering():
    # q0 is the least significant index bit: |00> and |11> are indices 0 and 3
    amps = run_statevector(Circuit(2).h(0).cx(0, 1)).amplitudes
    np.testing.assert_allclose(amps, [R, 0, 0, R], atol=1e-15)


def test_qubit_ordering_single_flip():
    amps = run_statevector(Circuit(3).x(1)).amplitudes
    assert amps[2] == 1


def test_statevector_rejects_measures_and_cap():
    with pytest.raises(SimulationError):
        run_statevector(bell_circuit())
    with pytest.raises(SimulationError):
        run_statevector(Circuit(3), max_qubits=2)


def test_bell_distribution():
    d = measurement_distribution(bell_circuit())
    assert set(d.probabilities) == {"00", "11"}
    for p in d.probabilities.values():
        assert abs(p - 0.5) < 1e-9


def test_x_then_measure():
    assert measurement_distribution(Circuit(1, 1).x(0).measure(0, 0)).probabilities == pytest.approx({"1": 1.0})


def test_fresh_measure():
    assert measurement_distribution(Circuit(1, 1).measure(0, 0)).probabilities == {"0": 1.0}


def test_no_measure_is_error():
    with pytest.raises(SimulationError):
        measurement_distribution(Circuit(1).h(0))


def test_cbit_zero_is_leftmost():
    # qubit 0 -> cbit 1, qubit 1 (flipped) -> cbit 0
    c = Circuit(2, 2).x(1).measure(0, 1).measure(1, 0)
    assert measurement_distribution(c).probabilities == pytest.approx({"10": 1.0})


def test_unwritten_cbits_read_zero():
    c = Circuit(1, 3).x(0).measure(0, 2)
    assert measurement_distribution(c).probabilities == pytest.approx({"001": 1.0})


def test_marginalization_matches_full_distribution():
    rng = np.random.default_rng(5)
    for _ in range(30):
        n = int(rng.integers(2, 5))
        base = random_circuit(rng, n, 15)
        full = measurement_distribution(with_measures(base)).probabilities
        keep = sorted(rng.choice(n, size=int(rng.integers(1, n)), replace=False).tolist())
        part = measurement_distribution(with_measures(base, keep)).probabilities
        expected: dict[str, float] = {}
        for bits, p in full.items():
            key = "".join(bits[q] for q in keep)
            expected[key] = expected.get(key, 0.0) + p
        for key in set(expected) | set(part):
            assert abs(expected.get(key, 0.0) - part.get(key, 0.0)) < 1e-12


def test_sample_point_mass():
    h = sample(Distribution(1, {"0": 1.0}), 100, seed=1)
    assert h.counts == {"0": 100}


def test_sample_bell_statistics():
    h = sample(measurement_distribution(bell_circuit()), 10_000, seed=42)
    assert sum(h.counts.values()) == 10_000
    assert set(h.counts) == {"00", "11"}
    for v in h.counts.values():
        assert 4800 <= v <= 5200


def test_sample_determinism_and_zero_shots():
    d = measurement_distribution(bell_circuit())
    assert sample(d, 10, 7).counts == sample(d, 10, 7).counts
    with pytest.raises(SimulationError):
        sample(d, 0, 7)


def test_json_keys_sorted():
    h = sample(measurement_distribution(bell_circuit()), 100, 3)
    assert list(json.loads(h.to_json())) == sorted(h.counts)
    d = measurement_distribution(bell_circuit())
    assert json.loads(d.to_json()) == pytest.approx({"00": 0.5, "11": 0.5})


def test_unitary_examples():
    np.testing.assert_allclose(circuit_unitary(Circuit(2)), np.eye(4))
    np.testing.assert_allclose(circuit_unitary(Circuit(1).x(0)), [[0, 1], [1, 0]])
    np.testing.assert_allclose(circuit_unitary(Circuit(2).cx(0, 1).cx(0, 1)), np.eye(4))
    with pytest.raises(SimulationError):
        circuit_unitary(Circuit(11))
    with pytest.raises(SimulationError):
        circuit_unitary(bell_circuit())


@pytest.mark.parametrize("kind", list(GateKind))
def test_gate_matrices_unitary_and_match_oracle(kind):
    for theta in ([None] if kind.num_params == 0 else [0.0, 0.37, -2.9, math.pi]):
        m = gate_matrix(kind, theta)
        assert np.max(np.abs(m @ m.conj().T - np.eye(len(m)))) < 1e-12
        if kind.arity == 1:
            np.testing.assert_allclose(m, one_qubit_matrix(kind, theta), atol=1e-15)
        else:
            # gate_matrix indexes the first operand as the low bit
            np.testing.assert_allclose(m, embed(Gate(kind, (0, 1)), 2), atol=1e-15)


def test_kernels_match_dense_oracle():
    rng = np.random.default_rng(11)
    for _ in range(60):
        n = int(rng.integers(1, 5))
        c = random_circuit(rng, n, int(rng.integers(0, 25)))
        assert np.max(np.abs(circuit_unitary(c) - dense_unitary(c))) < 1e-12


def test_every_two_qubit_placement():
    for kind in (K.CX, K.CZ, K.SWAP):
        for a, b in itertools.permutations(range(3), 2):
            c = Circuit(3, 0, [Gate(kind, (a, b))])
            np.testing.assert_allclose(circuit_unitary(c), dense_unitary(c), atol=1e-15)


def test_norm_preservation_long_circuit():
    rng = np.random.default_rng(3)
    c = random_circuit(rng, 6, 10_000, special_angles=False)
    state = np.zeros(64, dtype=complex)
    state[0] = 1
    from vaqc.simulator import apply_gate
    worst = 0.0
    for g in c.gates[:500]:
        before = np.linalg.norm(state)
        apply_gate(state, g, 6)
        worst = max(worst, abs(np.linalg.norm(state) - before))
    assert worst < 1e-12
    assert abs(run_statevector(c).norm() - 1) < 1e-9


def test_equivalence_oracle():
    rng = np.random.default_rng(0)
    u = circuit_unitary(random_circuit(rng, 3, 20))
    assert equivalent_up_to_global_phase(u, u, 1e-12)
    assert equivalent_up_to_global_phase(np.eye(4), -np.eye(4), 1e-12)
    assert equivalent_up_to_global_phase(np.exp(0.3j) * u, u, 1e-12)
    x = gate_matrix(K.X)
    z = gate_matrix(K.Z)
    assert not equivalent_up_to_global_phase(x, z, 1e-9)
    with pytest.raises(ValueError):
        equivalent_up_to_global_phase(np.eye(2), np.eye(4), 1e-9)


def test_measured_distribution_matches_oracle_probabilities():
    rng = np.random.default_rng(8)
    for _ in range(20):
        n = int(rng.integers(1, 4))
        base = random_circuit(rng, n, 12)
        psi = dense_unitary(base)[:, 0]
        expected = {}
        for idx, amp in enumerate(psi):
            p = abs(amp) ** 2
            if p >= 1e-12:
                key = "".join(str((idx >> q) & 1) for q in range(n))
                expected[key] = p
        got = measurement_distribution(with_measures(base)).probabilities
        assert set(got) == set(expected)
        for k in got:
            assert abs(got[k] - expected[k]) < 1e-12
