#!/usr/bin/env python3
"""
Checks for correlator shadows and Heisenberg-picture operator evolution.
"""
import sys

import numpy as np
import pytest

from correlators import (Circuit, Gate, OperatorVector, brickwork_circuit, circuit_transfer_matrix,
                         evolve_correlator, evolve_multitime, evolve_operator_circuit,
                         evolve_operator_continuous, expand_operator, full_pauli_labels, init_correlator,
                         init_multitime, operator_from_vector, operator_trajectory, oracle_correlators,
                         oracle_multitime, support_metric, support_radius)
from errors import DegenerateStateError, InvarianceViolationError, ShapeError
from hilbert_oracle import heisenberg_operator, random_pure_state
from qubits import PauliTermSum, full_pauli_set, one_local_set, one_local_shadow_hamiltonian
from shadow_core import OperatorSet

X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)


def _fields(n, rng):
    return PauliTermSum.from_terms(n, [(f"{p}{q + 1}", float(rng.normal())) for q in range(n) for p in "XYZ"])


def test_zero_times_return_initial_correlators():
    rng = np.random.default_rng(1)
    h = _fields(2, rng)
    cs0 = init_correlator(random_pure_state(4, rng), one_local_set(2))
    out = evolve_correlator(one_local_shadow_hamiltonian(h), cs0, 0.0, 0.0)
    assert np.allclose(out.amplitudes, cs0.amplitudes)
    assert out.times == (0.0, 0.0)


def test_correlators_match_oracle():
    rng = np.random.default_rng(2)
    h = _fields(2, rng)
    s = one_local_set(2)
    psi = random_pure_state(4, rng)
    sh = one_local_shadow_hamiltonian(h)
    cs0 = init_correlator(psi, s)
    for t, t_prime in ((0.5, 0.0), (0.0, 1.2), (0.7, 2.0)):
        shadow = evolve_correlator(sh, cs0, t, t_prime).correlators()
        oracle = oracle_correlators(h.dense(), psi, s, t, t_prime)
        assert np.abs(shadow - oracle).max() < 1e-8 * np.sqrt(cs0.norm_a)


def test_three_register_correlators_match_oracle():
    rng = np.random.default_rng(6)
    h = _fields(1, rng)
    s = one_local_set(1)
    psi = random_pure_state(2, rng)
    sh = one_local_shadow_hamiltonian(h)
    cs0 = init_multitime(psi, [s, s, s])
    times = [0.3, 1.1, 0.0]
    shadow = evolve_multitime([sh, sh, sh], cs0, times).correlators()
    oracle = oracle_multitime([h.dense()] * 3, psi, [s, s, s], times)
    assert np.abs(shadow - oracle).max() < 1e-8 * np.sqrt(cs0.norm_a)
    with pytest.raises(ShapeError):
        evolve_correlator(sh, cs0, 1.0, 1.0)


def test_conserved_operator_is_constant():
    sh = one_local_shadow_hamiltonian(PauliTermSum.from_terms(1, [("Z1", 0.8)]))
    z0 = OperatorVector.basis(one_local_set(1).labels, "Z1")
    z_t = evolve_operator_continuous(sh, z0, 3.7)
    assert np.allclose(z_t.z, z0.z)


def test_continuous_evolution_matches_heisenberg_picture():
    rng = np.random.default_rng(9)
    h = _fields(2, rng)
    s = one_local_set(2)
    sh = one_local_shadow_hamiltonian(h)
    z0 = OperatorVector.basis(s.labels, "Y2")
    for t in (0.5, 2.0):
        z_t = evolve_operator_continuous(sh, z0, t)
        direct = heisenberg_operator(h.dense(), s.matrices[s.index("Y2")], t)
        assert np.abs(z_t.z - expand_operator(direct, s)).max() < 1e-8
        assert np.allclose(operator_from_vector(z_t, s), direct, atol=1e-8)


def test_identity_gate_has_identity_transfer_matrix():
    tm = circuit_transfer_matrix(np.eye(2), full_pauli_set(1))
    assert np.allclose(tm.g, np.eye(4))
    assert tm.unitarity_defect < 1e-12


def test_hadamard_exchanges_x_and_z():
    labels = full_pauli_labels(1)
    assert labels == ["1", "X1", "Z1", "XZ1"]
    circuit = Circuit(1, (Gate("H", (0,)),))
    assert np.allclose(evolve_operator_circuit(circuit, OperatorVector.basis(labels, "X1")).z, [0, 0, 1, 0])
    assert np.allclose(evolve_operator_circuit(circuit, OperatorVector.basis(labels, "Z1")).z, [0, 1, 0, 0])
    assert np.allclose(evolve_operator_circuit(circuit, OperatorVector.basis(labels, "XZ1")).z, [0, 0, 0, -1])


def test_empty_circuit_leaves_operator_alone():
    labels = full_pauli_labels(2)
    z0 = OperatorVector.basis(labels, "X1 Z2")
    assert np.allclose(evolve_operator_circuit(Circuit(2, ()), z0).z, z0.z)


def test_cz_spreads_x_to_neighbour():
    labels = full_pauli_labels(2)
    z0 = OperatorVector.basis(labels, "X1")
    metric = support_metric(z0, 2)
    assert metric == {"histogram": {1: 1.0}, "support": [0]}
    z1 = evolve_operator_circuit(Circuit(2, (Gate("CZ", (0, 1)),)), z0)
    assert np.allclose(z1.z, OperatorVector.basis(labels, "X1 Z2").z)
    assert support_metric(z1, 2)["support"] == [0, 1]
    assert support_radius(z1, 2, 0) == 1


def test_trajectory_matches_dense_conjugation():
    rng = np.random.default_rng(4)
    n = 3
    circuit = brickwork_circuit(n, 3, rng, kind="random")
    s = full_pauli_set(n)
    z0 = OperatorVector.basis(s.labels, "Z2")
    trajectory = operator_trajectory(circuit, z0)
    assert len(trajectory) == len(circuit.gates) + 1
    u = circuit.dense()
    direct = expand_operator(u.conj().T @ s.matrices[s.index("Z2")] @ u, s)
    assert np.abs(trajectory[-1].z - direct).max() < 1e-10
    via_dense = evolve_operator_circuit(circuit, z0, s=s)
    assert np.abs(via_dense.z - direct).max() < 1e-10


def test_light_cone_of_brickwork():
    rng = np.random.default_rng(11)
    n = 5
    labels = full_pauli_labels(n)
    for depth in (1, 2, 3):
        for kind in ("cz", "random"):
            origin = int(rng.integers(n))
            zv = OperatorVector.basis(labels, f"X{origin + 1}")
            out = evolve_operator_circuit(brickwork_circuit(n, depth, rng, kind=kind), zv)
            assert support_radius(out, n, origin) <= depth


def test_non_invariant_set_is_refused():
    s = OperatorSet(("X1", "Y1"), np.array([X, Y]), 2.0)
    with pytest.raises(InvarianceViolationError) as err:
        circuit_transfer_matrix(Gate("H", (0,)).unitary(), s)
    assert err.value.leakage > 0.5


def test_operator_vector_validation():
    with pytest.raises(DegenerateStateError):
        OperatorVector(np.zeros(4))
    with pytest.raises(ShapeError):
        OperatorVector.basis(full_pauli_labels(1), "Y1")
    with pytest.raises(ShapeError):
        Circuit(2, (Gate("CZ", (0, 2)),))
    with pytest.raises(ShapeError):
        Gate("toffoli", (0, 1, 2)).unitary()


def main():
    print("=" * 60)
    print("correlators checks")
    print("=" * 60)
    failed = 0
    for name, check in list(globals().items()):
        if name.startswith("test_") and callable(check):
            try:
                check()
                print(f"  ✓ {name}")
            except Exception as e:
                print(f"  ✗ {name}: {e!r}")
                failed += 1
    print("=" * 60)
    if failed:
        print(f"✗ {failed} check(s) failed")
        sys.exit(1)
    print("✓ All checks passed")


if __name__ == '__main__':
    main()
