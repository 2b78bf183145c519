#!/usr/bin/env python3
"""
Checks for qubit operator sets, the Bell rotation V_S and the swap-test demo.
"""
import sys

import numpy as np
import pytest

from errors import CapacityError, ConfigurationError, DegenerateStateError, NotApplicableError, ShapeError
from hilbert_oracle import PureState, basis_state, evolve_full, random_density_matrix, random_pure_state
from qubits import (PauliString, PauliTermSum, all_zero_shadow, bell_rotation, bell_rotation_defining,
                    conjugate_overlap, full_pauli_set, heisenberg_weyl_set, heisenberg_weyl_vs,
                    incomplete_basis_shadow, lemma_error, one_local_set, one_local_shadow_hamiltonian,
                    parse_pauli, pauli_matrix, projector_check, shadow_unitary_evolution,
                    statevector_shadow, swap_test_conjugate_overlap)
from shadow_core import OperatorSet, build_shadow_hamiltonian_dense, evolve_shadow

X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def test_parse_pauli_labels():
    assert np.allclose(pauli_matrix("Y1", 1), Y)
    assert np.allclose(pauli_matrix("X1 Z2", 2), np.kron(X, Z))
    assert parse_pauli("Y1", 1).label == "XZ1"
    assert parse_pauli("1", 3).weight == 0
    assert parse_pauli("X1 XZ3", 3).support == (0, 2)
    assert not parse_pauli("XZ1", 1).is_hermitian
    assert parse_pauli("Y2", 2).is_hermitian


def test_parse_pauli_errors():
    for bad in ("W1", "X3", "X1 Z1", "X0"):
        with pytest.raises(ShapeError):
            parse_pauli(bad, 2)


def test_term_sum_validation():
    with pytest.raises(ConfigurationError):
        PauliTermSum.from_terms(1, [("XZ1", 1.0)])
    with pytest.raises(ShapeError):
        PauliTermSum.from_terms(2, [("Z1", 1.0), ("Z1", 2.0)])


def test_one_local_z_field():
    sh = one_local_shadow_hamiltonian(PauliTermSum.from_terms(1, [("Z1", 1.0)]))
    assert sh.dim == 4
    assert np.allclose(sh.hs.toarray()[1:3, 1:3], [[0, -2j], [2j, 0]])
    dense = build_shadow_hamiltonian_dense(Z, one_local_set(1))
    assert np.allclose(sh.hs.toarray(), dense.hs.toarray())


def test_one_local_matches_dense_for_random_fields():
    rng = np.random.default_rng(4)
    n = 3
    terms = [(f"{p}{q + 1}", float(rng.normal())) for q in range(n) for p in "XYZ"] + [("1", 0.3)]
    h = PauliTermSum.from_terms(n, terms)
    sh = one_local_shadow_hamiltonian(h)
    dense = build_shadow_hamiltonian_dense(h.dense(), one_local_set(n))
    assert dense.leakage < 1e-12
    assert np.abs(sh.hs.toarray() - dense.hs.toarray()).max() < 1e-12
    assert sh.sparsity <= 2


def test_zero_hamiltonian_and_two_local_refusal():
    assert one_local_shadow_hamiltonian(PauliTermSum.from_terms(2, [])).hs.nnz == 0
    with pytest.raises(NotApplicableError):
        one_local_shadow_hamiltonian(PauliTermSum.from_terms(2, [("X1 X2", 1.0)]))


def test_all_zero_shadow():
    assert np.allclose(all_zero_shadow(1).amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2))
    three = all_zero_shadow(3)
    assert np.count_nonzero(three.amplitudes) == 4
    assert np.allclose(three.amplitudes[three.amplitudes != 0], 0.5)
    assert np.allclose(three.expectations(), statevector_shadow(basis_state(8), one_local_set(3)).expectations())


def test_one_local_evolution_matches_oracle():
    rng = np.random.default_rng(12)
    h = PauliTermSum.from_terms(2, [("X1", 0.4), ("Y2", -1.1), ("Z1", 0.7)])
    s = one_local_set(2)
    psi = random_pure_state(4, rng)
    st0 = statevector_shadow(psi, s)
    sh = one_local_shadow_hamiltonian(h)
    for t in (0.5, 2.0):
        expected = statevector_shadow(evolve_full(h.dense(), psi, t), s).expectations()
        assert np.abs(evolve_shadow(sh, st0, t).expectations() - expected).max() < 1e-8


def test_bell_rotation_maps_vacuum_to_bell_pair():
    v = bell_rotation(1)
    zero = np.array([1, 0, 0, 0], dtype=complex)
    assert np.allclose(v.conj().T @ zero, np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_bell_rotation_matches_defining_rows():
    for n in (1, 2):
        v = bell_rotation(n)
        assert np.abs(v - bell_rotation_defining(n)).max() < 1e-12
        assert np.abs(v @ v.conj().T - np.eye(4 ** n)).max() < 1e-12


def test_lemma_for_pure_and_mixed_states():
    rng = np.random.default_rng(7)
    n = 2
    s = full_pauli_set(n)
    v = bell_rotation(n)
    for _ in range(5):
        assert lemma_error(v, random_pure_state(4, rng), s) < 1e-10
    rho = random_density_matrix(4, rng, rank=2)
    assert lemma_error(v, rho, s) < 1e-10
    st = statevector_shadow(random_pure_state(4, rng), s)
    assert st.norm_a == pytest.approx(4.0)


def test_incomplete_basis_projection():
    s = OperatorSet(("X1", "Y1"), np.array([X, Y]), 2.0)
    check = projector_check(s)
    assert check["rank"] == pytest.approx(2.0)
    assert check["idempotent_defect"] < 1e-12
    plus = PureState.from_vector([1, 1])
    assert np.allclose(incomplete_basis_shadow(plus, s).amplitudes, [1, 0])
    with pytest.raises(DegenerateStateError):
        incomplete_basis_shadow(basis_state(2), s)


def test_conjugate_overlap_values():
    assert abs(conjugate_overlap(PureState.from_vector([0.6, 0.8]))) == pytest.approx(1.0)
    assert abs(conjugate_overlap(PureState.from_vector([1, 1j]))) == pytest.approx(0.0)


def test_swap_test_separates_real_and_flat_states():
    rng = np.random.default_rng(3)
    real_state = PureState.from_vector(rng.normal(size=4) + 0j)
    flat_state = PureState.from_vector([1.0, 1j])
    assert swap_test_conjugate_overlap(real_state, 10_000, seed=5) == pytest.approx(1.0)
    assert swap_test_conjugate_overlap(flat_state, 10_000, seed=5) < 0.2
    first = swap_test_conjugate_overlap(flat_state, 1000, seed=9)
    assert first == swap_test_conjugate_overlap(flat_state, 1000, seed=9)
    with pytest.raises(ShapeError):
        swap_test_conjugate_overlap(flat_state, 0)


def test_heisenberg_weyl_generalization():
    for dim in (2, 3):
        s = heisenberg_weyl_set(dim)
        assert s.size == dim * dim
        v = heisenberg_weyl_vs(dim)
        assert np.abs(v @ v.conj().T - np.eye(dim * dim)).max() < 1e-12
        rng = np.random.default_rng(dim)
        assert lemma_error(v, random_pure_state(dim, rng), s) < 1e-10
    with pytest.raises(ShapeError):
        heisenberg_weyl_set(1)


def test_shadow_unitary_evolution():
    rng = np.random.default_rng(19)
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    u, _ = np.linalg.qr(g)
    result = shadow_unitary_evolution(random_pure_state(4, rng), u)
    assert result["n"] == 2
    assert result["max_error"] < 1e-10
    with pytest.raises(ConfigurationError):
        shadow_unitary_evolution(random_pure_state(2, rng), 2 * np.eye(2))


def test_capacity_limits():
    with pytest.raises(CapacityError):
        full_pauli_set(7)
    with pytest.raises(CapacityError):
        bell_rotation(7)
    with pytest.raises(CapacityError):
        PauliString((0,) * 13, (1,) * 13).matrix()


def main():
    print("=" * 60)
    print("qubits checks")
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
