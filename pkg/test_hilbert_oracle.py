#!/usr/bin/env python3
"""
Checks for the brute-force full Hilbert-space oracle.
"""
import sys

import numpy as np
import pytest

import config
import hilbert_oracle
from errors import CapacityError, ShapeError
from hilbert_oracle import (DensityMatrix, PureState, basis_state, density_from_pure, evolve_density,
                            evolve_full, expectations, heisenberg_operator, maximally_mixed,
                            random_density_matrix, random_pure_state, real_representation,
                            shadow_from_state, vec_state)
from qubits import full_pauli_set, one_local_set

Z = np.diag([1.0, -1.0]).astype(np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)


def test_evolve_full_examples():
    plus = PureState.from_vector([1, 1])
    assert np.allclose(evolve_full(Z, plus, 0.0).amplitudes, plus.amplitudes)
    out = evolve_full(Z, plus, np.pi / 4).amplitudes
    assert np.allclose(out, np.array([np.exp(-1j * np.pi / 4), np.exp(1j * np.pi / 4)]) / np.sqrt(2))


def test_pure_state_validation():
    with pytest.raises(ShapeError):
        PureState(np.array([1.0, 1.0]))
    with pytest.raises(ShapeError):
        PureState.from_vector([0.0, 0.0])
    with pytest.raises(ShapeError):
        PureState.from_vector([1, 0, 0], n_qubits=2)


def test_density_matrix_validation():
    with pytest.raises(ShapeError):
        DensityMatrix(np.diag([1.0, 1.0]))
    with pytest.raises(ShapeError):
        DensityMatrix(np.diag([1.5, -0.5]))
    assert maximally_mixed(4).purity == pytest.approx(0.25)


def test_expectations_examples():
    s = one_local_set(1)
    assert np.allclose(expectations(basis_state(2), s), [1, 0, 0, 1])
    assert np.allclose(expectations(maximally_mixed(2), s)[1:], [0, 0, 0])


def test_shadow_from_state_norms():
    n = 3
    st = shadow_from_state(basis_state(2 ** n), one_local_set(n))
    assert st.norm_a == pytest.approx(n + 1)
    assert np.allclose(st.amplitudes[st.amplitudes != 0], 1 / np.sqrt(n + 1))
    rng = np.random.default_rng(5)
    full = shadow_from_state(random_pure_state(4, rng), full_pauli_set(2))
    assert full.norm_a == pytest.approx(4.0)


def test_vec_state_examples():
    assert np.allclose(vec_state(basis_state(2)), [1, 0, 0, 0])
    assert np.allclose(vec_state(maximally_mixed(2)), np.array([1, 0, 0, 1]) / np.sqrt(2))
    rng = np.random.default_rng(1)
    psi = random_pure_state(2, rng)
    assert np.allclose(vec_state(density_from_pure(psi)), vec_state(psi))


def test_evolve_density_matches_pure():
    rng = np.random.default_rng(9)
    g = rng.normal(size=(4, 4))
    h = g + g.T
    psi = random_pure_state(4, rng)
    rho_t = evolve_density(h, density_from_pure(psi), 1.1).matrix
    psi_t = evolve_full(h, psi, 1.1).amplitudes
    assert np.allclose(rho_t, np.outer(psi_t, psi_t.conj()))


def test_heisenberg_operator_rotates_x():
    t = 0.4
    xt = heisenberg_operator(Z, X, t)
    y = np.array([[0, -1j], [1j, 0]])
    assert np.allclose(xt, np.cos(2 * t) * X - np.sin(2 * t) * y)


def test_random_density_matrix_rank():
    rng = np.random.default_rng(2)
    rho = random_density_matrix(4, rng, rank=1)
    assert rho.purity == pytest.approx(1.0)


def test_real_representation():
    psi = PureState.from_vector([1, 1j])
    out = real_representation(psi).amplitudes
    assert np.allclose(out, np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_capacity_cutoff():
    hilbert_oracle._check_capacity(config.DENSE_CUTOFF)
    with pytest.raises(CapacityError):
        hilbert_oracle._check_capacity(config.DENSE_CUTOFF + 1)
    with pytest.raises(CapacityError):
        hilbert_oracle._check_capacity(16, cutoff=8)


def main():
    print("=" * 60)
    print("hilbert_oracle checks")
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
