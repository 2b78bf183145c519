#!/usr/bin/env python3
"""
Checks for the Majorana free-fermion pathway against the Jordan-Wigner oracle.
"""
import sys

import numpy as np
import pytest
import scipy.sparse as sp

from errors import ConfigurationError, NotApplicableError, ShapeError
from fermions import (MajoranaCoupling, PairIndex, fermion_shadow_hamiltonian, gamma_from_alpha_beta,
                      jordan_wigner, jw_operator_set, jw_product_state, majorana_matrices,
                      majorana_structure_table, one_body_matrix, pair_expectations_to_rdm,
                      product_state_shadow, quartic_majorana_term, random_coupling, random_number_conserving,
                      rdm_to_pair_expectations, single_particle_crosscheck, structure_alpha, subset_energy,
                      total_energy, vacuum_shadow)
from hilbert_oracle import PureState, evolve_full, expectations, shadow_from_state
from shadow_core import (build_from_structure_constants, build_shadow_hamiltonian_dense, evolve_shadow,
                         structure_table_from_operators)


def _annihilators(n):
    cs = majorana_matrices(n)
    return [(cs[2 * j] + 1j * cs[2 * j + 1]) / 2 for j in range(n)]


def _hopping_chain(n):
    alpha = np.zeros((n, n))
    for j in range(n - 1):
        alpha[j, j + 1] = alpha[j + 1, j] = -1.0
    return gamma_from_alpha_beta(alpha, np.zeros((n, n)))


def test_pair_index_layout():
    pairs = PairIndex(2)
    assert pairs.size == 6
    assert pairs.labels[0] == "c1c2"
    assert pairs.index(3, 2) == pairs.index(2, 3) == 5
    with pytest.raises(ShapeError):
        pairs.index(1, 1)


def test_coupling_canonicalization():
    w = np.zeros((2, 2), dtype=complex)
    w[0, 1], w[1, 0] = 0.5j, -0.5j
    w[0, 0] = 0.25
    g = MajoranaCoupling.from_matrix(1, w)
    assert g.gamma[0, 1] == pytest.approx(0.5j)
    assert g.offset == pytest.approx(0.25)
    # a one-sided entry keeps only its antisymmetric half
    same = MajoranaCoupling.from_triplets(1, [[1, 2, 0, 1.0]])
    assert same.gamma[0, 1] == pytest.approx(0.5j)
    with pytest.raises(ConfigurationError):
        MajoranaCoupling.from_triplets(1, [[1, 2, 1.0, 0.0]])


def test_single_pair_commutes_with_h():
    omega = 0.7
    g = MajoranaCoupling.from_triplets(1, [[1, 2, 0, omega / 2], [2, 1, 0, -omega / 2]])
    sh = fermion_shadow_hamiltonian(g)
    assert sh.dim == 1
    assert sh.hs.nnz == 0


def test_zero_coupling_gives_zero_hs():
    g = MajoranaCoupling(3, sp.csr_matrix((6, 6)))
    assert fermion_shadow_hamiltonian(g).hs.nnz == 0


def test_index_level_hs_matches_dense_trace_projection():
    for g in (_hopping_chain(2), random_coupling(3, 3, np.random.default_rng(4))):
        sh = fermion_shadow_hamiltonian(g)
        dense = build_shadow_hamiltonian_dense(jordan_wigner(g), jw_operator_set(g.n))
        assert np.abs(sh.hs.toarray() - dense.hs.toarray()).max() < 1e-10
        assert dense.leakage < 1e-10
        assert sh.hermitian_defect < 1e-12


def test_structure_constant_pathway_matches():
    g = random_coupling(3, 2, np.random.default_rng(8))
    via_structure = build_from_structure_constants(majorana_structure_table(3), structure_alpha(g))
    assert np.abs(via_structure.hs.toarray() - fermion_shadow_hamiltonian(g).hs.toarray()).max() < 1e-12


def test_structure_table_matches_dense_commutators():
    table = majorana_structure_table(2)
    dense = structure_table_from_operators(jw_operator_set(2))
    assert set(table.entries) == set(dense.entries)
    for key, row in table.entries.items():
        expected = dict(dense.entries[key])
        assert set(dict(row)) == set(expected)
        for l, value in row:
            assert value == pytest.approx(expected[l])


def test_bounds_hold_for_large_sparse_couplings():
    rng = np.random.default_rng(12)
    for degree in (2, 3, 4):
        g = random_coupling(200, degree, rng)
        assert g.degree <= degree
        sh = fermion_shadow_hamiltonian(g)
        assert sh.sparsity <= 2 * degree
        assert sh.max_norm <= sh.bounds["max_norm_bound"] + 1e-12


def test_vacuum_shadow_examples():
    two = vacuum_shadow(2)
    pairs = PairIndex(2)
    expected = np.zeros(pairs.size)
    expected[pairs.index(0, 1)] = expected[pairs.index(2, 3)] = 1 / np.sqrt(2)
    assert np.allclose(two.amplitudes, expected)
    assert np.allclose(vacuum_shadow(1).amplitudes, [1.0])
    for n in range(1, 5):
        oracle = expectations(jw_product_state(n), jw_operator_set(n))
        assert np.abs(vacuum_shadow(n).expectations() - oracle).max() < 1e-10


def test_product_states_and_particle_hole():
    n = 2
    assert np.allclose(product_state_shadow(n, []).amplitudes, vacuum_shadow(n).amplitudes)
    assert np.allclose(product_state_shadow(n, [1, 2]).amplitudes, -vacuum_shadow(n).amplitudes)
    one = product_state_shadow(n, [1])
    pairs = PairIndex(n)
    assert np.allclose(one.amplitudes[[pairs.index(0, 1), pairs.index(2, 3)]], np.array([-1, 1]) / np.sqrt(2))
    oracle = expectations(jw_product_state(n, [1]), jw_operator_set(n))
    assert np.abs(one.expectations() - oracle).max() < 1e-10
    with pytest.raises(ShapeError):
        product_state_shadow(n, [3])


def test_total_energy_on_eigenstate():
    g = random_coupling(3, 3, np.random.default_rng(21))
    h = jordan_wigner(g)
    evals, evecs = np.linalg.eigh(h)
    psi = PureState.from_vector(evecs[:, 0])
    st = shadow_from_state(psi, jw_operator_set(3))
    assert total_energy(st, g) == pytest.approx(evals[0], abs=1e-8)


def test_vacuum_energy_of_single_mode():
    omega = 1.3
    g = MajoranaCoupling.from_triplets(1, [[1, 2, 0, omega / 2], [2, 1, 0, -omega / 2]])
    # H = i omega c1 c2 = 2 omega a^dag a - omega
    assert total_energy(vacuum_shadow(1), g) == pytest.approx(-omega)


def test_subset_energy_errors():
    g = random_coupling(2, 2, np.random.default_rng(1))
    st = vacuum_shadow(2)
    with pytest.raises(ShapeError):
        subset_energy(st, g, [])
    with pytest.raises(ShapeError):
        subset_energy(st, g, [9])
    empty = MajoranaCoupling(2, sp.csr_matrix((4, 4)))
    with pytest.raises(NotApplicableError):
        subset_energy(st, empty, [1, 2])


def test_one_body_matrix_round_trip():
    rng = np.random.default_rng(6)
    g0 = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    alpha = 0.5 * (g0 + g0.conj().T)
    g = gamma_from_alpha_beta(alpha, np.zeros((3, 3)))
    h1, pairing = one_body_matrix(g)
    assert np.allclose(h1, alpha)
    assert pairing < 1e-12
    a = _annihilators(3)
    dense = sum(alpha[j, k] * a[j].conj().T @ a[k] for j in range(3) for k in range(3))
    assert np.allclose(jordan_wigner(g), dense)


def test_single_mode_one_body_coefficient():
    omega = 0.9
    g = MajoranaCoupling.from_triplets(1, [[1, 2, 0, omega / 2], [2, 1, 0, -omega / 2]])
    h1, _ = one_body_matrix(g)
    assert np.allclose(h1, [[2 * omega]])


def test_pairing_is_detected():
    beta = np.array([[0.0, 0.4], [-0.4, 0.0]])
    _, pairing = one_body_matrix(gamma_from_alpha_beta(np.eye(2), beta))
    assert pairing > 0.1


def test_rdm_conversion_against_oracle():
    rng = np.random.default_rng(3)
    n = 3
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    psi /= np.linalg.norm(psi)
    a = _annihilators(n)
    vac = jw_product_state(n).amplitudes
    state = PureState.from_vector(sum(psi[j] * (a[j].conj().T @ vac) for j in range(n)))
    rdm = np.outer(psi.conj(), psi)
    values = rdm_to_pair_expectations(rdm)
    assert np.allclose(values, expectations(state, jw_operator_set(n)))
    assert np.allclose(pair_expectations_to_rdm(values, n), rdm)


def test_single_particle_crosscheck_examples():
    assert single_particle_crosscheck(_hopping_chain(2), 1.0)["match"]
    assert single_particle_crosscheck(_hopping_chain(2), 0.0)["match"]
    rng = np.random.default_rng(10)
    result = single_particle_crosscheck(random_number_conserving(4, rng), 2.5,
                                        rng.normal(size=4) + 1j * rng.normal(size=4))
    assert result["max_error"] < 1e-8
    with pytest.raises(NotApplicableError):
        single_particle_crosscheck(gamma_from_alpha_beta(np.eye(2), np.array([[0, 1.0], [-1.0, 0]])), 1.0)


def test_evolution_matches_oracle():
    rng = np.random.default_rng(17)
    g = random_coupling(3, 3, rng)
    s = jw_operator_set(3)
    psi = jw_product_state(3, [2])
    st0 = product_state_shadow(3, [2])
    for t in (0.5, 2.0):
        expected = expectations(evolve_full(jordan_wigner(g), psi, t), s)
        got = evolve_shadow(fermion_shadow_hamiltonian(g), st0, t).expectations()
        assert np.abs(got - expected).max() < 1e-8


def test_quartic_term_leaks():
    g = random_coupling(3, 2, np.random.default_rng(2))
    assert build_shadow_hamiltonian_dense(jordan_wigner(g), jw_operator_set(3)).leakage < 1e-10
    h = jordan_wigner(g) + quartic_majorana_term(3, (1, 2, 3, 5), 0.5)
    assert build_shadow_hamiltonian_dense(h, jw_operator_set(3)).leakage > 0.1
    with pytest.raises(ShapeError):
        quartic_majorana_term(3, (1, 1, 2, 3), 1.0)


def main():
    print("=" * 60)
    print("fermions checks")
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
