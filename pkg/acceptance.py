"""
Bundled acceptance matrix behind `shadowsim.py verify`.

Every case returns (max_error, tolerance) and passes when max_error <= tolerance.
Count-type checks (bound violations, light-cone escapes) use tolerance 0.
"""
import json
import logging
import time
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tabulate import tabulate

import config
import linalg_kernel as lk
from bosons import (OscillatorNetwork, boson_shadow_hamiltonian, build_B, classical_energy, classical_oracle,
                    quadratic_set_hamiltonian, quadratic_shadow_from_classical, random_network,
                    random_phase_point, shadow_from_classical, subset_energy_quadratic)
from correlators import (Circuit, Gate, OperatorVector, brickwork_circuit, evolve_correlator,
                         evolve_operator_circuit, evolve_operator_continuous, expand_operator,
                         full_pauli_labels, init_correlator, oracle_correlators, support_radius)
from errors import InternalConsistencyError, NotApplicableError, ShadowSimError
from fermions import (MajoranaCoupling, fermion_shadow_hamiltonian, jordan_wigner, jw_operator_set,
                      jw_product_state, product_state_shadow, quartic_majorana_term, random_coupling,
                      random_number_conserving, single_particle_crosscheck, subset_energy, vacuum_shadow)
from hilbert_oracle import (PureState, evolve_full, expectations, heisenberg_operator, random_density_matrix,
                            random_hermitian, random_pure_state, shadow_from_state)
from qubits import (PauliTermSum, bell_rotation, bell_rotation_defining, full_pauli_set, lemma_error,
                    one_local_set, one_local_shadow_hamiltonian, swap_test_conjugate_overlap)
from shadow_core import build_shadow_hamiltonian_dense, evolve_shadow, shot_rng

logger = logging.getLogger(__name__)

TIMES = (0.5, 2.0, 10.0)
ORACLE_TOL = 1e-8

Case = Callable[[np.random.Generator], Tuple[float, float]]


def _random_one_local(n: int, rng: np.random.Generator) -> PauliTermSum:
    return PauliTermSum.from_terms(n, [(f"{p}{q + 1}", rng.normal()) for q in range(n) for p in "XYZ"])


def case_fermion_equivalence(rng):
    worst = 0.0
    for n in (2, 3, 4, 5, 6):
        for _ in range(4):
            g = random_coupling(n, 2 + n % 2, rng)
            sh = fermion_shadow_hamiltonian(g)
            s = jw_operator_set(n)
            h = jordan_wigner(g)
            psi = random_pure_state(2 ** n, rng)
            st0 = shadow_from_state(psi, s)
            for t in TIMES:
                expected = shadow_from_state(evolve_full(h, psi, t), s).amplitudes
                worst = max(worst, lk.norm2(evolve_shadow(sh, st0, t).amplitudes - expected))
    return worst, ORACLE_TOL


def case_qubit_equivalence(rng):
    worst = 0.0
    for trial in range(24):
        n = 1 + trial % 6
        hsum = _random_one_local(n, rng)
        sh = one_local_shadow_hamiltonian(hsum)
        s = one_local_set(n)
        psi = random_pure_state(2 ** n, rng)
        st0 = shadow_from_state(psi, s)
        for t in TIMES:
            expected = shadow_from_state(evolve_full(hsum.dense(), psi, t), s).amplitudes
            worst = max(worst, lk.norm2(evolve_shadow(sh, st0, t).amplitudes - expected))
    return worst, ORACLE_TOL


def case_boson_correspondence(rng):
    worst = 0.0
    for trial in range(24):
        n = 1 + trial % 8
        net = random_network(n, rng)
        sh = boson_shadow_hamiltonian(build_B(net))
        x0 = random_phase_point(n, rng)
        st0 = shadow_from_classical(net, x0)
        for t in TIMES:
            expected = shadow_from_classical(net, classical_oracle(net, x0, t)).amplitudes
            worst = max(worst, lk.norm2(evolve_shadow(sh, st0, t).amplitudes - expected))
    mass, kappa = rng.uniform(0.5, 2.0), rng.uniform(0.2, 2.0)
    single = boson_shadow_hamiltonian(build_B(OscillatorNetwork([mass], {(0, 0): kappa})))
    omega = np.sqrt(kappa / mass)
    worst = max(worst, float(np.abs(np.linalg.eigvalsh(single.hs.toarray()) - [-omega, omega]).max()))
    return worst, ORACLE_TOL


def case_hermiticity(rng):
    worst = 0.0
    for n in (1, 2):
        h = random_hermitian(2 ** n, rng)
        worst = max(worst, build_shadow_hamiltonian_dense(h, full_pauli_set(n)).hermitian_defect)
    worst = max(worst, build_shadow_hamiltonian_dense(jordan_wigner(random_coupling(3, 3, rng)),
                                                      jw_operator_set(3)).hermitian_defect)
    worst = max(worst, fermion_shadow_hamiltonian(random_coupling(5, 3, rng)).hermitian_defect)
    return worst, 1e-10


def case_fermion_bounds(rng):
    violations = 0
    for degree in (2, 3, 4):
        try:
            fermion_shadow_hamiltonian(random_coupling(200, degree, rng))
        except InternalConsistencyError:
            violations += 1
    return float(violations), 0.0


def case_vacuum(rng):
    worst = 0.0
    for n in range(1, 6):
        s = jw_operator_set(n)
        oracle = expectations(jw_product_state(n), s)
        worst = max(worst, float(np.abs(vacuum_shadow(n).expectations() - oracle).max()))
        occupied = [j for j in range(1, n + 1) if rng.random() < 0.5]
        rest = [j for j in range(1, n + 1) if j not in occupied]
        a = product_state_shadow(n, occupied).amplitudes
        b = product_state_shadow(n, rest).amplitudes
        worst = max(worst, min(float(np.abs(a - b).max()), float(np.abs(a + b).max())))
        oracle = expectations(jw_product_state(n, occupied), s)
        worst = max(worst, float(np.abs(product_state_shadow(n, occupied).expectations() - oracle).max()))
    return worst, 1e-10


def _restricted(g: MajoranaCoupling, subset: Sequence[int]) -> MajoranaCoupling:
    keep = np.zeros(2 * g.n)
    keep[[j - 1 for j in subset]] = 1.0
    return MajoranaCoupling(g.n, g.gamma.multiply(np.outer(keep, keep)))


def coupled_subset(g: MajoranaCoupling, size: int, rng: np.random.Generator) -> List[int]:
    """size Majorana indices (1-based) that include a coupled pair, so G > 0"""
    coo = g.gamma.tocoo()
    if coo.nnz == 0:
        raise NotApplicableError("coupling has no nonzero entries")
    pick = int(rng.integers(coo.nnz))
    chosen = {int(coo.row[pick]) + 1, int(coo.col[pick]) + 1}
    rest = [j for j in range(1, 2 * g.n + 1) if j not in chosen]
    chosen.update(int(j) for j in rng.choice(rest, size=size - len(chosen), replace=False))
    return sorted(chosen)


def case_fermion_subset_energy(rng):
    worst = 0.0
    n = 3
    for _ in range(5):
        g = random_coupling(n, 3, rng)
        psi = random_pure_state(2 ** n, rng)
        st = shadow_from_state(psi, jw_operator_set(n))
        subset = coupled_subset(g, 4, rng)
        hj = jordan_wigner(_restricted(g, subset))
        direct = float(np.real(np.vdot(psi.amplitudes, hj @ psi.amplitudes)))
        worst = max(worst, abs(subset_energy(st, g, subset) - direct))
    return worst, ORACLE_TOL


def case_subset_energy_shots(rng):
    shots = 10_000
    worst = 0.0
    g = random_coupling(3, 3, rng)
    st = shadow_from_state(random_pure_state(8, rng), jw_operator_set(3))
    full = list(range(1, 7))
    weights = np.array([2 * g.gamma[j, k] for j in range(6) for k in range(j + 1, 6)])
    scale = np.linalg.norm(weights) * np.sqrt(st.norm_a)
    exact = subset_energy(st, g, full)
    noise = shot_rng(int(rng.integers(2 ** 31)))
    worst = abs(subset_energy(st, g, full, shots=shots, rng=noise) - exact) / scale

    net = random_network(2, rng)
    x0 = random_phase_point(2, rng)
    st2 = quadratic_shadow_from_classical(net, x0)
    size = build_B(net).size
    exact_b = subset_energy_quadratic(st2, range(1, size + 1))
    worst = max(worst, abs(exact_b - classical_energy(net, x0)) / classical_energy(net, x0))
    noisy = subset_energy_quadratic(st2, range(1, size + 1), shots=shots, rng=noise)
    worst = max(worst, abs(noisy - exact_b) / (0.5 * np.sqrt(st2.norm_a * size)))
    return float(worst), 4.0 / np.sqrt(shots)


def case_bell_lemma(rng):
    worst = 0.0
    for n in (1, 2, 3):
        s = full_pauli_set(n)
        v_s = bell_rotation(n)
        worst = max(worst, float(np.abs(v_s - bell_rotation_defining(n)).max()))
        for _ in range(17):
            worst = max(worst, lemma_error(v_s, random_pure_state(2 ** n, rng), s))
        rho = random_density_matrix(2 ** n, rng, rank=2)
        worst = max(worst, lemma_error(v_s, rho, s))
        norm_a = float(np.sum(np.abs(expectations(rho, s)) ** 2))
        worst = max(worst, abs(norm_a - 2 ** n * rho.purity))
    return worst, 1e-10


def case_swap_test(rng):
    seed = int(rng.integers(2 ** 31))
    real_state = PureState.from_vector(rng.normal(size=4) + 0j)
    flat_state = PureState.from_vector([1.0, 1j])
    high = swap_test_conjugate_overlap(real_state, 10_000, seed=seed)
    low = swap_test_conjugate_overlap(flat_state, 10_000, seed=seed)
    return max(0.0, 0.95 - high) + max(0.0, low - 0.2), 0.0


def case_correlators(rng):
    worst = 0.0
    grid = (0.0, 0.7, 1.5)
    g = random_coupling(3, 2, rng)
    systems = [(fermion_shadow_hamiltonian(g), jw_operator_set(3), jordan_wigner(g), jw_product_state(3, [2]))]
    hsum = _random_one_local(2, rng)
    systems.append((one_local_shadow_hamiltonian(hsum), one_local_set(2), hsum.dense(),
                    random_pure_state(4, rng)))
    for sh, s, h, psi in systems:
        cs0 = init_correlator(psi, s)
        for t in grid:
            for t_prime in grid:
                shadow = evolve_correlator(sh, cs0, t, t_prime).correlators()
                oracle = oracle_correlators(h, psi, s, t, t_prime)
                worst = max(worst, float(np.abs(shadow - oracle).max()) / np.sqrt(cs0.norm_a))
    return worst, ORACLE_TOL


def case_operator_continuous(rng):
    worst = 0.0
    hsum = _random_one_local(2, rng)
    sh = one_local_shadow_hamiltonian(hsum)
    s = one_local_set(2)
    z0 = OperatorVector.basis(s.labels, "X1")
    for t in TIMES:
        z_t = evolve_operator_continuous(sh, z0, t).z
        direct = expand_operator(heisenberg_operator(hsum.dense(), s.matrices[s.index("X1")], t), s)
        worst = max(worst, float(np.abs(z_t - direct).max()))
    return worst, ORACLE_TOL


def case_clifford_closure(rng):
    n = 3
    labels = full_pauli_labels(n)
    violations = 0
    for _ in range(100):
        gates = []
        for _ in range(12):
            name = rng.choice(["H", "S", "CNOT", "CZ"])
            if name in ("H", "S"):
                gates.append(Gate(str(name), (int(rng.integers(n)),)))
            else:
                a, b = rng.choice(n, size=2, replace=False)
                gates.append(Gate(str(name), (int(a), int(b))))
        start = labels[int(rng.integers(1, len(labels)))]
        z = evolve_operator_circuit(Circuit(n, tuple(gates)), OperatorVector.basis(labels, start)).z
        nonzero = np.flatnonzero(np.abs(z) > 1e-10)
        if nonzero.size != 1 or abs(abs(z[nonzero[0]]) - 1.0) > 1e-10:
            violations += 1
    return float(violations), 0.0


def case_light_cone(rng):
    n = 5
    labels = full_pauli_labels(n)
    violations = 0
    for trial in range(100):
        depth = 1 + trial % 4
        origin = int(rng.integers(n))
        circuit = brickwork_circuit(n, depth, rng, kind="random" if trial % 2 else "cz")
        zv = OperatorVector.basis(labels, f"{rng.choice(['X', 'Z', 'XZ'])}{origin + 1}")
        if support_radius(evolve_operator_circuit(circuit, zv), n, origin) > depth:
            violations += 1
    return float(violations), 0.0


def case_leakage(rng):
    n = 3
    g = random_coupling(n, 3, rng)
    s = jw_operator_set(n)
    quadratic = build_shadow_hamiltonian_dense(jordan_wigner(g), s).leakage
    quartic = build_shadow_hamiltonian_dense(jordan_wigner(g) + quartic_majorana_term(n, (1, 2, 3, 4), 0.5), s).leakage
    return max(quadratic, max(0.0, 0.1 - quartic)), 1e-10


def case_single_particle(rng):
    worst = 0.0
    for n, t in ((2, 1.0), (4, 2.5)):
        psi0 = rng.normal(size=n) + 1j * rng.normal(size=n)
        worst = max(worst, single_particle_crosscheck(random_number_conserving(n, rng), t, psi0)["max_error"])
    return worst, ORACLE_TOL


def case_quadratic_boson(rng):
    worst = 0.0
    net = random_network(2, rng)
    sh2 = quadratic_set_hamiltonian(boson_shadow_hamiltonian(build_B(net)))
    x0 = random_phase_point(2, rng)
    st0 = quadratic_shadow_from_classical(net, x0)
    for t in TIMES:
        expected = quadratic_shadow_from_classical(net, classical_oracle(net, x0, t)).amplitudes
        worst = max(worst, lk.norm2(evolve_shadow(sh2, st0, t).amplitudes - expected))
    return worst, ORACLE_TOL


CASES: Dict[str, Case] = {
    "fermion oracle equivalence": case_fermion_equivalence,
    "qubit 1-local oracle equivalence": case_qubit_equivalence,
    "boson classical correspondence": case_boson_correspondence,
    "shadow Hamiltonian hermiticity": case_hermiticity,
    "fermion sparsity/max-norm bounds (n=200)": case_fermion_bounds,
    "vacuum and particle-hole shadows": case_vacuum,
    "fermion subset energies": case_fermion_subset_energy,
    "subset energies with shot noise": case_subset_energy_shots,
    "Bell rotation and orthonormal-basis identity": case_bell_lemma,
    "swap-test separation": case_swap_test,
    "two-time correlators": case_correlators,
    "continuous operator evolution": case_operator_continuous,
    "Clifford closure": case_clifford_closure,
    "brickwork light cone": case_light_cone,
    "leakage soundness": case_leakage,
    "single-particle crosscheck": case_single_particle,
    "quadratic boson set": case_quadratic_boson,
}


def verify_suite(cases: Optional[Dict[str, Case]] = None, seed: Optional[int] = None) -> int:
    """Run every case, print a pass/fail grid, return 0 iff all pass (2 otherwise)"""
    cases = CASES if cases is None else cases
    seed = config.DEFAULT_SEED if seed is None else seed
    rows: List[List] = []
    failed = 0
    for k, (name, case) in enumerate(cases.items()):
        rng = np.random.default_rng([seed, k])
        started = time.perf_counter()
        try:
            error, tolerance = case(rng)
            passed = error <= tolerance
            status = "✓ pass" if passed else "✗ FAIL"
        except ShadowSimError as e:
            error, tolerance, passed = float('nan'), float('nan'), False
            status = f"✗ {type(e).__name__}"
            logger.error(json.dumps({"event": "acceptance_case_error", "case": name, "error": str(e)}))
        seconds = time.perf_counter() - started
        failed += 0 if passed else 1
        rows.append([name, status, f"{error:.3e}", f"{tolerance:.1e}", f"{seconds:.2f}"])
        logger.info(json.dumps({"event": "acceptance_case", "case": name, "passed": passed,
                                "max_error": error, "seconds": round(seconds, 3)}))

    print(tabulate(rows, headers=["case", "status", "max error", "tolerance", "seconds"], tablefmt="grid"))
    if failed:
        print(f"\n✗ {failed} of {len(rows)} acceptance cases failed")
        return 2
    print(f"\n✓ All {len(rows)} acceptance cases passed")
    return 0
