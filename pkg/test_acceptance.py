#!/usr/bin/env python3
"""
Checks for the acceptance runner itself: passing cases give 0, failures give 2.
"""
import sys

import numpy as np

from acceptance import (CASES, case_clifford_closure, case_fermion_subset_energy, case_leakage, case_vacuum,
                        coupled_subset, verify_suite)
from errors import DegenerateStateError
from fermions import jw_operator_set, jw_product_state, random_coupling, subset_energy, vacuum_shadow
from hilbert_oracle import expectations, random_pure_state, shadow_from_state


def test_small_cases_pass():
    subset = {name: CASES[name] for name in ("vacuum and particle-hole shadows", "swap-test separation",
                                             "leakage soundness", "Clifford closure")}
    assert verify_suite(subset, seed=7) == 0


def test_cases_report_error_within_tolerance():
    for case in (case_vacuum, case_leakage):
        error, tolerance = case(np.random.default_rng(0))
        assert error <= tolerance


def test_coupled_subset_always_has_coupling():
    rng = np.random.default_rng(3)
    for _ in range(50):
        g = random_coupling(3, 3, rng)
        subset = coupled_subset(g, 4, rng)
        assert len(subset) == 4 and len(set(subset)) == 4
        inside = g.gamma.toarray()[np.ix_([j - 1 for j in subset], [j - 1 for j in subset])]
        assert np.abs(inside).max() > 0
        subset_energy(shadow_from_state(random_pure_state(8, rng), jw_operator_set(3)), g, subset)


def test_subset_energy_case_checks_every_draw():
    error, tolerance = case_fermion_subset_energy(np.random.default_rng(5))
    assert error <= tolerance


def test_clifford_closure_case_holds():
    assert case_clifford_closure(np.random.default_rng(2)) == (0.0, 0.0)


def test_vacuum_shadow_matches_oracle_for_five_modes():
    s = jw_operator_set(5)
    assert np.abs(vacuum_shadow(5).expectations() - expectations(jw_product_state(5), s)).max() <= 1e-10


def test_perturbed_case_fails():
    def perturbed(rng):
        error, tolerance = case_vacuum(rng)
        return error + 1e-3, tolerance

    assert verify_suite({"perturbed vacuum": perturbed}, seed=1) == 2


def test_raising_case_fails():
    def degenerate(rng):
        raise DegenerateStateError("no shadow")

    assert verify_suite({"degenerate": degenerate, "vacuum": case_vacuum}, seed=1) == 2


def main():
    print("=" * 60)
    print("acceptance checks")
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
