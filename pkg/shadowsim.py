#!/usr/bin/env python3
"""
Command-line front end for the shadow Hamiltonian simulator.

    python shadowsim.py run --input problem.json --output-dir out/ [--verify]
    python shadowsim.py verify

`run` writes series.csv (time, label, re, im) and report.json into the output
directory and returns the exit code of the first failure (see errors.py).
"""
import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

import config
from acceptance import verify_suite
from bosons import (boson_shadow_hamiltonian, build_B, classical_oracle, quadratic_set_hamiltonian,
                    quadratic_shadow_from_classical, shadow_from_classical, subset_energy_quadratic,
                    term_values)
from correlators import (SUPPORT_THRESHOLD, evolve_correlator, expand_operator, init_correlator,
                         operator_from_vector, operator_trajectory, oracle_correlators, support_metric,
                         support_radius)
from errors import InvarianceViolationError, NotApplicableError, ShadowSimError, VerificationError
from fermions import (fermion_shadow_hamiltonian, jordan_wigner, jw_operator_set, jw_product_state,
                      product_state_shadow, quartic_majorana_term, subset_energy)
from hilbert_oracle import basis_state, evolve_full, expectations
from problem_specs import (SCENARIOS, BosonProblem, CorrelatorProblem, FermionProblem, HeisenbergProblem,
                           QubitProblem, RunConfig, load_problem, parse_times)
from qubits import (all_zero_shadow, embed_gate, full_pauli_set, one_local_set, one_local_shadow_hamiltonian,
                    statevector_shadow)
from shadow_core import ShadowHamiltonian, ShadowState, build_shadow_hamiltonian_dense, evolve_shadow, shot_rng

logger = logging.getLogger(__name__)


def verification_threshold(tol: float) -> float:
    return max(1e-8, 10.0 * tol)


def _jsonable(value):
    """numpy scalars and arrays to plain Python; complex numbers as [re, im]"""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _refuse_leakage(sh: ShadowHamiltonian, tol: float):
    if sh.leakage > tol:
        raise InvarianceViolationError(
            f"operator set is not invariant under H (leakage {sh.leakage:.3e} > tol {tol:.1e})",
            leakage=sh.leakage)


def _amplitude_rows(rows: List[Dict], t: float, st: ShadowState):
    """Phase-restored amplitudes expectations / sqrt(A)"""
    values = st.expectations() / np.sqrt(st.norm_a)
    labels = st.labels or [str(m + 1) for m in range(st.size)]
    for label, value in zip(labels, values):
        rows.append({"time": t, "label": label, "re": float(value.real), "im": float(value.imag)})


def _energy_row(rows: List[Dict], t: float, name: str, value: float):
    rows.append({"time": t, "label": f"energy:{name}", "re": float(value), "im": 0.0})


def _oracle_error(st: ShadowState, oracle_values: np.ndarray) -> float:
    return float(np.abs(st.expectations() - oracle_values).max() / np.sqrt(st.norm_a))


def _record_verification(report: Dict, errors: Sequence[Dict], tol: float):
    threshold = verification_threshold(tol)
    worst = max((e["max_error"] for e in errors), default=0.0)
    report["verification"] = {"threshold": threshold, "max_error": worst, "per_point": list(errors)}
    if worst > threshold:
        raise VerificationError(f"oracle max-error {worst:.3e} exceeds {threshold:.1e}")


def _fermion_hamiltonian(problem: FermionProblem, tol: float):
    """Index-level H_S, or the dense pathway with a leakage check when quartic terms are present"""
    if not problem.quartic:
        return fermion_shadow_hamiltonian(problem.coupling)
    h = jordan_wigner(problem.coupling)
    for indices, coeff in problem.quartic:
        h = h + quartic_majorana_term(problem.n, indices, coeff)
    sh = build_shadow_hamiltonian_dense(h, jw_operator_set(problem.n), tol=tol)
    _refuse_leakage(sh, tol)
    return sh


def _fermion_total(st: ShadowState, problem: FermionProblem) -> float:
    g = problem.coupling
    if g.gamma.nnz == 0:
        return g.offset
    return subset_energy(st, g, range(1, 2 * g.n + 1)) + g.offset


def run_fermion(problem: FermionProblem, cfg: RunConfig, report: Dict, rows: List[Dict]):
    sh = _fermion_hamiltonian(problem, cfg.tol)
    report["shadow_hamiltonian"] = sh.report()
    st0 = product_state_shadow(problem.n, problem.occupied)
    report["normA"] = st0.norm_a
    report["offset"] = problem.coupling.offset
    rng = shot_rng(cfg.seed)

    if cfg.verify:
        s = jw_operator_set(problem.n)
        h = jordan_wigner(problem.coupling)
        psi0 = jw_product_state(problem.n, problem.occupied)
    errors = []
    for t in cfg.times:
        st = evolve_shadow(sh, st0, t, tol=cfg.tol)
        _amplitude_rows(rows, t, st)
        for name, subset in problem.energies.items():
            _energy_row(rows, t, name, subset_energy(st, problem.coupling, subset, shots=cfg.shots, rng=rng))
        _energy_row(rows, t, "total", _fermion_total(st, problem))
        if cfg.verify:
            errors.append({"time": t, "max_error": _oracle_error(st, expectations(evolve_full(h, psi0, t), s))})
    if cfg.verify:
        _record_verification(report, errors, cfg.tol)


def run_boson(problem: BosonProblem, cfg: RunConfig, report: Dict, rows: List[Dict]):
    net, x0 = problem.network, problem.initial
    fc = build_B(net)
    sh = boson_shadow_hamiltonian(fc)
    if problem.quadratic:
        sh = quadratic_set_hamiltonian(sh, cap=config.MAX_SHADOW_DIM)
        st0 = quadratic_shadow_from_classical(net, x0)
    else:
        st0 = shadow_from_classical(net, x0)
    report["shadow_hamiltonian"] = sh.report()
    report["normA"] = st0.norm_a
    report["term_labels"] = list(fc.labels)
    rng = shot_rng(cfg.seed)

    errors = []
    for t in cfg.times:
        st = evolve_shadow(sh, st0, t, tol=cfg.tol)
        _amplitude_rows(rows, t, st)
        if problem.quadratic:
            for name, subset in problem.energies.items():
                _energy_row(rows, t, name, subset_energy_quadratic(st, subset, shots=cfg.shots, rng=rng))
            _energy_row(rows, t, "total", subset_energy_quadratic(st, range(1, fc.size + 1)))
        else:
            values = st.expectations().real
            for name, subset in problem.energies.items():
                _energy_row(rows, t, name, 0.5 * sum(values[m - 1] ** 2 for m in subset))
            _energy_row(rows, t, "total", 0.5 * st.norm_a)
        if cfg.verify:
            x_t = classical_oracle(net, x0, t)
            if problem.quadratic:
                oracle = quadratic_shadow_from_classical(net, x_t).expectations()
            else:
                oracle = term_values(net, x_t, fc)
            errors.append({"time": t, "max_error": _oracle_error(st, oracle)})
    if cfg.verify:
        _record_verification(report, errors, cfg.tol)


def _initial_state(problem: QubitProblem):
    if problem.statevector is None:
        return basis_state(2 ** problem.n)
    return problem.statevector


def _qubit_setup(problem: QubitProblem, tol: float):
    """(H_S, initial shadow, dense operator set) for the requested qubit operator set"""
    n = problem.n
    if problem.operator_set == "full-pauli":
        s = full_pauli_set(n)
        sh = build_shadow_hamiltonian_dense(problem.hamiltonian.dense(), s, tol=tol)
        _refuse_leakage(sh, tol)
        psi = _initial_state(problem)
        return sh, statevector_shadow(psi, s), s

    try:
        sh = one_local_shadow_hamiltonian(problem.hamiltonian)
        s = None
    except NotApplicableError:
        # interacting terms: let the dense pathway measure how far S is from invariant
        s = one_local_set(n)
        sh = build_shadow_hamiltonian_dense(problem.hamiltonian.dense(), s, tol=tol)
        _refuse_leakage(sh, tol)
    if problem.statevector is None:
        return sh, all_zero_shadow(n), s
    if s is None:
        s = one_local_set(n)
    return sh, statevector_shadow(problem.statevector, s), s


def run_qubit(problem: QubitProblem, cfg: RunConfig, report: Dict, rows: List[Dict]):
    sh, st0, s = _qubit_setup(problem, cfg.tol)
    report["shadow_hamiltonian"] = sh.report()
    report["normA"] = st0.norm_a
    report["operator_set"] = problem.operator_set

    if cfg.verify:
        if s is None:
            s = one_local_set(problem.n)
        h = problem.hamiltonian.dense()
        psi0 = _initial_state(problem)
    errors = []
    for t in cfg.times:
        st = evolve_shadow(sh, st0, t, tol=cfg.tol)
        _amplitude_rows(rows, t, st)
        if cfg.verify:
            errors.append({"time": t, "max_error": _oracle_error(st, expectations(evolve_full(h, psi0, t), s))})
    if cfg.verify:
        _record_verification(report, errors, cfg.tol)


def run_correlator(problem: CorrelatorProblem, cfg: RunConfig, report: Dict, rows: List[Dict]):
    system = problem.system
    if isinstance(system, FermionProblem):
        sh = _fermion_hamiltonian(system, cfg.tol)
        s = jw_operator_set(system.n)
        h = jordan_wigner(system.coupling)
        psi = jw_product_state(system.n, system.occupied)
    else:
        sh, _, _ = _qubit_setup(system, cfg.tol)
        s = full_pauli_set(system.n) if system.operator_set == "full-pauli" else one_local_set(system.n)
        h = system.hamiltonian.dense()
        psi = _initial_state(system)
    report["shadow_hamiltonian"] = sh.report()
    cs0 = init_correlator(psi, s)
    report["normA"] = cs0.norm_a

    errors = []
    for t, t_prime in problem.t_pairs:
        values = evolve_correlator(sh, cs0, t, t_prime, tol=cfg.tol).correlators()
        scaled = values / np.sqrt(cs0.norm_a)
        for a, label_a in enumerate(s.labels):
            for b, label_b in enumerate(s.labels):
                value = scaled[a, b]
                rows.append({"time": t, "label": f"{label_a}|{label_b}@{t_prime}",
                             "re": float(value.real), "im": float(value.imag)})
        if cfg.verify:
            oracle = oracle_correlators(h, psi, s, t, t_prime)
            error = float(np.abs(values - oracle).max() / np.sqrt(cs0.norm_a))
            errors.append({"time": t, "t_prime": t_prime, "max_error": error})
    if cfg.verify:
        _record_verification(report, errors, cfg.tol)


def run_heisenberg(problem: HeisenbergProblem, cfg: RunConfig, report: Dict, rows: List[Dict]):
    """Series over layers l = number of trailing gates conjugated; only entries above the support threshold"""
    circuit, n = problem.circuit, problem.circuit.n
    trajectory = operator_trajectory(circuit, problem.operator)
    layers = []
    for layer, zv in enumerate(trajectory):
        for label, value in zip(zv.labels, zv.z):
            if abs(value) > SUPPORT_THRESHOLD:
                rows.append({"time": layer, "label": label, "re": float(value.real), "im": float(value.imag)})
        metric = support_metric(zv, n)
        layers.append({
            "layer": layer,
            "histogram": metric["histogram"],
            "support": [q + 1 for q in metric["support"]],
            "radius": support_radius(zv, n, problem.origin),
        })
    report["origin"] = problem.origin + 1
    report["gates"] = len(circuit.gates)
    report["support"] = layers

    if cfg.verify:
        s = full_pauli_set(n)
        op = operator_from_vector(problem.operator, s)
        errors = [{"time": 0, "max_error": 0.0}]
        for layer, gate in enumerate(reversed(circuit.gates), start=1):
            u = embed_gate(gate.unitary(), gate.qubits, n)
            op = u.conj().T @ op @ u
            error = float(np.abs(expand_operator(op, s) - trajectory[layer].z).max())
            errors.append({"time": layer, "max_error": error})
        _record_verification(report, errors, cfg.tol)


RUNNERS = {
    "fermion": run_fermion,
    "boson": run_boson,
    "qubit": run_qubit,
    "correlator": run_correlator,
    "heisenberg": run_heisenberg,
}


def _write_outputs(output_dir: str, report: Dict, rows: List[Dict]):
    os.makedirs(output_dir, exist_ok=True)
    frame = pd.DataFrame(rows, columns=["time", "label", "re", "im"])
    frame.to_csv(os.path.join(output_dir, "series.csv"), index=False)
    with open(os.path.join(output_dir, "report.json"), 'w') as f:
        json.dump(_jsonable(report), f, indent=2, sort_keys=True)
        f.write("\n")


def run(cfg: RunConfig) -> int:
    """Load, simulate, optionally verify and write artifacts; returns the exit code"""
    report: Dict = {"status": "ok", "exit_code": 0, "tol": cfg.tol, "seed": cfg.seed, "shots": cfg.shots}
    rows: List[Dict] = []
    try:
        kind, problem = load_problem(cfg.input_path, cfg.scenario)
        report["scenario"] = kind
        if cfg.times is None:
            cfg = replace(cfg, times=list(getattr(problem, "times", [0.0])))
        if not isinstance(problem, (CorrelatorProblem, HeisenbergProblem)):
            report["times"] = cfg.times
        RUNNERS[kind](problem, cfg, report, rows)
    except ShadowSimError as e:
        report["status"] = type(e).__name__
        report["error"] = str(e)
        report["exit_code"] = e.exit_code
        if getattr(e, "leakage", None) is not None:
            report["leakage"] = e.leakage
        logger.error(json.dumps({"event": "run_failed", "error": type(e).__name__, "exit_code": e.exit_code}))
        print(f"❌ {type(e).__name__}: {e}")
    else:
        print(f"✅ {report['scenario']} run complete ({len(rows)} series rows)")
    if "verification" in report:
        marker = "✅" if report["exit_code"] != 2 else "❌"
        print(f"{marker} oracle max-error {report['verification']['max_error']:.3e}")
    if report.get("shadow_hamiltonian", {}).get("leakage", 0.0) > cfg.tol:
        print(f"⚠️  leakage {report['shadow_hamiltonian']['leakage']:.3e} above tol")

    try:
        _write_outputs(cfg.output_dir, report, rows)
    except OSError as e:
        print(f"❌ Could not write outputs to {cfg.output_dir}: {e}")
        return 1
    logger.info(json.dumps({"event": "run_finished", "exit_code": report["exit_code"], "rows": len(rows)}))
    return report["exit_code"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Shadow Hamiltonian simulation with brute-force oracle checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="Simulate one problem file and write series.csv + report.json.")
    run_parser.add_argument("--input", required=True, help="Problem JSON file.")
    run_parser.add_argument("--output-dir", required=True, help="Directory for series.csv and report.json.")
    run_parser.add_argument("--scenario", choices=SCENARIOS,
                            help="Scenario; defaults to the file's \"type\" field.")
    run_parser.add_argument("--times", help="'start:stop:step' (inclusive) or 't1,t2,...'; overrides the file.")
    run_parser.add_argument("--tol", type=float, default=config.DEFAULT_TOL, help="Numerical tolerance.")
    run_parser.add_argument("--seed", type=int, default=config.DEFAULT_SEED, help="Seed for shot-noise sampling.")
    run_parser.add_argument("--verify", action="store_true", help="Compare against the full Hilbert-space oracle.")
    run_parser.add_argument("--shots", type=int, help="Estimate subset-energy overlaps from this many shots.")

    verify_parser = sub.add_parser("verify", help="Run the bundled acceptance matrix.")
    verify_parser.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=config.LOG_LEVEL)
    if args.command == "verify":
        return verify_suite(seed=args.seed)
    try:
        times = parse_times(args.times) if args.times else None
        cfg = RunConfig(args.scenario, args.input, args.output_dir, times, args.tol, args.seed,
                        args.verify, args.shots)
    except ShadowSimError as e:
        print(f"❌ {e}")
        return e.exit_code
    return run(cfg)


if __name__ == '__main__':
    sys.exit(main())
