#!/usr/bin/env python3
"""
Checks for problem-file parsing and schema errors.
"""
import json
import os
import sys
import tempfile

import numpy as np
import pytest

from errors import CapacityError, SchemaError
from problem_specs import (BosonProblem, FermionProblem, RunConfig, load_problem, parse_boson, parse_fermion,
                           parse_heisenberg, parse_qubit, parse_times)


def _write(directory, name, text):
    path = os.path.join(directory, name)
    with open(path, 'w') as f:
        f.write(text)
    return path


def test_parse_times_forms():
    assert parse_times("0:1:0.5") == [0.0, 0.5, 1.0]
    assert parse_times("0.5, 1, 2") == [0.5, 1.0, 2.0]
    assert parse_times("3") == [3.0]
    for bad in ("2,1", "a,b", "0:1:0", "", "0:1"):
        with pytest.raises(SchemaError) as err:
            parse_times(bad)
        assert err.value.field == "--times"


def test_run_config_validation():
    with pytest.raises(SchemaError):
        RunConfig("fermion", "in.json", "out", tol=0.0)
    with pytest.raises(SchemaError):
        RunConfig("fermion", "in.json", "out", shots=0)


def test_fermion_problem():
    problem = parse_fermion({
        "n": 2,
        "gamma": [[1, 2, 0, 0.5], [2, 1, 0, -0.5]],
        "initial": {"product": [2]},
        "energies": {"first": [1]},
        "times": [0, 1.5],
    })
    assert isinstance(problem, FermionProblem)
    assert problem.occupied == (2,)
    assert problem.coupling.gamma[0, 1] == pytest.approx(0.5j)
    assert problem.times == [0.0, 1.5]
    assert problem.energies == {"first": [1]}


def test_fermion_schema_errors_name_the_field():
    cases = [
        ({"gamma": []}, "$.n"),
        ({"n": 2, "gamma": [[1, 5, 0, 1.0]]}, "$.gamma[0]"),
        ({"n": 2, "gamma": [[1, 2, 0]]}, "$.gamma[0]"),
        ({"n": 2, "gamma": [], "initial": "filled"}, "$.initial"),
        ({"n": 2, "gamma": [], "quartic": [[1, 1, 2, 3, 0.5]]}, "$.quartic[0]"),
        ({"n": 2, "gamma": [], "times": [1, 0]}, "$.times"),
        ({"n": 1, "gamma": [[1, 2, 1.0, 0.0]]}, "$.gamma"),
    ]
    for data, field in cases:
        with pytest.raises(SchemaError) as err:
            parse_fermion(data)
        assert err.value.field == field, (data, err.value.field)


def test_boson_problem_and_errors():
    data = {"n": 2, "masses": [1, 2], "springs": [[1, 1, 1.0], [1, 2, 0.5]],
            "initial": {"q": [0.1, 0], "p": [0, 0.2]}, "quadratic": True}
    problem = parse_boson(data)
    assert isinstance(problem, BosonProblem)
    assert problem.quadratic
    assert problem.network.n == 2
    with pytest.raises(SchemaError) as err:
        parse_boson(dict(data, masses=[1]))
    assert err.value.field == "$.masses"
    with pytest.raises(SchemaError) as err:
        parse_boson(dict(data, springs=[[1, 2, -1.0]]))
    assert err.value.field == "$.springs"
    with pytest.raises(SchemaError) as err:
        parse_boson(dict(data, initial={"q": [0.1], "p": [0, 0]}))
    assert err.value.field == "$.initial"


def test_qubit_problem_and_errors():
    problem = parse_qubit({"n": 1, "hamiltonian": [{"pauli": "Z1", "coeff": 1.0}],
                           "initial": {"statevector": [[1, 0], [0, 1]]}})
    assert problem.operator_set == "one-local"
    assert np.allclose(problem.statevector.amplitudes, np.array([1, 1j]) / np.sqrt(2))
    with pytest.raises(SchemaError) as err:
        parse_qubit({"n": 1, "hamiltonian": [{"pauli": "Q1", "coeff": 1.0}]})
    assert err.value.field == "$.hamiltonian"
    with pytest.raises(SchemaError) as err:
        parse_qubit({"n": 1, "hamiltonian": [], "set": "two-local"})
    assert err.value.field == "$.set"
    with pytest.raises(SchemaError) as err:
        parse_qubit({"n": 2, "hamiltonian": [], "initial": {"statevector": [[1, 0]]}})
    assert err.value.field == "$.initial.statevector"


def test_heisenberg_problem():
    problem = parse_heisenberg({"circuit": {"n": 2, "gates": [{"name": "CZ", "qubits": [1, 2]}]},
                                "operator": {"pauli": "Y2"}})
    assert problem.origin == 1
    assert problem.operator.z[problem.operator.labels.index("XZ2")] == pytest.approx(1j)
    with pytest.raises(SchemaError) as err:
        parse_heisenberg({"circuit": {"n": 1, "gates": [{"name": "unitary", "qubits": [1]}]},
                          "operator": {"pauli": "X1"}})
    assert err.value.field == "$.circuit.gates[0]"
    with pytest.raises(SchemaError) as err:
        parse_heisenberg({"circuit": {"n": 1, "gates": [{"name": "CCZ", "qubits": [1]}]},
                          "operator": {"pauli": "X1"}})
    assert err.value.field == "$.circuit.gates[0]"


def test_malformed_complex_entries_are_schema_errors():
    def heisenberg(first):
        return {"circuit": {"n": 1, "gates": []},
                "operator": {"coefficients": [first, [0, 0], [0, 0], [0, 0]]}}

    problem = parse_heisenberg(heisenberg([0, 2]))
    assert problem.operator.z[0] == pytest.approx(2j)
    with pytest.raises(SchemaError) as err:
        parse_heisenberg(heisenberg([1, 0, 0]))
    assert err.value.field == "$.operator.coefficients[0]"
    with pytest.raises(SchemaError) as err:
        parse_heisenberg(heisenberg(["a", 0]))
    assert err.value.field == "$.operator.coefficients[0][0]"
    with pytest.raises(SchemaError) as err:
        parse_qubit({"n": 1, "hamiltonian": [], "initial": {"statevector": [[1, 0], [0, "b"]]}})
    assert err.value.field == "$.initial.statevector[1][1]"
    with pytest.raises(SchemaError) as err:
        parse_heisenberg({"circuit": {"n": 1, "gates": [{"name": "unitary", "qubits": [1],
                                                         "matrix": [[[1, 0], [0]], [[0, 0], [1, 0]]]}]},
                          "operator": {"pauli": "X1"}})
    assert err.value.field == "$.circuit.gates[0].matrix[0][1]"


def test_heisenberg_register_size_is_capped():
    with pytest.raises(CapacityError):
        parse_heisenberg({"circuit": {"n": 12, "gates": []}, "operator": {"pauli": "X1"}})
    with pytest.raises(CapacityError):
        parse_heisenberg({"circuit": {"n": 10 ** 6, "gates": []}, "operator": {"pauli": "X1"}})


def test_load_problem_reports_json_position():
    with tempfile.TemporaryDirectory() as tmp:
        path = _write(tmp, "broken.json", '{"type": "fermion",\n "n": }')
        with pytest.raises(SchemaError) as err:
            load_problem(path)
        assert "line 2" in str(err.value)
        good = _write(tmp, "good.json", json.dumps({"type": "qubit", "n": 1, "hamiltonian": []}))
        kind, problem = load_problem(good)
        assert kind == "qubit"
        with pytest.raises(SchemaError):
            load_problem(good, scenario="boson")
        with pytest.raises(SchemaError) as err:
            load_problem(os.path.join(tmp, "missing.json"))
        assert err.value.field == "--input"


def main():
    print("=" * 60)
    print("problem_specs checks")
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
