"""
Problem-file schemas for the command-line runner.

Each scenario JSON is parsed into a small dataclass holding library objects. Physics
indices in files are 1-based; everything returned here is ready for the library.
Schema problems raise SchemaError carrying the offending field path.
"""
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

import config
from bosons import ClassicalPhasePoint, OscillatorNetwork
from correlators import Circuit, Gate, OperatorVector, full_pauli_labels
from errors import SchemaError, ShadowSimError
from fermions import MajoranaCoupling
from hilbert_oracle import PureState
from qubits import PauliTermSum, parse_pauli

SCENARIOS = ("fermion", "boson", "qubit", "correlator", "heisenberg")
QUBIT_SETS = ("one-local", "full-pauli")


@dataclass
class RunConfig:
    scenario: Optional[str]
    input_path: str
    output_dir: str
    times: Optional[List[float]] = None
    tol: float = config.DEFAULT_TOL
    seed: int = config.DEFAULT_SEED
    verify: bool = False
    shots: Optional[int] = None

    def __post_init__(self):
        if self.tol <= 0:
            raise SchemaError("tolerance must be positive", "--tol")
        if self.shots is not None and self.shots < 1:
            raise SchemaError("shots must be at least 1", "--shots")
        if self.times is not None:
            check_times(self.times, "--times")


@dataclass
class FermionProblem:
    n: int
    coupling: MajoranaCoupling
    occupied: Tuple[int, ...] = ()
    quartic: List[Tuple[Tuple[int, int, int, int], float]] = field(default_factory=list)
    energies: Dict[str, List[int]] = field(default_factory=dict)
    times: List[float] = field(default_factory=lambda: [0.0])


@dataclass
class BosonProblem:
    network: OscillatorNetwork
    initial: ClassicalPhasePoint
    quadratic: bool = False
    energies: Dict[str, List[int]] = field(default_factory=dict)
    times: List[float] = field(default_factory=lambda: [0.0])


@dataclass
class QubitProblem:
    n: int
    hamiltonian: PauliTermSum
    operator_set: str = "one-local"
    statevector: Optional[PureState] = None
    times: List[float] = field(default_factory=lambda: [0.0])


@dataclass
class CorrelatorProblem:
    system: Union[FermionProblem, QubitProblem]
    t_pairs: List[Tuple[float, float]]


@dataclass
class HeisenbergProblem:
    circuit: Circuit
    operator: OperatorVector
    origin: int


Problem = Union[FermionProblem, BosonProblem, QubitProblem, CorrelatorProblem, HeisenbergProblem]


def check_times(times: Sequence[float], path: str) -> List[float]:
    out = [float(t) for t in times]
    if not out:
        raise SchemaError("at least one time is required", path)
    if not all(np.isfinite(out)):
        raise SchemaError("times must be finite", path)
    if any(b < a for a, b in zip(out, out[1:])):
        raise SchemaError("times must be sorted ascending", path)
    return out


def parse_times(text: str) -> List[float]:
    """'start:stop:step' (stop inclusive) or a comma-separated list"""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(part) for part in text.split(":"))
            if step <= 0:
                raise SchemaError("time step must be positive", "--times")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return check_times([start + k * step for k in range(max(count, 0))], "--times")
        return check_times([float(part) for part in text.replace(" ", "").split(",") if part], "--times")
    except ValueError as e:
        if isinstance(e, ShadowSimError):
            raise
        raise SchemaError(f"cannot parse {text!r} as times", "--times")


def _get(obj: Dict, key: str, path: str, default: Any = ...) -> Any:
    if not isinstance(obj, dict):
        raise SchemaError("expected an object", path)
    if key not in obj:
        if default is ...:
            raise SchemaError("missing required field", f"{path}.{key}")
        return default
    return obj[key]


def _int(value: Any, path: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"expected an integer, got {value!r}", path)
    if value < minimum:
        raise SchemaError(f"must be at least {minimum}", path)
    return value


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"expected a number, got {value!r}", path)
    return float(value)


def _list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise SchemaError("expected a list", path)
    return value


def _complex(value: Any, path: str) -> complex:
    """[re, im] pair"""
    item = _list(value, path)
    if len(item) != 2:
        raise SchemaError(f"expected [re, im], got {len(item)} entries", path)
    return complex(_number(item[0], f"{path}[0]"), _number(item[1], f"{path}[1]"))


def _index_list(value: Any, path: str, upper: int) -> List[int]:
    out = []
    for k, item in enumerate(_list(value, path)):
        index = _int(item, f"{path}[{k}]")
        if index > upper:
            raise SchemaError(f"index {index} out of range 1..{upper}", f"{path}[{k}]")
        out.append(index)
    return out


def _energies(data: Dict, path: str, upper: int) -> Dict[str, List[int]]:
    raw = _get(data, "energies", path, {})
    if not isinstance(raw, dict):
        raise SchemaError("expected an object of name -> index list", f"{path}.energies")
    return {str(name): _index_list(indices, f"{path}.energies.{name}", upper) for name, indices in raw.items()}


def _wrap_library(path: str, build):
    """Re-raise library validation errors as schema errors at the given field"""
    try:
        return build()
    except SchemaError:
        raise
    except ShadowSimError as e:
        raise SchemaError(str(e), path) from e


def parse_fermion(data: Dict, path: str = "$") -> FermionProblem:
    n = _int(_get(data, "n", path), f"{path}.n")
    entries = []
    for k, entry in enumerate(_list(_get(data, "gamma", path), f"{path}.gamma")):
        item = _list(entry, f"{path}.gamma[{k}]")
        if len(item) != 4:
            raise SchemaError("gamma entries are [j, k, re, im]", f"{path}.gamma[{k}]")
        j, l = (_int(item[0], f"{path}.gamma[{k}][0]"), _int(item[1], f"{path}.gamma[{k}][1]"))
        if max(j, l) > 2 * n:
            raise SchemaError(f"Majorana index out of range 1..{2 * n}", f"{path}.gamma[{k}]")
        entries.append((j, l, _number(item[2], f"{path}.gamma[{k}][2]"), _number(item[3], f"{path}.gamma[{k}][3]")))
    coupling = _wrap_library(f"{path}.gamma", lambda: MajoranaCoupling.from_triplets(n, entries))

    initial = _get(data, "initial", path, "vacuum")
    occupied: Tuple[int, ...] = ()
    if isinstance(initial, dict) and "product" in initial:
        occupied = tuple(_index_list(initial["product"], f"{path}.initial.product", n))
    elif not (initial == "vacuum" or (isinstance(initial, dict) and "vacuum" in initial)):
        raise SchemaError("expected \"vacuum\" or {\"product\": [modes]}", f"{path}.initial")

    quartic = []
    for k, entry in enumerate(_list(_get(data, "quartic", path, []), f"{path}.quartic")):
        item = _list(entry, f"{path}.quartic[{k}]")
        if len(item) != 5:
            raise SchemaError("quartic entries are [j, k, l, m, coeff]", f"{path}.quartic[{k}]")
        indices = tuple(_index_list(item[:4], f"{path}.quartic[{k}]", 2 * n))
        if len(set(indices)) != 4:
            raise SchemaError("quartic indices must be distinct", f"{path}.quartic[{k}]")
        quartic.append((indices, _number(item[4], f"{path}.quartic[{k}][4]")))

    times = check_times(_list(_get(data, "times", path, [0.0]), f"{path}.times"), f"{path}.times")
    return FermionProblem(n, coupling, occupied, quartic, _energies(data, path, 2 * n), times)


def parse_boson(data: Dict, path: str = "$") -> BosonProblem:
    n = _int(_get(data, "n", path), f"{path}.n")
    masses = [_number(m, f"{path}.masses[{k}]") for k, m in enumerate(_list(_get(data, "masses", path), f"{path}.masses"))]
    if len(masses) != n:
        raise SchemaError(f"expected {n} masses, got {len(masses)}", f"{path}.masses")
    springs = []
    for k, entry in enumerate(_list(_get(data, "springs", path, []), f"{path}.springs")):
        item = _list(entry, f"{path}.springs[{k}]")
        if len(item) != 3:
            raise SchemaError("spring entries are [j, k, kappa]", f"{path}.springs[{k}]")
        springs.append(tuple(_index_list(item[:2], f"{path}.springs[{k}]", n)) + (_number(item[2], f"{path}.springs[{k}][2]"),))
    network = _wrap_library(f"{path}.springs", lambda: OscillatorNetwork.from_triplets(masses, springs))

    initial = _get(data, "initial", path)
    q = [_number(v, f"{path}.initial.q[{k}]") for k, v in enumerate(_list(_get(initial, "q", f"{path}.initial"), f"{path}.initial.q"))]
    p = [_number(v, f"{path}.initial.p[{k}]") for k, v in enumerate(_list(_get(initial, "p", f"{path}.initial"), f"{path}.initial.p"))]
    if len(q) != n or len(p) != n:
        raise SchemaError(f"q and p need {n} entries each", f"{path}.initial")
    quadratic = _get(data, "quadratic", path, False)
    if not isinstance(quadratic, bool):
        raise SchemaError("expected true or false", f"{path}.quadratic")
    times = check_times(_list(_get(data, "times", path, [0.0]), f"{path}.times"), f"{path}.times")
    term_count = n + sum(1 for *_, kappa in springs if kappa > 0)
    return BosonProblem(network, ClassicalPhasePoint(q, p), quadratic, _energies(data, path, term_count), times)


def _statevector(raw: Any, n: int, path: str) -> PureState:
    amps = []
    for k, pair in enumerate(_list(raw, path)):
        amps.append(_complex(pair, f"{path}[{k}]"))
    if len(amps) != 2 ** n:
        raise SchemaError(f"expected {2 ** n} amplitudes, got {len(amps)}", path)
    return _wrap_library(path, lambda: PureState.from_vector(amps, n))


def parse_qubit(data: Dict, path: str = "$") -> QubitProblem:
    n = _int(_get(data, "n", path), f"{path}.n")
    terms = []
    for k, term in enumerate(_list(_get(data, "hamiltonian", path), f"{path}.hamiltonian")):
        label = _get(term, "pauli", f"{path}.hamiltonian[{k}]")
        if not isinstance(label, str):
            raise SchemaError("expected a Pauli label string", f"{path}.hamiltonian[{k}].pauli")
        terms.append((label, _number(_get(term, "coeff", f"{path}.hamiltonian[{k}]"), f"{path}.hamiltonian[{k}].coeff")))
    hamiltonian = _wrap_library(f"{path}.hamiltonian", lambda: PauliTermSum.from_terms(n, terms))

    operator_set = _get(data, "set", path, "one-local")
    if operator_set not in QUBIT_SETS:
        raise SchemaError(f"expected one of {', '.join(QUBIT_SETS)}", f"{path}.set")

    initial = _get(data, "initial", path, "all-zero")
    statevector = None
    if isinstance(initial, dict) and "statevector" in initial:
        statevector = _statevector(initial["statevector"], n, f"{path}.initial.statevector")
    elif initial not in ("all-zero", {"all-zero": True}):
        raise SchemaError("expected \"all-zero\" or {\"statevector\": [[re, im], ...]}", f"{path}.initial")
    times = check_times(_list(_get(data, "times", path, [0.0]), f"{path}.times"), f"{path}.times")
    return QubitProblem(n, hamiltonian, operator_set, statevector, times)


def parse_correlator(data: Dict, path: str = "$") -> CorrelatorProblem:
    system = _get(data, "system", path)
    kind = _get(system, "type", f"{path}.system")
    if kind == "fermion":
        parsed = parse_fermion(system, f"{path}.system")
    elif kind == "qubit":
        parsed = parse_qubit(system, f"{path}.system")
    else:
        raise SchemaError("correlator systems are \"fermion\" or \"qubit\"", f"{path}.system.type")
    pairs = []
    for k, pair in enumerate(_list(_get(data, "t_pairs", path), f"{path}.t_pairs")):
        item = _list(pair, f"{path}.t_pairs[{k}]")
        if len(item) != 2:
            raise SchemaError("time pairs are [t, t']", f"{path}.t_pairs[{k}]")
        pairs.append((_number(item[0], f"{path}.t_pairs[{k}][0]"), _number(item[1], f"{path}.t_pairs[{k}][1]")))
    if not pairs:
        raise SchemaError("at least one time pair is required", f"{path}.t_pairs")
    return CorrelatorProblem(parsed, pairs)


def _complex_matrix(raw: Any, path: str) -> np.ndarray:
    rows = []
    for r, row in enumerate(_list(raw, path)):
        entries = []
        for c, pair in enumerate(_list(row, f"{path}[{r}]")):
            entries.append(_complex(pair, f"{path}[{r}][{c}]"))
        rows.append(entries)
    try:
        return np.array(rows, dtype=np.complex128)
    except ValueError:
        raise SchemaError("matrix rows must have equal length", path)


def parse_heisenberg(data: Dict, path: str = "$") -> HeisenbergProblem:
    circuit_data = _get(data, "circuit", path)
    n = _int(_get(circuit_data, "n", f"{path}.circuit"), f"{path}.circuit.n")
    # operator vectors span all 4^n Pauli strings; CapacityError before any gate is parsed
    labels = full_pauli_labels(n)
    gates = []
    for k, raw in enumerate(_list(_get(circuit_data, "gates", f"{path}.circuit"), f"{path}.circuit.gates")):
        gpath = f"{path}.circuit.gates[{k}]"
        name = _get(raw, "name", gpath)
        qubits = tuple(q - 1 for q in _index_list(_get(raw, "qubits", gpath), f"{gpath}.qubits", n))
        matrix = _complex_matrix(raw["matrix"], f"{gpath}.matrix") if "matrix" in raw else None
        if name == "unitary" and matrix is None:
            raise SchemaError("unitary gates need a matrix", gpath)
        gate = Gate(str(name), qubits, matrix)
        _wrap_library(gpath, gate.unitary)
        gates.append(gate)
    circuit = _wrap_library(f"{path}.circuit", lambda: Circuit(n, tuple(gates)))

    spec = _get(data, "operator", path)
    if isinstance(spec, dict) and "pauli" in spec:
        label = spec["pauli"]
        pauli = _wrap_library(f"{path}.operator.pauli", lambda: parse_pauli(str(label), n))
        operator = _wrap_library(f"{path}.operator", lambda: OperatorVector.basis(labels, pauli.label))
        # Y-type labels carry a phase relative to the unphased basis
        operator = OperatorVector(operator.z * complex(pauli.phase), labels)
    elif isinstance(spec, dict) and "coefficients" in spec:
        raw = _list(spec["coefficients"], f"{path}.operator.coefficients")
        if len(raw) != len(labels):
            raise SchemaError(f"expected {len(labels)} coefficients", f"{path}.operator.coefficients")
        z = [_complex(c, f"{path}.operator.coefficients[{k}]") for k, c in enumerate(raw)]
        operator = _wrap_library(f"{path}.operator", lambda: OperatorVector(np.array(z), labels))
    else:
        raise SchemaError("expected {\"pauli\": label} or {\"coefficients\": [[re, im], ...]}", f"{path}.operator")
    support = [q for m in np.flatnonzero(operator.z) for q in parse_pauli(labels[m], n).support]
    origin = min(support) if support else 0
    return HeisenbergProblem(circuit, operator, origin)


PARSERS = {
    "fermion": parse_fermion,
    "boson": parse_boson,
    "qubit": parse_qubit,
    "correlator": parse_correlator,
    "heisenberg": parse_heisenberg,
}


def load_problem(path: str, scenario: Optional[str] = None) -> Tuple[str, Problem]:
    """Read and validate a problem file; the scenario comes from --scenario or the file's "type" field"""
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except FileNotFoundError:
        raise SchemaError(f"file not found: {path}", "--input")
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}", "$")
    if not isinstance(data, dict):
        raise SchemaError("problem file must hold a JSON object", "$")
    kind = scenario or data.get("type")
    if kind not in SCENARIOS:
        raise SchemaError(f"unknown scenario {kind!r}; expected one of {', '.join(SCENARIOS)}", "$.type")
    if scenario and data.get("type") not in (None, scenario):
        raise SchemaError(f"file declares type {data.get('type')!r} but scenario {scenario!r} was requested",
                          "$.type")
    return kind, PARSERS[kind](data)
