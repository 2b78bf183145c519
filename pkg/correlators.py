"""
Multi-time correlators and Heisenberg-picture operator evolution.

Correlator shadows hold <O_m(t) O_m'(t')> over the product set and evolve each
register with its own exp(-i H_S t). Operators Z = sum z_m O_m evolve under
conj(H_S) in continuous time, and through transposed gate transfer matrices
(last gate first) for circuits.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
import linalg_kernel as lk
from errors import (ConfigurationError, DegenerateStateError, InvarianceViolationError, NonHermitianError,
                    ShapeError)
from hilbert_oracle import State, PureState, density_from_pure, heisenberg_operator
from qubits import embed_gate, full_pauli_set, full_pauli_strings, parse_pauli, pauli_bits
from shadow_core import DEGENERATE_FLOOR, OperatorSet, ShadowHamiltonian

logger = logging.getLogger(__name__)

GATES = {
    "H": np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Z": np.diag([1, -1]).astype(np.complex128),
    "S": np.diag([1, 1j]),
    "T": np.diag([1, np.exp(0.25j * np.pi)]),
    "CZ": np.diag([1, 1, 1, -1]).astype(np.complex128),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128),
}

SUPPORT_THRESHOLD = 1e-12


@dataclass(frozen=True, eq=False)
class CorrelatorState:
    """
    q-register shadow: amplitudes flattened row-major over dims, A kept apart.
    Two registers give <O_m(t) O_m'(t')>.
    """
    amplitudes: np.ndarray
    norm_a: float
    dims: Tuple[int, ...]
    times: Tuple[float, ...]

    def __post_init__(self):
        amps = lk.check_finite(np.asarray(self.amplitudes, dtype=np.complex128).ravel(), "amplitudes")
        dims = tuple(int(d) for d in self.dims)
        if int(np.prod(dims)) != amps.size:
            raise ShapeError(f"register dims {dims} do not match {amps.size} amplitudes")
        if len(self.times) != len(dims):
            raise ShapeError("one time per register is required")
        if abs(np.linalg.norm(amps) - 1.0) > 1e-8:
            raise ShapeError("correlator amplitudes must have unit norm")
        if not self.norm_a > 0:
            raise DegenerateStateError("normalization constant A must be positive")
        object.__setattr__(self, 'amplitudes', amps)
        object.__setattr__(self, 'dims', dims)
        object.__setattr__(self, 'times', tuple(float(t) for t in self.times))

    def correlators(self) -> np.ndarray:
        """sqrt(A) * amplitudes reshaped to one axis per register"""
        return np.sqrt(self.norm_a) * self.amplitudes.reshape(self.dims)


def _density(state: State) -> np.ndarray:
    return density_from_pure(state).matrix if isinstance(state, PureState) else state.matrix


def _product_expectations(rho: np.ndarray, mats: Sequence[np.ndarray]) -> np.ndarray:
    """tr(rho A1_m1 A2_m2 ...) over every index combination"""
    chain = np.asarray(mats[0])
    for nxt in mats[1:]:
        chain = np.einsum('...ab,nbc->...nac', chain, np.asarray(nxt))
    return np.einsum('da,...ad->...', rho, chain)


def _wrap(values: np.ndarray, times: Sequence[float]) -> CorrelatorState:
    flat = values.ravel()
    norm_a = float(np.vdot(flat, flat).real)
    if norm_a <= DEGENERATE_FLOOR:
        raise DegenerateStateError("all correlators vanish; the correlator shadow is undefined")
    return CorrelatorState(flat / np.sqrt(norm_a), norm_a, values.shape, tuple(times))


def init_multitime(state: State, sets: Sequence[OperatorSet]) -> CorrelatorState:
    for s in sets:
        if s.matrices is None:
            raise ConfigurationError("correlator initialization needs dense operator sets")
    return _wrap(_product_expectations(_density(state), [s.matrices for s in sets]), [0.0] * len(sets))


def init_correlator(state: State, s: OperatorSet) -> CorrelatorState:
    """<O_m O_m'> at (t, t') = (0, 0)"""
    return init_multitime(state, [s, s])


def _check_generator(sh: ShadowHamiltonian, tol: float):
    if sh.hermitian_defect > lk.hermitian_threshold(sh.hs, tol):
        raise NonHermitianError(f"H_S is not Hermitian (defect {sh.hermitian_defect:.3e})",
                                defect=sh.hermitian_defect)


def evolve_multitime(hams: Sequence[ShadowHamiltonian], cs: CorrelatorState, times: Sequence[float],
                     tol: Optional[float] = None) -> CorrelatorState:
    """Register r is advanced by exp(-i H_r dt_r); times are absolute targets"""
    tol = config.DEFAULT_TOL if tol is None else tol
    if len(hams) != len(cs.dims) or len(times) != len(cs.dims):
        raise ShapeError(f"need {len(cs.dims)} Hamiltonians and times, got {len(hams)} and {len(times)}")
    tensor = cs.amplitudes.reshape(cs.dims)
    for axis, (sh, target) in enumerate(zip(hams, times)):
        if sh.dim != cs.dims[axis]:
            raise ShapeError(f"register {axis + 1} has dimension {cs.dims[axis]}, H_S has {sh.dim}")
        _check_generator(sh, tol)
        moved = np.moveaxis(tensor, axis, 0)
        shape = moved.shape
        block = lk.expm_action_columns(sh.hs, moved.reshape(shape[0], -1), target - cs.times[axis], tol=tol)
        tensor = np.moveaxis(block.reshape(shape), 0, axis)
    return CorrelatorState(tensor.ravel(), cs.norm_a, cs.dims, tuple(times))


def evolve_correlator(sh: ShadowHamiltonian, cs: CorrelatorState, t: float, t_prime: float,
                      tol: Optional[float] = None) -> CorrelatorState:
    """(exp(-i H_S t) (x) exp(-i H_S t')) vec(C) = U C U'^T"""
    if len(cs.dims) != 2:
        raise ShapeError("evolve_correlator needs a two-register state")
    return evolve_multitime([sh, sh], cs, [t, t_prime], tol=tol)


def oracle_multitime(hamiltonians: Sequence[np.ndarray], state: State, sets: Sequence[OperatorSet],
                     times: Sequence[float]) -> np.ndarray:
    """tr(rho O^1(t_1) O^2(t_2) ...) with O^r(t_r) = U_r^dagger O^r U_r"""
    mats = []
    for h, s, t in zip(hamiltonians, sets, times):
        mats.append(np.array([heisenberg_operator(h, o, t) for o in s.matrices]))
    return _product_expectations(_density(state), mats)


def oracle_correlators(h: np.ndarray, state: State, s: OperatorSet, t: float, t_prime: float) -> np.ndarray:
    return oracle_multitime([h, h], state, [s, s], [t, t_prime])


@dataclass(frozen=True, eq=False)
class OperatorVector:
    z: np.ndarray
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        z = lk.check_finite(np.asarray(self.z, dtype=np.complex128).ravel(), "operator vector")
        if not np.any(z):
            raise DegenerateStateError("operator vector is identically zero")
        if self.labels and len(self.labels) != z.size:
            raise ShapeError(f"{len(self.labels)} labels for {z.size} coefficients")
        object.__setattr__(self, 'z', z)
        object.__setattr__(self, 'labels', tuple(self.labels))

    @classmethod
    def basis(cls, labels: Sequence[str], label: str) -> 'OperatorVector':
        labels = tuple(labels)
        if label not in labels:
            raise ShapeError(f"unknown operator label {label!r}")
        z = np.zeros(len(labels), dtype=np.complex128)
        z[labels.index(label)] = 1.0
        return cls(z, labels)


def evolve_operator_continuous(sh: ShadowHamiltonian, zv: OperatorVector, t: float,
                               tol: Optional[float] = None) -> OperatorVector:
    """z(t) = exp(-i t conj(H_S)) z(0) for U^dagger(t) Z U(t)"""
    tol = config.DEFAULT_TOL if tol is None else tol
    _check_generator(sh, tol)
    if sh.dim != zv.z.size:
        raise ShapeError(f"H_S has dimension {sh.dim}, operator vector has {zv.z.size} entries")
    z_t = lk.expm_action(sh.hs.conj(), zv.z, t, tol=tol, check_hermitian=False)
    return OperatorVector(z_t, zv.labels)


def operator_from_vector(zv: OperatorVector, s: OperatorSet) -> np.ndarray:
    return np.einsum('m,mab->ab', zv.z, s.matrices)


def expand_operator(op: np.ndarray, s: OperatorSet) -> np.ndarray:
    """Coefficients tr(O_m^dagger op) / lambda"""
    if s.matrices is None or s.norm_constant is None:
        raise ConfigurationError("expansion needs an orthogonal dense operator set")
    return np.einsum('mab,ab->m', s.matrices.conj(), op) / s.norm_constant


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """G^dagger O_m G = sum_m' g_mm' O_m'"""
    g: np.ndarray
    unitarity_defect: float
    leakage: float = 0.0


def circuit_transfer_matrix(gate: np.ndarray, s: OperatorSet, tol: Optional[float] = None) -> TransferMatrix:
    tol = config.DEFAULT_TOL if tol is None else tol
    if s.matrices is None or s.norm_constant is None:
        raise ConfigurationError("transfer matrices need an orthogonal dense operator set")
    gate = np.asarray(gate, dtype=np.complex128)
    if gate.shape != (s.dim, s.dim):
        raise ShapeError(f"gate shape {gate.shape} does not match operator dimension {s.dim}")
    conj = np.einsum('ba,mbc,cd->mad', gate.conj(), s.matrices, gate)
    flat = s.matrices.reshape(s.size, -1)
    conj_flat = conj.reshape(s.size, -1)
    g = (conj_flat @ flat.conj().T) / s.norm_constant
    residual = conj_flat - g @ flat
    norms = np.linalg.norm(conj_flat, axis=1)
    leakage = float((np.linalg.norm(residual, axis=1) / np.maximum(norms, 1e-300)).max())
    if leakage > tol:
        raise InvarianceViolationError(f"gate maps operators outside span(S) (leakage {leakage:.3e})",
                                       leakage=leakage)
    defect = float(np.abs(g @ g.conj().T - np.eye(s.size)).max())
    return TransferMatrix(g, defect, leakage)


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: Tuple[int, ...]
    matrix: Optional[np.ndarray] = field(default=None, compare=False)

    def unitary(self) -> np.ndarray:
        if self.matrix is not None:
            u = np.asarray(self.matrix, dtype=np.complex128)
        elif self.name in GATES:
            u = GATES[self.name]
        else:
            raise ShapeError(f"unknown gate {self.name!r}")
        if u.shape != (2 ** len(self.qubits),) * 2:
            raise ShapeError(f"gate {self.name} on {len(self.qubits)} qubits has shape {u.shape}")
        if np.abs(u @ u.conj().T - np.eye(u.shape[0])).max() > 1e-10:
            raise ConfigurationError(f"gate {self.name} is not unitary")
        return u


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: Tuple[Gate, ...]

    def __post_init__(self):
        for gate in self.gates:
            if len(set(gate.qubits)) != len(gate.qubits) or min(gate.qubits) < 0 or max(gate.qubits) >= self.n:
                raise ShapeError(f"gate {gate.name} has invalid qubits {gate.qubits} for n = {self.n}")

    def dense(self) -> np.ndarray:
        u = np.eye(2 ** self.n, dtype=np.complex128)
        for gate in self.gates:
            u = embed_gate(gate.unitary(), gate.qubits, self.n) @ u
        return u


def brickwork_circuit(n: int, depth: int, rng: np.random.Generator, kind: str = "cz") -> Circuit:
    """
    Nearest-neighbour bricks on (q, q+1), q even in even layers and odd in odd layers.
    kind 'cz' puts a Hadamard layer before each CZ layer; 'random' uses Haar-like 2-qubit unitaries.
    """
    gates = []
    for layer in range(depth):
        if kind == "cz":
            gates.extend(Gate("H", (q,)) for q in range(n))
        for q in range(layer % 2, n - 1, 2):
            if kind == "cz":
                gates.append(Gate("CZ", (q, q + 1)))
            elif kind == "random":
                ginibre = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
                qmat, rmat = np.linalg.qr(ginibre)
                phases = np.diag(rmat) / np.abs(np.diag(rmat))
                gates.append(Gate("unitary", (q, q + 1), qmat * phases))
            else:
                raise ConfigurationError(f"unknown brickwork kind {kind!r}")
    return Circuit(n, tuple(gates))


def _local_index(x: Sequence[int], z: Sequence[int]) -> int:
    k = len(x)
    xi = int("".join(map(str, x)), 2) if k else 0
    zi = int("".join(map(str, z)), 2) if k else 0
    return zi * 2 ** k + xi


def local_transfer(gate: Gate) -> np.ndarray:
    """4^k transfer matrix of the gate on its own Pauli algebra"""
    g = circuit_transfer_matrix(gate.unitary(), full_pauli_set(len(gate.qubits))).g
    g[np.abs(g) < 1e-14] = 0.0
    return g


def apply_local_transfer_transpose(z: np.ndarray, g_local: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """z' = g^T z for a gate lifted by identity on the other qubits of the full Pauli set"""
    size = 2 ** n
    k = len(qubits)
    out = np.zeros_like(z)
    for flat in np.flatnonzero(z):
        zi, xi = divmod(int(flat), size)
        xb, zb = list(pauli_bits(xi, n)), list(pauli_bits(zi, n))
        row = g_local[_local_index([xb[q] for q in qubits], [zb[q] for q in qubits])]
        for target in np.flatnonzero(np.abs(row) > 0):
            tz, tx = divmod(int(target), 2 ** k)
            lx, lz = pauli_bits(tx, k), pauli_bits(tz, k)
            for pos, q in enumerate(qubits):
                xb[q], zb[q] = lx[pos], lz[pos]
            index = int("".join(map(str, zb)), 2) * size + int("".join(map(str, xb)), 2)
            out[index] += row[target] * z[flat]
    return out


def operator_trajectory(circuit: Circuit, zv: OperatorVector) -> List[OperatorVector]:
    """
    Full-Pauli operator after conjugation by the last l gates, for l = 0..L.
    Gates act through local 4^k transfer matrices lifted by identity.
    """
    if zv.z.size != 4 ** circuit.n:
        raise ShapeError(f"full Pauli vector on {circuit.n} qubits needs {4 ** circuit.n} entries")
    cache: Dict[Tuple, np.ndarray] = {}
    z = zv.z.copy()
    out = [zv]
    for gate in reversed(circuit.gates):
        key = (gate.name, len(gate.qubits)) if gate.matrix is None else None
        g_local = cache.get(key) if key else None
        if g_local is None:
            g_local = local_transfer(gate)
            if key:
                cache[key] = g_local
        z = apply_local_transfer_transpose(z, g_local, gate.qubits, circuit.n)
        out.append(OperatorVector(z, zv.labels))
    return out


def evolve_operator_circuit(circuit: Circuit, zv: OperatorVector, s: Optional[OperatorSet] = None,
                            tol: Optional[float] = None) -> OperatorVector:
    """
    U^dagger Z U for U = G^L ... G^1: z <- (G^1)^T ... (G^L)^T z, applying the last gate first.

    Without s the full Pauli set on circuit.n qubits is used and every gate acts
    through its local 4^k transfer matrix; with a dense s, full transfer matrices are
    built and checked for leakage.
    """
    tol = config.DEFAULT_TOL if tol is None else tol
    z = zv.z.copy()
    if s is None:
        z = operator_trajectory(circuit, zv)[-1].z
    else:
        if z.size != s.size:
            raise ShapeError(f"operator vector has {z.size} entries, set has {s.size}")
        for gate in reversed(circuit.gates):
            tm = circuit_transfer_matrix(embed_gate(gate.unitary(), gate.qubits, circuit.n), s, tol=tol)
            z = tm.g.T @ z
    logger.debug(json.dumps({"event": "evolve_operator_circuit", "n": circuit.n, "gates": len(circuit.gates)}))
    return OperatorVector(z, zv.labels)


def support_metric(zv: OperatorVector, n: int) -> Dict:
    """
    Mass |z_m|^2 / |z|^2 by Pauli weight, plus the union of qubits carrying mass
    above SUPPORT_THRESHOLD.
    """
    if not zv.labels:
        raise ShapeError("support metric needs Pauli labels")
    strings = [parse_pauli(label, n) for label in zv.labels]
    mass = np.abs(zv.z) ** 2
    mass = mass / mass.sum()
    histogram: Dict[int, float] = {}
    support = set()
    for pauli, weight in zip(strings, mass):
        if weight <= SUPPORT_THRESHOLD:
            continue
        histogram[pauli.weight] = histogram.get(pauli.weight, 0.0) + float(weight)
        support.update(pauli.support)
    return {"histogram": dict(sorted(histogram.items())), "support": sorted(support)}


def support_radius(zv: OperatorVector, n: int, origin: int) -> int:
    """Largest distance of a supported qubit from the 0-based origin"""
    support = support_metric(zv, n)["support"]
    return max((abs(q - origin) for q in support), default=0)


def full_pauli_labels(n: int, cap: Optional[int] = None) -> List[str]:
    return [p.label for p in full_pauli_strings(n, cap)]
