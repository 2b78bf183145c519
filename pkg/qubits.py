"""
Qubit operator sets: 1-local shadows, the full Pauli set with its Bell rotation,
incomplete bases, the swap-test separation demo and the Heisenberg-Weyl generalization.

Qubit 1 is the most significant bit / first Kronecker factor throughout.
Full Pauli set ordering: P_ij = (x) X^{i_k} Z^{j_k} sits at flat index int(j) * 2^n + int(i).
"""
import json
import logging
import re
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

import config
import linalg_kernel as lk
from errors import (CapacityError, ConfigurationError, DegenerateStateError, InternalConsistencyError,
                    NotApplicableError, ShapeError)
from hilbert_oracle import PureState, State, expectations, vec_state
from shadow_core import (OperatorSet, ShadowHamiltonian, ShadowState, shadow_from_expectations,
                         shot_rng)

logger = logging.getLogger(__name__)

_I2 = np.eye(2, dtype=np.complex128)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)

_TOKEN = re.compile(r'^(XZ|X|Y|Z|I)(\d+)$')
_ONE_LOCAL = ("X", "Y", "Z")


@dataclass(frozen=True)
class PauliString:
    """phase * (x) X^{x_k} Z^{z_k}"""
    x: Tuple[int, ...]
    z: Tuple[int, ...]
    phase: complex = 1.0

    def __post_init__(self):
        if len(self.x) != len(self.z):
            raise ShapeError("x and z bit strings must have equal length")
        if any(bit not in (0, 1) for bit in self.x + self.z):
            raise ShapeError("Pauli bits must be 0 or 1")

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def support(self) -> Tuple[int, ...]:
        """0-based qubits acted on non-trivially"""
        return tuple(q for q in range(self.n) if self.x[q] or self.z[q])

    @property
    def weight(self) -> int:
        return len(self.support)

    @property
    def is_hermitian(self) -> bool:
        # (XZ)^dagger = -XZ, so phase * i^{-#XZ} must be real
        ratio = complex(self.phase) / (1j ** sum(a & b for a, b in zip(self.x, self.z)))
        return abs(ratio.imag) < 1e-12

    @property
    def label(self) -> str:
        """Unphased label, e.g. 'X1 XZ3'; the identity is '1'"""
        tokens = []
        for q in range(self.n):
            letter = ("X" if self.x[q] else "") + ("Z" if self.z[q] else "")
            if letter:
                tokens.append(f"{letter}{q + 1}")
        return " ".join(tokens) if tokens else "1"

    def matrix(self) -> np.ndarray:
        if 2 ** self.n > config.DENSE_CUTOFF:
            raise CapacityError(f"dense Pauli on {self.n} qubits exceeds the cutoff")
        out = np.ones((1, 1), dtype=np.complex128)
        for xb, zb in zip(self.x, self.z):
            out = np.kron(out, (_X if xb else _I2) @ (_Z if zb else _I2))
        return complex(self.phase) * out


def parse_pauli(label: str, n: int) -> PauliString:
    """
    Parse 'Z1', 'X1 Y2', 'XZ3' or '1' (1-based qubits). Y is stored as i XZ,
    so parsed strings built from I/X/Y/Z are Hermitian.
    """
    x, z = [0] * n, [0] * n
    phase = 1.0 + 0j
    seen = set()
    text = label.replace("*", " ").strip()
    if text in ("1", "I", ""):
        return PauliString(tuple(x), tuple(z))
    for token in text.split():
        match = _TOKEN.match(token)
        if not match:
            raise ShapeError(f"cannot parse Pauli token {token!r}")
        letter, qubit = match.group(1), int(match.group(2)) - 1
        if not 0 <= qubit < n:
            raise ShapeError(f"qubit {qubit + 1} out of range 1..{n}")
        if qubit in seen:
            raise ShapeError(f"qubit {qubit + 1} appears twice in {label!r}")
        seen.add(qubit)
        if letter in ("X", "XZ", "Y"):
            x[qubit] = 1
        if letter in ("Z", "XZ", "Y"):
            z[qubit] = 1
        if letter == "Y":
            phase *= 1j
    return PauliString(tuple(x), tuple(z), phase)


def pauli_matrix(label: str, n: int) -> np.ndarray:
    return parse_pauli(label, n).matrix()


@dataclass(frozen=True)
class PauliTermSum:
    """sum_t coeff_t * P_t with Hermitian P_t and real coefficients"""
    n: int
    terms: Tuple[Tuple[PauliString, float], ...]

    def __post_init__(self):
        seen = set()
        for pauli, coeff in self.terms:
            if pauli.n != self.n:
                raise ShapeError(f"term {pauli.label} acts on {pauli.n} qubits, expected {self.n}")
            if not pauli.is_hermitian:
                raise ConfigurationError(f"term {pauli.label} is not Hermitian")
            if not np.isfinite(coeff):
                raise ShapeError("Pauli coefficients must be finite")
            key = (pauli.x, pauli.z)
            if key in seen:
                raise ShapeError(f"duplicate Pauli term {pauli.label}")
            seen.add(key)

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[Tuple[str, float]]) -> 'PauliTermSum':
        return cls(n, tuple((parse_pauli(label, n), float(coeff)) for label, coeff in terms))

    def dense(self) -> np.ndarray:
        dim = 2 ** self.n
        if dim > config.DENSE_CUTOFF:
            raise CapacityError(f"dense Hamiltonian on {self.n} qubits exceeds the cutoff")
        h = np.zeros((dim, dim), dtype=np.complex128)
        for pauli, coeff in self.terms:
            h += coeff * pauli.matrix()
        return h


def one_local_labels(n: int) -> Tuple[str, ...]:
    return ("1",) + tuple(f"{p}{q + 1}" for q in range(n) for p in _ONE_LOCAL)


def one_local_set(n: int) -> OperatorSet:
    """Dense {1, X_1, Y_1, Z_1, X_2, ...} (lambda = 2^n), for oracle checks"""
    labels = one_local_labels(n)
    return OperatorSet(labels, np.array([pauli_matrix(label, n) for label in labels]), float(2 ** n))


def _single_qubit_component(pauli: PauliString, coeff: float) -> Tuple[int, int, float]:
    """(qubit, axis 0/1/2 for X/Y/Z, real coefficient) of a weight-1 term"""
    (q,) = pauli.support
    if pauli.x[q] and pauli.z[q]:
        return q, 1, coeff * (complex(pauli.phase) / 1j).real
    return q, (0 if pauli.x[q] else 2), coeff * complex(pauli.phase).real


def one_local_shadow_hamiltonian(h: PauliTermSum) -> ShadowHamiltonian:
    """
    Index-level H_S of dimension 3n + 1 from [s_a, s_b] = 2i eps_abc s_c:
    h_(q,b),(q,c) = -2i sum_a c_a eps_abc.
    """
    n = h.n
    fields = np.zeros((n, 3))
    for pauli, coeff in h.terms:
        if pauli.weight == 0:
            continue
        if pauli.weight > 1:
            raise NotApplicableError(f"term {pauli.label} acts on {pauli.weight} qubits; H is not 1-local")
        q, axis, value = _single_qubit_component(pauli, coeff)
        fields[q, axis] += value

    entries = []
    for q in range(n):
        for b in range(3):
            for c in range(3):
                if b == c:
                    continue
                a = 3 - b - c
                eps = 1.0 if (a, b, c) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)) else -1.0
                value = -2j * fields[q, a] * eps
                if value != 0:
                    entries.append((1 + 3 * q + b, 1 + 3 * q + c, value))
    size = 3 * n + 1
    hs = lk.from_triplets((size, size), entries)
    sparsity = lk.row_sparsity(hs)
    if sparsity > 2:
        raise InternalConsistencyError(f"1-local H_S has row sparsity {sparsity} > 2")
    logger.info(json.dumps({"event": "one_local_shadow_hamiltonian", "n": n, "M": size, "nnz": int(hs.nnz)}))
    return ShadowHamiltonian(hs, 0.0, lk.hermitian_defect(hs), one_local_labels(n), {"sparsity_bound": 2})


def all_zero_shadow(n: int) -> ShadowState:
    """<1> = <Z_j> = 1 for |0...0>"""
    labels = one_local_labels(n)
    amps = np.zeros(len(labels))
    amps[0] = 1.0
    for q in range(n):
        amps[1 + 3 * q + 2] = 1.0
    return ShadowState(amps / np.sqrt(n + 1), float(n + 1), labels)


def statevector_shadow(psi: PureState, s: OperatorSet) -> ShadowState:
    return shadow_from_expectations(expectations(psi, s), s.labels)


def pauli_bits(value: int, n: int) -> Tuple[int, ...]:
    return tuple((value >> (n - 1 - k)) & 1 for k in range(n))


def full_pauli_strings(n: int, cap: Optional[int] = None) -> List[PauliString]:
    cap = config.MAX_SHADOW_DIM if cap is None else cap
    if 2 * n > int(cap).bit_length() or 4 ** n > cap:
        raise CapacityError(f"{n} qubits give 4^{n} Pauli strings, above the cap {cap}")
    size = 2 ** n
    return [PauliString(pauli_bits(i, n), pauli_bits(j, n)) for j in range(size) for i in range(size)]


def full_pauli_set(n: int) -> OperatorSet:
    """All 4^n unphased P_ij, lambda = 2^n"""
    if 4 ** n > config.DENSE_CUTOFF:
        raise CapacityError(f"full Pauli set on {n} qubits has 4^n = {4 ** n} operators, above the cutoff")
    strings = full_pauli_strings(n)
    return OperatorSet(tuple(p.label for p in strings), np.array([p.matrix() for p in strings]), float(2 ** n))


def embed_gate(u: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Dense 2^n x 2^n matrix of a k-qubit gate acting on the listed 0-based qubits"""
    k = len(qubits)
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2 ** k, 2 ** k):
        raise ShapeError(f"{k}-qubit gate must be {2 ** k} x {2 ** k}, got {u.shape}")
    if len(set(qubits)) != k or min(qubits) < 0 or max(qubits) >= n:
        raise ShapeError(f"invalid gate support {list(qubits)} on {n} qubits")
    if 2 ** n > config.DENSE_CUTOFF:
        raise CapacityError(f"dense gate on {n} qubits exceeds the cutoff")
    ident = np.eye(2 ** n, dtype=np.complex128).reshape([2] * n + [2 ** n])
    out = np.tensordot(u.reshape([2] * (2 * k)), ident, axes=(list(range(k, 2 * k)), list(qubits)))
    out = np.moveaxis(out, list(range(k)), list(qubits))
    return out.reshape(2 ** n, 2 ** n)


def _check_vs_capacity(n: int):
    if 4 ** n > config.DENSE_CUTOFF:
        raise CapacityError(f"V_S on 2 x {n} qubits exceeds the dense cutoff")


def bell_rotation(n: int) -> np.ndarray:
    """
    Gate-built V_S on registers A (system copy) and B (conjugate copy): for every
    qubit pair a CNOT from A_k onto B_k followed by a Hadamard on A_k.
    """
    _check_vs_capacity(n)
    v = np.eye(4 ** n, dtype=np.complex128)
    for k in range(n):
        v = embed_gate(_CNOT, [k, n + k], 2 * n) @ v
        v = embed_gate(_H, [k], 2 * n) @ v
    return v


def bell_rotation_defining(n: int) -> np.ndarray:
    """V_S with rows O_m^T / sqrt(2^n) flattened, so V_S (psi (x) conj(psi)) lists <O_m>/sqrt(2^n)"""
    _check_vs_capacity(n)
    size = 2 ** n
    rows = [(p.matrix().T / np.sqrt(size)).reshape(-1) for p in full_pauli_strings(n)]
    return np.array(rows)


def orthonormal_rows(s: OperatorSet) -> np.ndarray:
    """Rows O_m^T / sqrt(lambda) flattened: the rows of V_S belonging to S"""
    if s.matrices is None or s.norm_constant is None:
        raise ConfigurationError("needs an orthogonal dense operator set")
    return np.array([(o.T / np.sqrt(s.norm_constant)).reshape(-1) for o in s.matrices])


def projector_check(s: OperatorSet) -> Dict[str, float]:
    """P_S = W^dagger W must be an orthogonal projector of rank M"""
    w = orthonormal_rows(s)
    p = w.conj().T @ w
    return {
        "rank": float(np.real(np.trace(p))),
        "idempotent_defect": float(np.abs(p @ p - p).max()),
        "hermitian_defect": lk.hermitian_defect(p),
    }


def incomplete_basis_shadow(psi: PureState, s: OperatorSet) -> ShadowState:
    """Normalized P_S V_S (psi (x) conj(psi)), cross-checked against direct expectations"""
    w = orthonormal_rows(s)
    if w.shape[1] != psi.dim ** 2:
        raise ShapeError(f"operator dimension {s.dim} does not match state dimension {psi.dim}")
    check = projector_check(s)
    if check["idempotent_defect"] > 1e-10:
        raise ConfigurationError("operator set rows are not orthonormal")
    projected = w @ vec_state(psi)
    if np.linalg.norm(projected) ** 2 <= 1e-24:
        raise DegenerateStateError("state has no weight on span(S): all expectations vanish")
    direct = expectations(psi, s)
    error = float(np.abs(np.sqrt(s.norm_constant) * projected - direct).max())
    if error > 1e-10:
        raise InternalConsistencyError(f"projected shadow disagrees with direct expectations ({error:.3e})")
    return shadow_from_expectations(np.sqrt(s.norm_constant) * projected, s.labels)


def conjugate_overlap(psi: PureState) -> complex:
    """<psi|conj(psi)>"""
    return lk.inner(psi.amplitudes, psi.amplitudes.conj())


def swap_test_conjugate_overlap(psi: PureState, shots: int, seed: Optional[int] = None,
                                rng: Optional[np.random.Generator] = None) -> float:
    """
    Simulated one-copy swap test on psi (x) conj(psi). Accept probability is
    1/2 + 1/2 |<psi|conj(psi)>|^2; returns the estimate of |<psi|conj(psi)>|.
    """
    if shots < 1:
        raise ShapeError("shots must be at least 1")
    rng = rng if rng is not None else shot_rng(config.DEFAULT_SEED if seed is None else seed)
    pair = np.outer(psi.amplitudes, psi.amplitudes.conj())
    swapped = pair.T
    p_accept = 0.5 + 0.5 * float(np.vdot(pair, swapped).real)
    p_accept = min(max(p_accept, 0.0), 1.0)
    accepted = rng.binomial(shots, p_accept)
    return float(np.sqrt(np.clip(2.0 * accepted / shots - 1.0, 0.0, 1.0)))


def heisenberg_weyl_set(dim: int) -> OperatorSet:
    """
    X^a Z^b with X|j> = |j+1>, Z|j> = exp(-2 pi i j / N)|j>, at flat index a*N + b;
    lambda = N.
    """
    if dim < 2:
        raise ShapeError("Heisenberg-Weyl set needs N >= 2")
    if dim ** 2 > config.DENSE_CUTOFF:
        raise CapacityError(f"Heisenberg-Weyl set for N = {dim} exceeds the cutoff")
    shift = np.roll(np.eye(dim, dtype=np.complex128), 1, axis=0)
    clock = np.diag(np.exp(-2j * np.pi * np.arange(dim) / dim))
    mats, labels = [], []
    for a in range(dim):
        for b in range(dim):
            mats.append(np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b))
            labels.append(f"X^{a}Z^{b}")
    return OperatorSet(tuple(labels), np.array(mats), float(dim))


def heisenberg_weyl_vs(dim: int) -> np.ndarray:
    """
    Circuit form: inverse conditional shift |k, l> -> |k, l - k>, then F^dagger on the
    first register, then SWAP. Equals the defining rows of heisenberg_weyl_set.
    """
    if dim ** 2 > config.DENSE_CUTOFF:
        raise CapacityError(f"Heisenberg-Weyl V_S for N = {dim} exceeds the cutoff")
    size = dim * dim
    shift = np.zeros((size, size), dtype=np.complex128)
    for k in range(dim):
        for l in range(dim):
            shift[k * dim + (l - k) % dim, k * dim + l] = 1.0
    omega = np.exp(2j * np.pi / dim)
    fourier = omega ** np.outer(np.arange(dim), np.arange(dim)) / np.sqrt(dim)
    swap = np.zeros((size, size), dtype=np.complex128)
    for a in range(dim):
        for b in range(dim):
            swap[b * dim + a, a * dim + b] = 1.0
    v = swap @ np.kron(fourier.conj().T, np.eye(dim)) @ shift

    defining = orthonormal_rows(heisenberg_weyl_set(dim))
    defect = float(np.abs(v - defining).max())
    if defect > 1e-10:
        raise InternalConsistencyError(f"Heisenberg-Weyl circuit disagrees with its defining rows ({defect:.3e})")
    return v


def lemma_error(v_s: np.ndarray, state: State, s: OperatorSet) -> float:
    """max |V_S vec(rho)/norm - |rho;S>| for a complete orthonormal set"""
    vec = vec_state(state)
    shadow = shadow_from_expectations(expectations(state, s), s.labels)
    lifted = v_s @ vec
    lifted = lifted / np.linalg.norm(lifted)
    return float(np.abs(lifted - shadow.amplitudes).max())


def shadow_unitary_evolution(psi: PureState, u: np.ndarray) -> Dict[str, float]:
    """Full-Pauli shadow of U psi against V_S (U (x) conj(U)) (psi (x) conj(psi))"""
    n = int(round(np.log2(psi.dim)))
    if 2 ** n != psi.dim:
        raise ShapeError("state dimension must be a power of two")
    u = np.asarray(u, dtype=np.complex128)
    if np.abs(u @ u.conj().T - np.eye(psi.dim)).max() > 1e-10:
        raise ConfigurationError("U must be unitary")
    s = full_pauli_set(n)
    v_s = bell_rotation(n)
    evolved = PureState.from_vector(u @ psi.amplitudes, n)
    direct = shadow_from_expectations(expectations(evolved, s), s.labels).amplitudes
    lifted = v_s @ (np.kron(u, u.conj()) @ vec_state(psi))
    return {"max_error": float(np.abs(lifted - direct).max()), "n": n}
