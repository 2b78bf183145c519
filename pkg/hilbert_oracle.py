"""
Brute-force full-Hilbert-space simulator.

Ground truth for every shadow computation at small dimension: dense states,
dense operators, exact eigendecomposition. Nothing clever lives here.
"""
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

import config
import linalg_kernel as lk
from errors import CapacityError, ShapeError
from shadow_core import OperatorSet, ShadowState, shadow_from_expectations


def _check_capacity(dim: int, cutoff: Optional[int] = None):
    cutoff = config.DENSE_CUTOFF if cutoff is None else cutoff
    if dim > cutoff:
        raise CapacityError(f"Hilbert dimension {dim} exceeds the oracle cutoff {cutoff} "
                            "(set SHADOWSIM_DENSE_CUTOFF to raise it)")


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    n_qubits: Optional[int] = None

    def __post_init__(self):
        amps = lk.check_finite(np.asarray(self.amplitudes, dtype=np.complex128).ravel(), "state")
        object.__setattr__(self, 'amplitudes', amps)
        if abs(np.linalg.norm(amps) - 1.0) > 1e-12:
            raise ShapeError(f"pure state must have unit norm, got {np.linalg.norm(amps):.15f}")
        if self.n_qubits is not None and amps.size != 2 ** self.n_qubits:
            raise ShapeError(f"{self.n_qubits} qubits need 2^n amplitudes, got {amps.size}")

    @classmethod
    def from_vector(cls, vector, n_qubits: Optional[int] = None) -> 'PureState':
        """Normalize and wrap"""
        v = np.asarray(vector, dtype=np.complex128).ravel()
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ShapeError("zero vector is not a state")
        return cls(v / norm, n_qubits)

    @property
    def dim(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        rho = lk.check_finite(np.asarray(self.matrix, dtype=np.complex128), "density matrix")
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ShapeError(f"density matrix must be square, got {rho.shape}")
        _check_capacity(rho.shape[0])
        if lk.hermitian_defect(rho) > 1e-10:
            raise ShapeError("density matrix must be Hermitian")
        if abs(np.trace(rho) - 1.0) > 1e-10:
            raise ShapeError(f"density matrix must have unit trace, got {np.trace(rho).real:.12f}")
        if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -1e-8:
            raise ShapeError("density matrix must be positive semidefinite")
        object.__setattr__(self, 'matrix', rho)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))


State = Union[PureState, DensityMatrix]


def density_from_pure(psi: PureState) -> DensityMatrix:
    return DensityMatrix(np.outer(psi.amplitudes, psi.amplitudes.conj()))


def maximally_mixed(dim: int) -> DensityMatrix:
    return DensityMatrix(np.eye(dim, dtype=np.complex128) / dim)


def basis_state(dim: int, index: int = 0) -> PureState:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return PureState(v)


def random_pure_state(dim: int, rng: np.random.Generator) -> PureState:
    return PureState.from_vector(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityMatrix:
    """Mixed state from a random Ginibre factor"""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (g + g.conj().T)


def evolve_full(h: np.ndarray, psi: PureState, t: float) -> PureState:
    """exp(-i t H) psi"""
    h = np.asarray(h, dtype=np.complex128)
    if h.shape != (psi.dim, psi.dim):
        raise ShapeError(f"Hamiltonian shape {h.shape} does not match state dimension {psi.dim}")
    _check_capacity(psi.dim)
    return PureState(lk.dense_expm(h, t) @ psi.amplitudes, psi.n_qubits)


def evolve_density(h: np.ndarray, rho: DensityMatrix, t: float) -> DensityMatrix:
    """U rho U^dagger"""
    h = np.asarray(h, dtype=np.complex128)
    if h.shape != rho.matrix.shape:
        raise ShapeError(f"Hamiltonian shape {h.shape} does not match state dimension {rho.dim}")
    u = lk.dense_expm(h, t)
    out = u @ rho.matrix @ u.conj().T
    return DensityMatrix(0.5 * (out + out.conj().T))


def evolve_state(h: np.ndarray, state: State, t: float) -> State:
    if isinstance(state, PureState):
        return evolve_full(h, state, t)
    return evolve_density(h, state, t)


def heisenberg_operator(h: np.ndarray, op: np.ndarray, t: float) -> np.ndarray:
    """U^dagger(t) op U(t) with U(t) = exp(-i t H)"""
    u = lk.dense_expm(np.asarray(h, dtype=np.complex128), t)
    return u.conj().T @ np.asarray(op, dtype=np.complex128) @ u


def expectations(state: State, s: OperatorSet) -> np.ndarray:
    """tr(rho O_m) for every operator of a dense set"""
    if s.matrices is None:
        raise ShapeError("expectations need an operator set with matrices")
    if isinstance(state, PureState):
        if state.dim != s.dim:
            raise ShapeError(f"state dimension {state.dim} does not match operators ({s.dim})")
        psi = state.amplitudes
        return np.einsum('a,mab,b->m', psi.conj(), s.matrices, psi)
    if state.dim != s.dim:
        raise ShapeError(f"state dimension {state.dim} does not match operators ({s.dim})")
    return np.einsum('ab,mba->m', state.matrix, s.matrices)


def shadow_from_state(state: State, s: OperatorSet) -> ShadowState:
    """Expectation vector normalized, with A = sum |<O_m>|^2"""
    return shadow_from_expectations(expectations(state, s), s.labels)


def vec_state(state: State) -> np.ndarray:
    """vec(rho) / sqrt(tr rho^2); equals psi (x) conj(psi) for a pure state"""
    if isinstance(state, PureState):
        psi = state.amplitudes
        return np.kron(psi, psi.conj())
    vec = state.matrix.reshape(-1)
    return vec / np.sqrt(state.purity)


def real_representation(psi: PureState) -> PureState:
    """|0>|Re psi> + |1>|Im psi>, normalized"""
    v = psi.amplitudes
    return PureState.from_vector(np.concatenate([v.real, v.imag]).astype(np.complex128))
