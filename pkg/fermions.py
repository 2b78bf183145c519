"""
Free fermions in the Majorana picture.

H = sum_{j,k} gamma_jk c_j c_k over 2n Majorana operators, shadowed on the pair set
S = {c_j c_k : j < k}. Everything except the Jordan-Wigner oracle works at the
index level (no 2^n objects). Public functions take 1-based mode/Majorana indices;
arrays are 0-based.
"""
import json
import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

import config
import linalg_kernel as lk
from errors import (CapacityError, ConfigurationError, InternalConsistencyError, NotApplicableError,
                    ShapeError)
from hilbert_oracle import PureState
from shadow_core import (OperatorSet, ShadowHamiltonian, ShadowState, StructureTable, evolve_shadow,
                         shadow_from_expectations, shadow_overlap)

logger = logging.getLogger(__name__)

_PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


class PairIndex:
    """Lexicographic bijection (j, k), j < k over 2n Majoranas <-> flat m in [0, n(2n-1))"""

    def __init__(self, n: int):
        if n < 1:
            raise ShapeError("need at least one fermionic mode")
        self.n = n
        self.pairs: List[Tuple[int, int]] = list(combinations(range(2 * n), 2))
        self._index = {pair: m for m, pair in enumerate(self.pairs)}

    @property
    def size(self) -> int:
        return len(self.pairs)

    def index(self, j: int, k: int) -> int:
        """0-based Majorana indices, either order"""
        if j == k:
            raise ShapeError("a pair needs two distinct Majoranas")
        return self._index[(min(j, k), max(j, k))]

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(f"c{j + 1}c{k + 1}" for j, k in self.pairs)


@dataclass(frozen=True, eq=False)
class MajoranaCoupling:
    """
    Canonical coupling: gamma is 2n x 2n, purely imaginary and antisymmetric
    (hence Hermitian). offset is the scalar part stripped by canonicalization.
    """
    n: int
    gamma: sp.csr_matrix
    offset: float = 0.0

    def __post_init__(self):
        gamma = lk.canonical_sparse(self.gamma)
        if gamma.shape != (2 * self.n, 2 * self.n):
            raise ShapeError(f"gamma must be {2 * self.n} x {2 * self.n}, got {gamma.shape}")
        if lk.hermitian_defect(gamma) > 1e-12:
            raise ConfigurationError("gamma must be Hermitian")
        if gamma.nnz and np.abs(gamma.data.real).max() > 1e-12:
            raise ConfigurationError("canonical gamma must be purely imaginary")
        object.__setattr__(self, 'gamma', gamma)

    @classmethod
    def from_matrix(cls, n: int, w) -> 'MajoranaCoupling':
        """
        Canonicalize H = sum_jk w_jk c_j c_k. Only the antisymmetric part of w acts
        (c_j c_k = -c_k c_j for j != k, c_j^2 = 1); the diagonal becomes the offset.
        """
        w = sp.csr_matrix(w, dtype=np.complex128)
        if w.shape != (2 * n, 2 * n):
            raise ShapeError(f"coupling must be {2 * n} x {2 * n}, got {w.shape}")
        antisym = 0.5 * (w - w.T)
        diag = w.diagonal()
        if antisym.nnz and np.abs(antisym.data.real).max() > 1e-12:
            raise ConfigurationError("coupling does not describe a Hermitian Hamiltonian "
                                     "(antisymmetric part has a real component)")
        if np.abs(diag.imag).max(initial=0.0) > 1e-12:
            raise ConfigurationError("diagonal couplings must be real")
        gamma = lk.canonical_sparse(1j * antisym.imag)
        return cls(n, gamma, float(diag.real.sum()))

    @classmethod
    def from_triplets(cls, n: int, entries: Iterable[Sequence[float]]) -> 'MajoranaCoupling':
        """entries are [j, k, re, im] with 1-based Majorana indices; repeats add up"""
        trips = []
        for entry in entries:
            if len(entry) != 4:
                raise ShapeError(f"gamma entry must be [j, k, re, im], got {entry!r}")
            j, k = int(entry[0]) - 1, int(entry[1]) - 1
            if not (0 <= j < 2 * n and 0 <= k < 2 * n):
                raise ShapeError(f"Majorana index out of range in {entry!r}")
            trips.append((j, k, complex(entry[2], entry[3])))
        return cls.from_matrix(n, lk.from_triplets((2 * n, 2 * n), trips))

    @property
    def degree(self) -> int:
        return lk.row_sparsity(self.gamma)

    @property
    def gamma_max(self) -> float:
        return lk.max_norm(self.gamma)


def _mode_transform(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    c = T f and f = T_inv c with f = (a_1..a_n, a_1^dagger..a_n^dagger), using
    c_{2j-1} = a_j^dagger + a_j and c_{2j} = i(a_j^dagger - a_j).
    """
    t = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    t_inv = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    for j in range(n):
        t[2 * j, j], t[2 * j, n + j] = 1, 1
        t[2 * j + 1, j], t[2 * j + 1, n + j] = -1j, 1j
        t_inv[j, 2 * j], t_inv[j, 2 * j + 1] = 0.5, 0.5j
        t_inv[n + j, 2 * j], t_inv[n + j, 2 * j + 1] = 0.5, -0.5j
    return t, t_inv


def gamma_from_alpha_beta(alpha, beta) -> MajoranaCoupling:
    """
    Majorana coupling of H = sum alpha_jk a_j^dag a_k + beta_jk a_j a_k - conj(beta_jk) a_j^dag a_k^dag.
    alpha must be Hermitian.
    """
    alpha = np.asarray(alpha, dtype=np.complex128)
    beta = np.asarray(beta, dtype=np.complex128)
    n = alpha.shape[0]
    if alpha.shape != (n, n) or beta.shape != (n, n):
        raise ShapeError("alpha and beta must both be n x n")
    if lk.hermitian_defect(alpha) > 1e-12:
        raise ConfigurationError("alpha must be Hermitian")
    _, t_inv = _mode_transform(n)
    k = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    k[:n, :n] = beta
    k[n:, :n] = alpha
    k[n:, n:] = -beta.conj()
    return MajoranaCoupling.from_matrix(n, t_inv.T @ k @ t_inv)


def one_body_matrix(g: MajoranaCoupling) -> Tuple[np.ndarray, float]:
    """
    (h1, pairing) with H = sum h1_jk a_j^dag a_k + pairing terms + const.
    pairing is the largest a a / a^dag a^dag coefficient; zero means number-conserving.
    """
    n = g.n
    t, _ = _mode_transform(n)
    k = t.T @ g.gamma.toarray() @ t
    pair_aa = k[:n, :n] - k[:n, :n].T
    pair_dd = k[n:, n:] - k[n:, n:].T
    pairing = float(max(np.abs(pair_aa).max(), np.abs(pair_dd).max()))
    h1 = k[n:, :n] - k[:n, n:].T
    return h1, pairing


def rdm_to_pair_expectations(rdm: np.ndarray) -> np.ndarray:
    """<c_j c_k> (j < k, lexicographic) of a number-conserving state with D_jk = <a_j^dag a_k>"""
    rdm = np.asarray(rdm, dtype=np.complex128)
    n = rdm.shape[0]
    t, _ = _mode_transform(n)
    moments = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    moments[:n, n:] = np.eye(n) - rdm.T
    moments[n:, :n] = rdm
    full = t @ moments @ t.T
    return np.array([full[j, k] for j, k in PairIndex(n).pairs])


def pair_expectations_to_rdm(values: np.ndarray, n: int) -> np.ndarray:
    """Inverse of rdm_to_pair_expectations"""
    pairs = PairIndex(n)
    values = np.asarray(values, dtype=np.complex128)
    if values.size != pairs.size:
        raise ShapeError(f"expected {pairs.size} pair expectations, got {values.size}")
    full = np.eye(2 * n, dtype=np.complex128)
    for m, (j, k) in enumerate(pairs.pairs):
        full[j, k] = values[m]
        full[k, j] = -values[m]
    _, t_inv = _mode_transform(n)
    moments = t_inv @ full @ t_inv.T
    return moments[n:, :n]


def fermion_shadow_hamiltonian(g: MajoranaCoupling) -> ShadowHamiltonian:
    """
    Index-level H_S on the pair set.

    From [c_j c_k, c_l] = 2 delta_lk c_j - 2 delta_lj c_k and an antisymmetric gamma,
    [H, c_a c_b] = 4 sum_l gamma_la c_l c_b + 4 sum_l gamma_lb c_a c_l.
    """
    pairs = PairIndex(g.n)
    by_column = g.gamma.T.tocsr()  # row a holds gamma_la

    def neighbours(a):
        lo, hi = by_column.indptr[a], by_column.indptr[a + 1]
        return zip(by_column.indices[lo:hi], by_column.data[lo:hi])

    entries = []
    for m, (a, b) in enumerate(pairs.pairs):
        for l, gamma_la in neighbours(a):
            if l != b:
                sign = 1.0 if l < b else -1.0
                entries.append((m, pairs.index(l, b), -4.0 * sign * gamma_la))
        for l, gamma_lb in neighbours(b):
            if l != a:
                sign = 1.0 if a < l else -1.0
                entries.append((m, pairs.index(a, l), -4.0 * sign * gamma_lb))
    hs = lk.from_triplets((pairs.size, pairs.size), entries)

    degree = g.degree
    pair_coupling_max = 2.0 * g.gamma_max  # largest coefficient of any c_j c_k (j < k) in H
    bounds = {
        "degree": degree,
        "sparsity_bound": 2 * degree,
        "gamma_max": g.gamma_max,
        "max_norm_bound": 2.0 * pair_coupling_max,
    }
    sparsity, max_entry = lk.row_sparsity(hs), lk.max_norm(hs)
    if sparsity > bounds["sparsity_bound"]:
        raise InternalConsistencyError(f"H_S sparsity {sparsity} exceeds 2d = {2 * degree}")
    if max_entry > bounds["max_norm_bound"] * (1 + 1e-12):
        raise InternalConsistencyError(f"H_S max-norm {max_entry} exceeds {bounds['max_norm_bound']}")
    logger.info(json.dumps({
        "event": "fermion_shadow_hamiltonian",
        "n": g.n,
        "M": pairs.size,
        "nnz": int(hs.nnz),
        "sparsity": sparsity,
        "degree": degree,
    }))
    return ShadowHamiltonian(hs, 0.0, lk.hermitian_defect(hs), pairs.labels, bounds)


def majorana_structure_table(n: int) -> StructureTable:
    """
    Structure constants of the anti-Hermitian pair basis O_(jk) = c_j c_k:
    [c_j c_k, c_a c_b] = 2 d_ak c_j c_b - 2 d_aj c_k c_b + 2 d_bk c_a c_j - 2 d_bj c_a c_k.
    """
    pairs = PairIndex(n)
    touching: Dict[int, List[int]] = {x: [] for x in range(2 * n)}
    for m, (a, b) in enumerate(pairs.pairs):
        touching[a].append(m)
        touching[b].append(m)

    def add(acc, x, y, coeff):
        sign = 1.0 if x < y else -1.0
        target = pairs.index(x, y)
        acc[target] = acc.get(target, 0.0) + sign * coeff

    entries = {}
    for p, (j, k) in enumerate(pairs.pairs):
        for q in set(touching[j]) | set(touching[k]):
            if q == p:
                continue
            a, b = pairs.pairs[q]
            acc: Dict[int, float] = {}
            if a == k:
                add(acc, j, b, 2.0)
            if a == j:
                add(acc, k, b, -2.0)
            if b == k:
                add(acc, a, j, 2.0)
            if b == j:
                add(acc, a, k, -2.0)
            row = tuple(sorted((l, v) for l, v in acc.items() if v != 0.0))
            if row:
                entries[(p, q)] = row
    return StructureTable(pairs.size, entries, pairs.labels)


def structure_alpha(g: MajoranaCoupling) -> np.ndarray:
    """alpha with H = i sum_m alpha_m c_j c_k, i.e. alpha_(jk) = -2i gamma_jk"""
    pairs = PairIndex(g.n)
    gamma = g.gamma.tocsr()
    alpha = np.array([(-2j * gamma[j, k]).real for j, k in pairs.pairs])
    return alpha


def vacuum_shadow(n: int) -> ShadowState:
    """
    Bare vacuum: <c_{2l-1} c_{2l}> = i, all other pair expectations zero.
    Amplitudes are stored real-positive with the factor i kept in global_phase.
    """
    pairs = PairIndex(n)
    amps = np.zeros(pairs.size)
    for l in range(n):
        amps[pairs.index(2 * l, 2 * l + 1)] = 1.0 / np.sqrt(n)
    return ShadowState(amps, float(n), pairs.labels, 1j)


def product_state_shadow(n: int, occupied: Iterable[int]) -> ShadowState:
    """Shadow of prod_{j in I} a_j^dagger |vac>; occupied modes are 1-based"""
    vac = vacuum_shadow(n)
    pairs = PairIndex(n)
    amps = vac.amplitudes.copy()
    for j in set(occupied):
        if not 1 <= j <= n:
            raise ShapeError(f"mode {j} out of range 1..{n}")
        amps[pairs.index(2 * j - 2, 2 * j - 1)] *= -1
    return vac.with_amplitudes(amps)


def subset_energy(st: ShadowState, g: MajoranaCoupling, subset: Iterable[int],
                  shots: Optional[int] = None, rng: Optional[np.random.Generator] = None) -> float:
    """
    <H_J> for H_J = sum_{j,k in J} gamma_jk c_j c_k (J 1-based Majorana indices),
    as G sqrt(A) <psi_J|rho;S> with psi_J built from the J couplings.
    """
    pairs = PairIndex(g.n)
    if st.size != pairs.size:
        raise ShapeError(f"shadow state has {st.size} amplitudes, pair set has {pairs.size}")
    chosen = sorted({int(j) - 1 for j in subset})
    if not chosen:
        raise ShapeError("subset J must not be empty")
    if chosen[0] < 0 or chosen[-1] >= 2 * g.n:
        raise ShapeError("subset index out of range")
    gamma = g.gamma.tocsr()
    weights = np.zeros(pairs.size, dtype=np.complex128)
    for j, k in combinations(chosen, 2):
        weights[pairs.index(j, k)] = 2.0 * gamma[j, k]
    coupling_norm = float(np.linalg.norm(weights))
    if coupling_norm == 0:
        raise NotApplicableError("subset has zero coupling (G = 0)")
    psi_j = weights.conj() / coupling_norm
    overlap = shadow_overlap(st, psi_j, shots=shots, rng=rng)
    return float((coupling_norm * np.sqrt(st.norm_a) * complex(st.global_phase) * overlap).real)


def total_energy(st: ShadowState, g: MajoranaCoupling) -> float:
    """<H> including the scalar offset"""
    return subset_energy(st, g, range(1, 2 * g.n + 1)) + g.offset


def _check_dense(n: int, cutoff: Optional[int] = None):
    cutoff = config.DENSE_CUTOFF if cutoff is None else cutoff
    if 2 ** n > cutoff:
        raise CapacityError(f"Jordan-Wigner oracle for n = {n} exceeds the dense cutoff {cutoff}")


def majorana_matrices(n: int) -> List[np.ndarray]:
    """c_{2j-1} = (prod_{i<j} Z_i) X_j, c_{2j} = (prod_{i<j} Z_i) Y_j"""
    _check_dense(n)
    out = []
    for j in range(n):
        for local in (_PAULI_X, _PAULI_Y):
            op = np.ones((1, 1), dtype=np.complex128)
            for i in range(n):
                op = np.kron(op, _PAULI_Z if i < j else local if i == j else np.eye(2))
            out.append(op)
    return out


def check_anticommutation(cs: Sequence[np.ndarray], tol: float = 1e-12):
    dim = cs[0].shape[0]
    for j, cj in enumerate(cs):
        for k in range(j, len(cs)):
            anti = cj @ cs[k] + cs[k] @ cj
            expected = 2 * np.eye(dim) if j == k else 0
            if np.abs(anti - expected).max() > tol:
                raise InternalConsistencyError(f"{{c_{j + 1}, c_{k + 1}}} != 2 delta")


def jw_operator_set(n: int) -> OperatorSet:
    """Dense pair set {c_j c_k} (lambda = 2^n)"""
    cs = majorana_matrices(n)
    check_anticommutation(cs)
    pairs = PairIndex(n)
    mats = np.array([cs[j] @ cs[k] for j, k in pairs.pairs])
    return OperatorSet(pairs.labels, mats, float(2 ** n))


def jordan_wigner(g: MajoranaCoupling) -> np.ndarray:
    """Dense 2^n x 2^n H = sum gamma_jk c_j c_k + offset"""
    cs = majorana_matrices(g.n)
    dim = 2 ** g.n
    h = g.offset * np.eye(dim, dtype=np.complex128)
    coo = g.gamma.tocoo()
    for j, k, value in zip(coo.row, coo.col, coo.data):
        h += value * (cs[j] @ cs[k])
    return h


def quartic_majorana_term(n: int, indices: Sequence[int], coeff: float) -> np.ndarray:
    """Dense coeff * c_j c_k c_l c_m for four distinct 1-based indices (Hermitian for real coeff)"""
    idx = [int(i) - 1 for i in indices]
    if len(idx) != 4 or len(set(idx)) != 4:
        raise ShapeError("quartic term needs four distinct Majorana indices")
    cs = majorana_matrices(n)
    if max(idx) >= 2 * n or min(idx) < 0:
        raise ShapeError("quartic index out of range")
    return float(coeff) * (cs[idx[0]] @ cs[idx[1]] @ cs[idx[2]] @ cs[idx[3]])


def jw_product_state(n: int, occupied: Iterable[int] = ()) -> PureState:
    """Computational basis state with qubit j set for each occupied 1-based mode j"""
    _check_dense(n)
    index = 0
    for j in set(occupied):
        if not 1 <= j <= n:
            raise ShapeError(f"mode {j} out of range 1..{n}")
        index |= 1 << (n - j)
    amps = np.zeros(2 ** n, dtype=np.complex128)
    amps[index] = 1.0
    return PureState(amps, n)


def single_particle_crosscheck(g: MajoranaCoupling, t: float, psi0: Optional[np.ndarray] = None,
                               tol: Optional[float] = None) -> Dict:
    """
    For a number-conserving H holding one fermion, the pair shadow carries the same
    information as psi (x) conj(psi): evolve the first-quantized wavefunction with the
    n x n one-body matrix and compare its 1-RDM against the evolved shadow's.
    """
    tol = config.DEFAULT_TOL if tol is None else tol
    h1, pairing = one_body_matrix(g)
    if pairing > 1e-12:
        raise NotApplicableError(f"Hamiltonian is not number-conserving (pairing {pairing:.3e})")
    n = g.n
    if psi0 is None:
        psi0 = np.zeros(n, dtype=np.complex128)
        psi0[0] = 1.0
    psi0 = np.asarray(psi0, dtype=np.complex128)
    psi0 = psi0 / np.linalg.norm(psi0)

    psi_t = lk.dense_expm(h1, t) @ psi0
    expected_rdm = np.outer(psi_t.conj(), psi_t)

    st0 = shadow_from_expectations(rdm_to_pair_expectations(np.outer(psi0.conj(), psi0)),
                                   PairIndex(n).labels)
    st_t = evolve_shadow(fermion_shadow_hamiltonian(g), st0, t, tol=tol)
    shadow_rdm = pair_expectations_to_rdm(st_t.expectations(), n)

    max_error = float(np.abs(shadow_rdm - expected_rdm).max())
    return {
        "n": n,
        "t": t,
        "max_error": max_error,
        "match": max_error <= 1e-8,
    }


def random_coupling(n: int, degree: int, rng: np.random.Generator, scale: float = 1.0) -> MajoranaCoupling:
    """Random canonical Gamma where every Majorana couples to at most `degree` others"""
    counts = np.zeros(2 * n, dtype=int)
    trips = []
    linked = set()
    for j in rng.permutation(2 * n):
        for _ in range(4 * degree):
            if counts[j] >= degree:
                break
            k = int(rng.integers(2 * n))
            key = (min(j, k), max(j, k))
            if k == j or counts[k] >= degree or key in linked:
                continue
            linked.add(key)
            counts[j] += 1
            counts[k] += 1
            value = 0.5j * scale * rng.uniform(-1.0, 1.0)
            trips.append((key[0], key[1], value))
            trips.append((key[1], key[0], -value))
    return MajoranaCoupling(n, lk.from_triplets((2 * n, 2 * n), trips))


def random_number_conserving(n: int, rng: np.random.Generator) -> MajoranaCoupling:
    """Random hopping alpha (Hermitian), no pairing"""
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return gamma_from_alpha_beta(0.5 * (g + g.conj().T), np.zeros((n, n)))
