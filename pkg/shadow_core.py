"""
Shadow Hamiltonian construction and shadow-state evolution.

A shadow state stores the expectations <O_m> of an operator set S as a unit
vector plus the normalization A = sum_m |<O_m>|^2. If H and S satisfy
[H, O_m] = -sum_m' h_mm' O_m', the vector evolves under the M x M matrix H_S.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

import config
import linalg_kernel as lk
from errors import (ConfigurationError, DegenerateStateError, InternalConsistencyError,
                    InvarianceViolationError, NonHermitianError, ShapeError)

logger = logging.getLogger(__name__)

# Expectation vectors with A below this are treated as all-zero
DEGENERATE_FLOOR = 1e-24
# Relative size below which projected entries count as numerical noise
CHOP = 1e-13
# Largest norm drift ShadowState accepts before renormalizing to unit norm
NORM_DRIFT = 1e-8


def shot_rng(seed: int) -> np.random.Generator:
    """Counter-based generator used by every shot simulation"""
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True, eq=False)
class StructureTable:
    """Structure constants [O_j, O_k] = sum_l f_jkl O_l, stored sparsely per (j, k)"""
    size: int
    entries: Dict[Tuple[int, int], Tuple[Tuple[int, float], ...]]
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        for (j, k), row in self.entries.items():
            if not (0 <= j < self.size and 0 <= k < self.size):
                raise ShapeError(f"structure index ({j}, {k}) out of range for M = {self.size}")
            mirror = dict(self.entries.get((k, j), ()))
            for l, value in row:
                if abs(mirror.get(l, 0.0) + value) > 1e-10 * max(1.0, abs(value)):
                    raise InternalConsistencyError(f"structure constants not antisymmetric at ({j}, {k}, {l})")

    def bracket(self, j: int, k: int) -> Tuple[Tuple[int, float], ...]:
        return self.entries.get((j, k), ())

    @property
    def sparsity(self) -> int:
        """d': most nonzero f_jkl for any fixed (j, k)"""
        return max((len(row) for row in self.entries.values()), default=0)

    @property
    def max_abs(self) -> float:
        return max((abs(v) for row in self.entries.values() for _, v in row), default=0.0)


@dataclass(frozen=True, eq=False)
class OperatorSet:
    """
    Ordered, labeled operator set S.

    Either dense matrices O_m (shape (M, d, d)) or an abstract family described by a
    StructureTable. norm_constant is the lambda in tr(O_m^dagger O_m') = lambda delta_mm'.
    """
    labels: Tuple[str, ...]
    matrices: Optional[np.ndarray] = None
    norm_constant: Optional[float] = None
    structure: Optional[StructureTable] = None

    def __post_init__(self):
        labels = tuple(str(label) for label in self.labels)
        object.__setattr__(self, 'labels', labels)
        if len(labels) == 0:
            raise ShapeError("operator set must not be empty")
        if len(set(labels)) != len(labels):
            raise ShapeError("operator labels must be unique")
        if self.matrices is not None:
            mats = np.asarray(self.matrices, dtype=np.complex128)
            if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
                raise ShapeError(f"operators must share one square shape, got {mats.shape}")
            if mats.shape[0] != len(labels):
                raise ShapeError(f"{len(labels)} labels for {mats.shape[0]} operators")
            object.__setattr__(self, 'matrices', mats)
            if self.norm_constant is not None:
                self._check_orthogonal(float(self.norm_constant))
        if self.structure is not None and self.structure.size != len(labels):
            raise ShapeError("structure table size does not match the label count")

    @classmethod
    def from_matrices(cls, labels: Sequence[str], matrices, norm_constant="auto", tol: float = 1e-10):
        """Build a dense set; norm_constant='auto' detects lambda (None if the set is not orthogonal)"""
        mats = np.asarray(matrices, dtype=np.complex128)
        if norm_constant == "auto":
            norm_constant = orthogonality_constant(mats, tol)
        return cls(tuple(labels), mats, norm_constant)

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> Optional[int]:
        return None if self.matrices is None else self.matrices.shape[1]

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def _check_orthogonal(self, lam: float, tol: float = 1e-10):
        if lam <= 0:
            raise ConfigurationError("orthogonality constant must be positive")
        gram = _gram(self.matrices)
        if np.abs(gram - lam * np.eye(self.size)).max() > tol * max(1.0, lam):
            raise ConfigurationError(f"operators are not orthogonal with constant {lam}")


def _gram(mats: np.ndarray) -> np.ndarray:
    flat = mats.reshape(mats.shape[0], -1)
    return flat.conj() @ flat.T


def orthogonality_constant(mats: np.ndarray, tol: float = 1e-10) -> Optional[float]:
    """lambda if tr(O_m^dagger O_m') = lambda delta_mm', otherwise None"""
    gram = _gram(np.asarray(mats, dtype=np.complex128))
    lam = float(gram[0, 0].real)
    if lam <= 0:
        return None
    if np.abs(gram - lam * np.eye(gram.shape[0])).max() > tol * max(1.0, lam):
        return None
    return lam


@dataclass(frozen=True, eq=False)
class ShadowState:
    """
    Unit amplitude vector plus A.

    Physical expectations are global_phase * sqrt(A) * amplitudes; states whose
    amplitudes are stored with a conventional phase stripped keep it here.
    """
    amplitudes: np.ndarray
    norm_a: float
    labels: Tuple[str, ...] = ()
    global_phase: complex = 1.0

    def __post_init__(self):
        amps = lk.check_finite(np.asarray(self.amplitudes, dtype=np.complex128).ravel(), "amplitudes")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_DRIFT:
            raise ShapeError(f"shadow amplitudes must have unit norm, got {norm:.3e}")
        object.__setattr__(self, 'amplitudes', amps / norm)
        object.__setattr__(self, 'labels', tuple(self.labels))
        if not self.norm_a > 0:
            raise DegenerateStateError("normalization constant A must be positive")
        if self.labels and len(self.labels) != amps.size:
            raise ShapeError(f"{len(self.labels)} labels for {amps.size} amplitudes")
        if abs(abs(complex(self.global_phase)) - 1.0) > 1e-12:
            raise ShapeError("global_phase must have modulus 1")

    @property
    def size(self) -> int:
        return self.amplitudes.size

    def expectations(self) -> np.ndarray:
        """Recover <O_m>"""
        return complex(self.global_phase) * np.sqrt(self.norm_a) * self.amplitudes

    def with_amplitudes(self, amplitudes: np.ndarray) -> 'ShadowState':
        return ShadowState(amplitudes, self.norm_a, self.labels, self.global_phase)


@dataclass(frozen=True, eq=False)
class ShadowHamiltonian:
    hs: sp.csr_matrix
    leakage: float = 0.0
    hermitian_defect: float = 0.0
    labels: Tuple[str, ...] = ()
    bounds: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        hs = lk.canonical_sparse(self.hs)
        if hs.shape[0] != hs.shape[1]:
            raise ShapeError(f"H_S must be square, got {hs.shape}")
        object.__setattr__(self, 'hs', hs)
        object.__setattr__(self, 'labels', tuple(self.labels))
        if self.leakage < 0 or self.hermitian_defect < 0:
            raise ShapeError("leakage and hermitian defect are nonnegative")

    @property
    def dim(self) -> int:
        return self.hs.shape[0]

    @property
    def sparsity(self) -> int:
        return lk.row_sparsity(self.hs)

    @property
    def max_norm(self) -> float:
        return lk.max_norm(self.hs)

    def report(self) -> Dict:
        out = {
            "dim": self.dim,
            "leakage": self.leakage,
            "hermitian_defect": self.hermitian_defect,
            "sparsity": self.sparsity,
            "max_norm": self.max_norm,
        }
        out.update(self.bounds)
        return out


def _chop(values: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.abs(values).max()) if values.size else 0.0)
    out = values.copy()
    out[np.abs(out) <= CHOP * scale] = 0.0
    return out


def build_shadow_hamiltonian_dense(h: np.ndarray, s: OperatorSet, tol: Optional[float] = None) -> ShadowHamiltonian:
    """
    h_mm' = -(1/lambda) tr(O_m'^dagger [H, O_m]) by trace projection.

    leakage is the largest fraction (Frobenius norm) of any [H, O_m] lying outside span(S).
    A leakage above tol is logged, not raised; the caller decides.
    """
    tol = config.DEFAULT_TOL if tol is None else tol
    if s.matrices is None:
        raise ConfigurationError("dense pathway needs an operator set with matrices")
    if s.norm_constant is None:
        raise ConfigurationError("dense pathway needs an orthogonal operator set (lambda unknown)")
    h = np.asarray(h, dtype=np.complex128)
    if h.shape != (s.dim, s.dim):
        raise ShapeError(f"Hamiltonian shape {h.shape} does not match operator dimension {s.dim}")

    mats = s.matrices
    flat = mats.reshape(s.size, -1)
    comms = (np.einsum('ab,mbc->mac', h, mats) - np.einsum('mab,bc->mac', mats, h)).reshape(s.size, -1)
    coeffs = _chop(-(comms @ flat.conj().T) / s.norm_constant)
    residual = comms + coeffs @ flat

    comm_norms = np.linalg.norm(comms, axis=1)
    res_norms = np.linalg.norm(residual, axis=1)
    floor = 1e-12 * max(1.0, float(comm_norms.max()))
    ratios = np.where(comm_norms > floor, res_norms / np.maximum(comm_norms, floor), 0.0)
    leakage = float(ratios.max())

    hs = lk.canonical_sparse(coeffs)
    sh = ShadowHamiltonian(hs, leakage, lk.hermitian_defect(hs), s.labels)
    logger.info(json.dumps({
        "event": "shadow_hamiltonian_dense",
        "M": s.size,
        "hilbert_dim": s.dim,
        "leakage": leakage,
        "hermitian_defect": sh.hermitian_defect,
    }))
    if leakage > tol:
        logger.warning(json.dumps({"event": "leakage_flagged", "leakage": leakage, "tol": tol}))
    return sh


def structure_table_from_operators(s: OperatorSet, tol: Optional[float] = None) -> StructureTable:
    """f_jkl = tr(O_l^dagger [O_j, O_k]) / lambda for an orthogonal anti-Hermitian basis"""
    tol = config.DEFAULT_TOL if tol is None else tol
    if s.matrices is None or s.norm_constant is None:
        raise ConfigurationError("structure constants need an orthogonal dense operator set")
    mats = s.matrices
    flat = mats.reshape(s.size, -1)
    entries = {}
    for j in range(s.size):
        comms = (np.einsum('ab,mbc->mac', mats[j], mats) - np.einsum('mab,bc->mac', mats, mats[j]))
        comms = comms.reshape(s.size, -1)
        coeffs = (comms @ flat.conj().T) / s.norm_constant
        scale = max(1.0, float(np.abs(coeffs).max()))
        if np.abs(coeffs.imag).max() > tol * scale:
            raise ConfigurationError("structure constants are not real; use an anti-Hermitian basis")
        residual = comms - coeffs @ flat
        if np.linalg.norm(residual, axis=1).max() > tol * scale * np.sqrt(s.norm_constant):
            raise InvarianceViolationError("operator set is not closed under commutators")
        real = coeffs.real
        for k in range(s.size):
            row = tuple((l, float(real[k, l])) for l in np.flatnonzero(np.abs(real[k]) > CHOP * scale))
            if row:
                entries[(j, k)] = row
    return StructureTable(s.size, entries, s.labels)


def sparsity_conditions(f: StructureTable, alpha: Sequence[float]) -> Dict[str, float]:
    """Condition (i) d', condition (ii) p, and the derived H_S bounds"""
    alpha = np.asarray(alpha, dtype=float)
    active = set(np.flatnonzero(alpha))
    per_operator = {}
    for (m, k) in f.entries:
        if m in active:
            per_operator[k] = per_operator.get(k, 0) + 1
    p = max(per_operator.values(), default=0)
    d_prime = f.sparsity
    return {
        "d_prime": d_prime,
        "p": p,
        "sparsity_bound": p * d_prime,
        "max_norm_bound": p * (float(np.abs(alpha).max()) if alpha.size else 0.0) * f.max_abs,
    }


def build_from_structure_constants(f: StructureTable, alpha: Sequence[float]) -> ShadowHamiltonian:
    """H = i sum_m alpha_m O_m gives h_kl = -i sum_m alpha_m f_mkl"""
    alpha = lk.check_finite(np.asarray(alpha, dtype=float), "alpha")
    if alpha.size != f.size:
        raise ShapeError(f"alpha has length {alpha.size}, expected {f.size}")
    entries = []
    for (m, k), row in f.entries.items():
        if alpha[m] == 0:
            continue
        for l, value in row:
            entries.append((k, l, -1j * alpha[m] * value))
    hs = lk.from_triplets((f.size, f.size), entries)

    bounds = sparsity_conditions(f, alpha)
    sparsity = lk.row_sparsity(hs)
    if sparsity > bounds["sparsity_bound"]:
        raise InternalConsistencyError(f"H_S sparsity {sparsity} exceeds p*d' = {bounds['sparsity_bound']}")
    if lk.max_norm(hs) > bounds["max_norm_bound"] * (1 + 1e-12) + 1e-15:
        raise InternalConsistencyError("H_S max-norm exceeds p*max|alpha|*max|f|")
    return ShadowHamiltonian(hs, 0.0, lk.hermitian_defect(hs), f.labels, bounds)


def evolve_shadow(sh: ShadowHamiltonian, st: ShadowState, t: float, tol: Optional[float] = None) -> ShadowState:
    """amplitudes <- exp(-i t H_S) amplitudes; A is unchanged"""
    tol = config.DEFAULT_TOL if tol is None else tol
    if sh.hermitian_defect > lk.hermitian_threshold(sh.hs, tol):
        raise NonHermitianError(
            f"H_S is not Hermitian (defect {sh.hermitian_defect:.3e}, leakage {sh.leakage:.3e}); "
            "unitary shadow evolution is undefined for this operator set",
            defect=sh.hermitian_defect)
    if sh.dim != st.size:
        raise ShapeError(f"H_S has dimension {sh.dim} but the shadow state has {st.size} amplitudes")
    amps = lk.expm_action(sh.hs, st.amplitudes, t, tol=tol, check_hermitian=False)
    return st.with_amplitudes(amps)


def shadow_from_expectations(values: Sequence[complex], labels: Sequence[str] = ()) -> ShadowState:
    """Normalize an expectation vector into a shadow state"""
    values = lk.check_finite(np.asarray(values, dtype=np.complex128).ravel(), "expectations")
    norm_a = float(np.vdot(values, values).real)
    if norm_a <= DEGENERATE_FLOOR:
        raise DegenerateStateError("all expectations vanish; the shadow state is undefined")
    return ShadowState(values / np.sqrt(norm_a), norm_a, tuple(labels))


def lowest_weight_shadow(eigenvalues: Sequence[complex], labels: Sequence[str],
                         diagonal_slots: Optional[Sequence[int]] = None) -> ShadowState:
    """
    Shadow of a lowest-weight state: amplitudes proportional to the (purely imaginary)
    eigenvalues of the diagonal operators, zero elsewhere. The common factor i is
    moved into global_phase so the stored amplitudes are real.
    """
    e = np.asarray(eigenvalues, dtype=np.complex128).ravel()
    labels = tuple(labels)
    slots = list(range(e.size)) if diagonal_slots is None else list(diagonal_slots)
    if len(slots) != e.size:
        raise ShapeError("one diagonal slot per eigenvalue is required")
    if np.abs(e.real).max(initial=0.0) > 1e-12 * max(1.0, float(np.abs(e).max(initial=0.0))):
        raise ConfigurationError("lowest-weight eigenvalues must be purely imaginary")
    norm_a = float(np.sum(np.abs(e) ** 2))
    if norm_a <= DEGENERATE_FLOOR:
        raise DegenerateStateError("all lowest-weight eigenvalues are zero")
    values = np.zeros(len(labels), dtype=np.complex128)
    values[slots] = e
    return ShadowState((values / 1j).real / np.sqrt(norm_a), norm_a, labels, 1j)


def shadow_overlap(a: ShadowState, b: np.ndarray, shots: Optional[int] = None,
                   rng: Optional[np.random.Generator] = None) -> complex:
    """
    <b|a>. With shots, the real and imaginary parts are each estimated from a
    simulated Hadamard test with `shots` samples (P(0) = (1 + Re or Im) / 2).
    """
    b = np.asarray(b, dtype=np.complex128).ravel()
    if b.size != a.size:
        raise ShapeError(f"overlap of lengths {a.size} and {b.size}")
    if abs(np.linalg.norm(b) - 1.0) > 1e-8:
        raise ShapeError("reference vector must be a unit vector")
    exact = lk.inner(b, a.amplitudes)
    if shots is None:
        return exact
    if isinstance(shots, bool) or int(shots) != shots or shots < 1:
        raise ShapeError(f"shots must be a positive integer, got {shots!r}")
    shots = int(shots)
    rng = shot_rng(config.DEFAULT_SEED) if rng is None else rng
    p_re = min(max(0.5 * (1 + exact.real), 0.0), 1.0)
    p_im = min(max(0.5 * (1 + exact.imag), 0.0), 1.0)
    k_re = rng.binomial(shots, p_re)
    k_im = rng.binomial(shots, p_im)
    return complex(2 * k_re / shots - 1, 2 * k_im / shots - 1)
