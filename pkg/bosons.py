"""
Coupled harmonic oscillators.

H = sum_j P_j^2 / 2m_j + 1/2 sum_j k_jj Q_j^2 + 1/2 sum_{j<k} k_jk (Q_j - Q_k)^2
  = 1/2 sum_m O_m^2 with O = B^T Y, Y = (P_1..P_n, Q_1..Q_n).

The shadow Hamiltonian is H_S = i B^T Omega B. Verification runs against the
exact classical trajectory, whose first moments agree with the quantum ones.
"""
import json
import logging
from dataclasses import dataclass
from math import isqrt
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

import linalg_kernel as lk
from errors import InternalConsistencyError, ShapeError
from shadow_core import ShadowHamiltonian, ShadowState, shadow_from_expectations, shadow_overlap

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class OscillatorNetwork:
    """springs maps 0-based (j, k), j <= k, to kappa >= 0; (j, j) is the spring to the wall"""
    masses: np.ndarray
    springs: Mapping[Tuple[int, int], float]

    def __post_init__(self):
        masses = lk.check_finite(np.asarray(self.masses, dtype=float).ravel(), "masses")
        if masses.size == 0:
            raise ShapeError("network needs at least one oscillator")
        if (masses <= 0).any():
            raise ShapeError("masses must be positive")
        springs = {}
        for (j, k), kappa in self.springs.items():
            key = (min(j, k), max(j, k))
            if not (0 <= key[0] and key[1] < masses.size):
                raise ShapeError(f"spring ({j + 1}, {k + 1}) out of range")
            if key in springs:
                raise ShapeError(f"spring ({key[0] + 1}, {key[1] + 1}) given twice")
            kappa = float(kappa)
            if not np.isfinite(kappa) or kappa < 0:
                raise ShapeError(f"spring constant must be finite and nonnegative, got {kappa}")
            springs[key] = kappa
        object.__setattr__(self, 'masses', masses)
        object.__setattr__(self, 'springs', springs)

    @classmethod
    def from_triplets(cls, masses: Sequence[float], springs: Iterable[Sequence[float]]) -> 'OscillatorNetwork':
        """springs as [j, k, kappa] with 1-based oscillator indices"""
        table = {}
        for entry in springs:
            if len(entry) != 3:
                raise ShapeError(f"spring must be [j, k, kappa], got {entry!r}")
            table[(int(entry[0]) - 1, int(entry[1]) - 1)] = float(entry[2])
        return cls(np.asarray(masses, dtype=float), table)

    @property
    def n(self) -> int:
        return self.masses.size

    @property
    def degree(self) -> int:
        counts = np.zeros(self.n, dtype=int)
        for (j, k), kappa in self.springs.items():
            if kappa > 0 and j != k:
                counts[j] += 1
                counts[k] += 1
        return int(counts.max())

    def stiffness(self) -> np.ndarray:
        """K with potential 1/2 q^T K q"""
        k_mat = np.zeros((self.n, self.n))
        for (j, k), kappa in self.springs.items():
            if j == k:
                k_mat[j, j] += kappa
            else:
                k_mat[j, j] += kappa
                k_mat[k, k] += kappa
                k_mat[j, k] -= kappa
                k_mat[k, j] -= kappa
        return k_mat


@dataclass(frozen=True, eq=False)
class FactorizedCoupling:
    b: sp.csr_matrix
    labels: Tuple[str, ...]

    def __post_init__(self):
        b = sp.csr_matrix(self.b, dtype=float)
        if b.shape[1] != len(self.labels):
            raise ShapeError(f"B has {b.shape[1]} columns for {len(self.labels)} labels")
        if b.shape[0] % 2:
            raise ShapeError("B must have 2n rows")
        object.__setattr__(self, 'b', b)
        object.__setattr__(self, 'labels', tuple(self.labels))

    @property
    def n(self) -> int:
        return self.b.shape[0] // 2

    @property
    def size(self) -> int:
        return self.b.shape[1]


@dataclass(frozen=True)
class ClassicalPhasePoint:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = lk.check_finite(np.asarray(self.q, dtype=float).ravel(), "q")
        p = lk.check_finite(np.asarray(self.p, dtype=float).ravel(), "p")
        if q.shape != p.shape:
            raise ShapeError(f"q and p must have equal length, got {q.size} and {p.size}")
        object.__setattr__(self, 'q', q)
        object.__setattr__(self, 'p', p)

    def as_y(self) -> np.ndarray:
        """Y ordering: momenta first"""
        return np.concatenate([self.p, self.q])


def symplectic_form(n: int) -> sp.csr_matrix:
    """Omega = [[0, -I], [I, 0]], so [Y_a, Y_b] = i Omega_ab"""
    eye = sp.identity(n, format='csr')
    return sp.bmat([[None, -eye], [eye, None]], format='csr')


def gamma_matrix(net: OscillatorNetwork) -> np.ndarray:
    """Gamma of H = 1/2 Y^T Gamma Y, assembled straight from masses and springs"""
    n = net.n
    gamma = np.zeros((2 * n, 2 * n))
    gamma[:n, :n] = np.diag(1.0 / net.masses)
    gamma[n:, n:] = net.stiffness()
    return gamma


def build_B(net: OscillatorNetwork) -> FactorizedCoupling:
    """
    Columns: kinetic terms P_j / sqrt(m_j), then wall springs sqrt(k_jj) Q_j, then
    couplings sqrt(k_jk)(Q_j - Q_k) in lexicographic order; zero springs are skipped.
    """
    n = net.n
    rows, cols, vals, labels = [], [], [], []

    def column(entries, label):
        m = len(labels)
        for row, value in entries:
            rows.append(row)
            cols.append(m)
            vals.append(value)
        labels.append(label)

    for j in range(n):
        column([(j, 1.0 / np.sqrt(net.masses[j]))], f"kinetic {j + 1}")
    for (j, k), kappa in sorted(net.springs.items()):
        if j == k and kappa > 0:
            column([(n + j, np.sqrt(kappa))], f"diag {j + 1}")
    for (j, k), kappa in sorted(net.springs.items()):
        if j != k and kappa > 0:
            root = np.sqrt(kappa)
            column([(n + j, root), (n + k, -root)], f"spring ({j + 1},{k + 1})")

    b = sp.csr_matrix((vals, (rows, cols)), shape=(2 * n, len(labels)))
    defect = np.abs((b @ b.T).toarray() - gamma_matrix(net)).max()
    if defect > 1e-10 * max(1.0, np.abs(gamma_matrix(net)).max()):
        raise InternalConsistencyError(f"B B^T does not reproduce Gamma (defect {defect:.3e})")
    return FactorizedCoupling(b, tuple(labels))


def boson_shadow_hamiltonian(fc: FactorizedCoupling) -> ShadowHamiltonian:
    """H_S = i B^T Omega B: i times a real antisymmetric matrix"""
    hs = lk.canonical_sparse(1j * (fc.b.T @ symplectic_form(fc.n) @ fc.b))
    sh = ShadowHamiltonian(hs, 0.0, lk.hermitian_defect(hs), fc.labels,
                           {"n": fc.n, "M": fc.size})
    logger.info(json.dumps({
        "event": "boson_shadow_hamiltonian",
        "n": fc.n,
        "M": fc.size,
        "nnz": int(hs.nnz),
        "sparsity": sh.sparsity,
    }))
    return sh


def normal_modes(net: OscillatorNetwork) -> Tuple[np.ndarray, np.ndarray]:
    """
    (frequencies, mode shapes). Mode shapes are columns in q-space, M-orthonormal.
    Negative eigenvalues from rounding are clipped to zero frequency.
    """
    inv_root = 1.0 / np.sqrt(net.masses)
    dyn = inv_root[:, None] * net.stiffness() * inv_root[None, :]
    evals, evecs = np.linalg.eigh(dyn)
    return np.sqrt(np.clip(evals, 0.0, None)), inv_root[:, None] * evecs


def classical_oracle(net: OscillatorNetwork, x0: ClassicalPhasePoint, t: float) -> ClassicalPhasePoint:
    """Exact solution of dq/dt = p/m, dp/dt = -K q"""
    if x0.q.size != net.n:
        raise ShapeError(f"phase point has {x0.q.size} coordinates, network has {net.n}")
    root = np.sqrt(net.masses)
    inv_root = 1.0 / root
    dyn = inv_root[:, None] * net.stiffness() * inv_root[None, :]
    evals, evecs = np.linalg.eigh(dyn)
    omega = np.sqrt(np.clip(evals, 0.0, None))

    a = evecs.T @ (root * x0.q)
    b = evecs.T @ (inv_root * x0.p)
    cos, sin = np.cos(omega * t), np.sin(omega * t)
    sin_over = t * np.sinc(omega * t / np.pi)  # sin(wt)/w, -> t at w = 0
    a_t = a * cos + b * sin_over
    b_t = -a * omega * sin + b * cos
    return ClassicalPhasePoint(inv_root * (evecs @ a_t), root * (evecs @ b_t))


def term_values(net: OscillatorNetwork, x: ClassicalPhasePoint, fc: Optional[FactorizedCoupling] = None) -> np.ndarray:
    """Classical stand-ins for <O_m>"""
    fc = build_B(net) if fc is None else fc
    return fc.b.T @ x.as_y()


def classical_energy(net: OscillatorNetwork, x: ClassicalPhasePoint) -> float:
    return float(0.5 * np.sum(x.p ** 2 / net.masses) + 0.5 * x.q @ net.stiffness() @ x.q)


def energy_split(net: OscillatorNetwork, x: ClassicalPhasePoint) -> Dict[str, float]:
    """1/2 O_m^2 per term label, plus kinetic and potential totals"""
    fc = build_B(net)
    values = term_values(net, x, fc)
    split = {label: float(0.5 * v ** 2) for label, v in zip(fc.labels, values)}
    split["kinetic"] = sum(v for label, v in split.items() if label.startswith("kinetic"))
    split["potential"] = sum(v for label, v in split.items()
                             if label.startswith("diag") or label.startswith("spring"))
    return split


def shadow_from_classical(net: OscillatorNetwork, x: ClassicalPhasePoint) -> ShadowState:
    """Amplitudes proportional to the O_m values; A = 2E"""
    fc = build_B(net)
    return shadow_from_expectations(term_values(net, x, fc), fc.labels)


def quadratic_labels(labels: Sequence[str]) -> Tuple[str, ...]:
    return tuple(f"{a}*{b}" for a in labels for b in labels)


def quadratic_set_hamiltonian(sh: ShadowHamiltonian, cap: Optional[int] = None) -> ShadowHamiltonian:
    """H_S (x) 1 + 1 (x) H_S on the product set {O_m O_m'}"""
    hs2 = lk.kron_sum(sh.hs, cap=cap)
    return ShadowHamiltonian(hs2, sh.leakage, lk.hermitian_defect(hs2), quadratic_labels(sh.labels),
                             {"M": sh.dim, "M2": sh.dim ** 2})


def quadratic_shadow_from_classical(net: OscillatorNetwork, x: ClassicalPhasePoint) -> ShadowState:
    """Semiclassical product initialization <O_m O_m'> ~ O_m O_m'; A = (2E)^2"""
    fc = build_B(net)
    values = term_values(net, x, fc)
    return shadow_from_expectations(np.kron(values, values), quadratic_labels(fc.labels))


def subset_energy_quadratic(st2: ShadowState, subset: Iterable[int], shots: Optional[int] = None,
                            rng: Optional[np.random.Generator] = None) -> float:
    """<H_I> = 1/2 sqrt(A |I|) <psi_I|rho;S>, psi_I uniform over the diagonal |m, m>; I is 1-based"""
    size = isqrt(st2.size)
    if size * size != st2.size:
        raise ShapeError(f"quadratic shadow length {st2.size} is not a square")
    chosen = sorted({int(m) - 1 for m in subset})
    if not chosen:
        raise ShapeError("subset I must not be empty")
    if chosen[0] < 0 or chosen[-1] >= size:
        raise ShapeError(f"subset index out of range 1..{size}")
    psi_i = np.zeros(st2.size, dtype=np.complex128)
    for m in chosen:
        psi_i[m * size + m] = 1.0
    psi_i /= np.sqrt(len(chosen))
    overlap = shadow_overlap(st2, psi_i, shots=shots, rng=rng)
    return float(0.5 * np.sqrt(st2.norm_a * len(chosen)) * (complex(st2.global_phase) * overlap).real)


def random_network(n: int, rng: np.random.Generator, coupling_probability: float = 0.6) -> OscillatorNetwork:
    """Random masses in [0.5, 2], wall springs on every site, random pair springs"""
    masses = rng.uniform(0.5, 2.0, size=n)
    springs = {(j, j): float(rng.uniform(0.2, 2.0)) for j in range(n)}
    for j in range(n):
        for k in range(j + 1, n):
            if rng.random() < coupling_probability:
                springs[(j, k)] = float(rng.uniform(0.1, 1.5))
    return OscillatorNetwork(masses, springs)


def random_phase_point(n: int, rng: np.random.Generator) -> ClassicalPhasePoint:
    return ClassicalPhasePoint(rng.normal(size=n), rng.normal(size=n))
