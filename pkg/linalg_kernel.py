"""
Complex dense/sparse linear algebra shared by every simulator module.

Sparse matrices are scipy CSR matrices kept in canonical form (duplicates summed,
explicit zeros dropped, column indices sorted). Vectors are 1-D complex128 arrays.
"""
import json
import logging
import time
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp

import config
from errors import CapacityError, InternalConsistencyError, NonHermitianError, ShapeError

logger = logging.getLogger(__name__)

Matrix = Union[np.ndarray, sp.spmatrix]

# Lanczos breakdown threshold relative to the operator scale
_BREAKDOWN = 1e-13


def canonical_sparse(m: Matrix, shape: Optional[Tuple[int, int]] = None) -> sp.csr_matrix:
    """Return m as a canonical complex CSR matrix"""
    out = sp.csr_matrix(m, shape=shape, dtype=np.complex128)
    out.sum_duplicates()
    out.eliminate_zeros()
    out.sort_indices()
    return out


def from_triplets(shape: Tuple[int, int], triplets: Sequence[Tuple[int, int, complex]]) -> sp.csr_matrix:
    """Build a canonical sparse matrix from (row, col, value) triplets; repeated entries add up"""
    rows, cols = shape
    if not triplets:
        return sp.csr_matrix(shape, dtype=np.complex128)
    r, c, v = zip(*triplets)
    r = np.asarray(r, dtype=np.int64)
    c = np.asarray(c, dtype=np.int64)
    if r.min() < 0 or c.min() < 0 or r.max() >= rows or c.max() >= cols:
        raise ShapeError(f"triplet index out of range for shape {shape}")
    return canonical_sparse(sp.coo_matrix((np.asarray(v, dtype=np.complex128), (r, c)), shape=shape))


def triplets(m: Matrix) -> List[Tuple[int, int, complex]]:
    """Sorted, deduplicated (row, col, value) list without stored zeros"""
    coo = canonical_sparse(m).tocoo()
    order = np.lexsort((coo.col, coo.row))
    return [(int(coo.row[k]), int(coo.col[k]), complex(coo.data[k])) for k in order]


def complex_pair(z: complex) -> List[float]:
    """Serialize a complex number as [re, im]"""
    z = complex(z)
    return [z.real, z.imag]


def pair_complex(pair: Sequence[float]) -> complex:
    if len(pair) != 2:
        raise ShapeError(f"complex value must be [re, im], got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def check_finite(v: np.ndarray, what: str = "vector") -> np.ndarray:
    arr = np.asarray(v)
    if not np.all(np.isfinite(arr)):
        raise ShapeError(f"{what} contains NaN or Inf")
    return arr


def _require_square(m: Matrix) -> int:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")
    return m.shape[0]


def hermitian_defect(m: Matrix) -> float:
    """Max-norm of (M - M^dagger); 0 means exactly Hermitian"""
    _require_square(m)
    if sp.issparse(m):
        diff = sp.csr_matrix(m - m.conj().T)
        return float(np.abs(diff.data).max()) if diff.nnz else 0.0
    diff = np.asarray(m) - np.asarray(m).conj().T
    return float(np.abs(diff).max()) if diff.size else 0.0


def max_norm(m: Matrix) -> float:
    """Largest entry magnitude"""
    if sp.issparse(m):
        return float(np.abs(m.data).max()) if m.nnz else 0.0
    return float(np.abs(m).max()) if np.size(m) else 0.0


def hermitian_threshold(m: Matrix, tol: float) -> float:
    """Largest acceptable Hermitian defect: tol relative to the entry scale, never below tol"""
    return tol * max(1.0, max_norm(m))


def row_sparsity(m: Matrix) -> int:
    """Maximum number of nonzeros in any row"""
    csr = canonical_sparse(m)
    if csr.shape[0] == 0:
        return 0
    return int(np.diff(csr.indptr).max())


def norm2(v: np.ndarray) -> float:
    return float(np.linalg.norm(v))


def inner(u: np.ndarray, v: np.ndarray) -> complex:
    """<u|v>, conjugate-linear in u"""
    u = np.asarray(u).ravel()
    v = np.asarray(v).ravel()
    if u.shape != v.shape:
        raise ShapeError(f"inner product of mismatched lengths {u.size} and {v.size}")
    return complex(np.vdot(u, v))


def kron(a: Matrix, b: Matrix) -> Matrix:
    """Kronecker product; sparse if either factor is sparse"""
    if sp.issparse(a) or sp.issparse(b):
        return canonical_sparse(sp.kron(a, b, format='csr'))
    return np.kron(a, b)


def kron_sum(h: Matrix, cap: Optional[int] = None) -> sp.csr_matrix:
    """h (x) 1 + 1 (x) h as a sparse matrix"""
    dim = _require_square(h)
    cap = config.MAX_SHADOW_DIM if cap is None else cap
    if dim * dim > cap:
        raise CapacityError(f"Kronecker-sum dimension {dim * dim} exceeds cap {cap}")
    eye = sp.identity(dim, dtype=np.complex128, format='csr')
    hs = canonical_sparse(h)
    return canonical_sparse(sp.kron(hs, eye, format='csr') + sp.kron(eye, hs, format='csr'))


def dense_expm(h: np.ndarray, t: float, cutoff: Optional[int] = None) -> np.ndarray:
    """exp(-i t h) for a Hermitian h via full eigendecomposition"""
    dim = _require_square(h)
    cutoff = config.DENSE_CUTOFF if cutoff is None else cutoff
    if dim > cutoff:
        raise CapacityError(f"dense dimension {dim} exceeds cutoff {cutoff}")
    h = h.toarray() if sp.issparse(h) else np.asarray(h, dtype=np.complex128)
    scale = max(1.0, max_norm(h))
    defect = hermitian_defect(h)
    if defect > 1e-8 * scale:
        raise NonHermitianError(f"dense_expm needs a Hermitian generator (defect {defect:.3e})", defect=defect)
    evals, evecs = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (evecs * np.exp(-1j * t * evals)) @ evecs.conj().T


def _lanczos(h: Matrix, v: np.ndarray, m: int, scale: float):
    """
    Lanczos with full reorthogonalization.
    Returns (basis rows, diagonal, off-diagonal, next beta, breakdown flag).
    """
    n = v.size
    m = min(m, n)
    basis = np.zeros((m, n), dtype=np.complex128)
    alpha = np.zeros(m)
    beta = np.zeros(m)
    q = v / np.linalg.norm(v)
    for k in range(m):
        basis[k] = q
        w = h @ q
        alpha[k] = np.vdot(q, w).real
        w = w - alpha[k] * q
        if k > 0:
            w = w - beta[k - 1] * basis[k - 1]
        w = w - basis[:k + 1].T @ (basis[:k + 1].conj() @ w)
        beta[k] = np.linalg.norm(w)
        if beta[k] <= _BREAKDOWN * scale:
            return basis[:k + 1], alpha[:k + 1], beta[:k], 0.0, True
        q = w / beta[k]
    return basis, alpha, beta[:m - 1], float(beta[m - 1]), m == n


def _tridiagonal_eigh(alpha: np.ndarray, offdiag: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    try:
        return scipy.linalg.eigh_tridiagonal(alpha, offdiag, lapack_driver='stev')
    except np.linalg.LinAlgError:
        # the tridiagonal drivers can stall on badly scaled Lanczos matrices; dense eigh does not
        logger.warning(json.dumps({"event": "tridiagonal_fallback", "size": int(alpha.size)}))
        return scipy.linalg.eigh(np.diag(alpha) + np.diag(offdiag, 1) + np.diag(offdiag, -1))


def _tridiagonal_phase(alpha: np.ndarray, offdiag: np.ndarray, tau: float) -> np.ndarray:
    """exp(-i tau T) e_1 for the Lanczos tridiagonal T"""
    if alpha.size == 1:
        return np.array([np.exp(-1j * tau * alpha[0])])
    evals, evecs = _tridiagonal_eigh(alpha, offdiag)
    return evecs @ (np.exp(-1j * tau * evals) * evecs[0, :])


def expm_action(h: Matrix, v: np.ndarray, t: float, tol: Optional[float] = None,
                krylov_dim: Optional[int] = None, check_hermitian: bool = True) -> np.ndarray:
    """
    w = exp(-i t h) v for a Hermitian (sparse or dense) h.

    Krylov/Lanczos projection with an adaptive time step: each step builds one
    Lanczos basis at the current vector and halves the step until the a-posteriori
    error estimate fits the step's share of tol.
    """
    tol = config.DEFAULT_TOL if tol is None else tol
    krylov_dim = config.KRYLOV_DIM if krylov_dim is None else krylov_dim
    dim = _require_square(h)
    v = check_finite(np.asarray(v, dtype=np.complex128).ravel())
    if v.size != dim:
        raise ShapeError(f"vector length {v.size} does not match generator dimension {dim}")
    if check_hermitian:
        defect = hermitian_defect(h)
        if defect > hermitian_threshold(h, tol):
            raise NonHermitianError(f"generator is not Hermitian (defect {defect:.3e}, tol {tol:.1e} relative to max-norm)",
                                    defect=defect)

    beta0 = np.linalg.norm(v)
    if t == 0 or beta0 == 0 or max_norm(h) == 0:
        return v.copy()

    started = time.perf_counter()
    scale = max(max_norm(h), 1e-300)
    w = v.copy()
    remaining = abs(t)
    direction = 1.0 if t > 0 else -1.0
    steps = 0
    while remaining > 0:
        basis, alpha, offdiag, beta_next, exact = _lanczos(h, w, krylov_dim, scale)
        tau = remaining
        while True:
            y = _tridiagonal_phase(alpha, offdiag, direction * tau)
            err = 0.0 if exact else beta_next * abs(y[-1])
            if err <= tol * tau / abs(t):
                break
            tau *= 0.5
            if tau < abs(t) * 1e-14:
                raise InternalConsistencyError("Krylov step size underflow in expm_action")
        w = np.linalg.norm(w) * (basis.T @ y)
        remaining = 0.0 if tau >= remaining else remaining - tau
        steps += 1

    logger.debug(json.dumps({
        "event": "expm_action",
        "dim": dim,
        "t": t,
        "steps": steps,
        "seconds": round(time.perf_counter() - started, 6),
    }))
    return w


def expm_action_columns(h: Matrix, block: np.ndarray, t: float, tol: Optional[float] = None) -> np.ndarray:
    """Apply exp(-i t h) to every column of block"""
    block = np.asarray(block, dtype=np.complex128)
    if t == 0:
        return block.copy()
    out = np.empty_like(block)
    for col in range(block.shape[1]):
        out[:, col] = expm_action(h, block[:, col], t, tol=tol, check_hermitian=(col == 0))
    return out
