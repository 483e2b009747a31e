"""Dense symmetric/Hermitian linear algebra kernels.

Everything here is a pure function on immutable inputs.  Real symmetric
eigendecompositions go through the selected kernel backend (compiled Jacobi
for small blocks, LAPACK otherwise); complex Hermitian problems are reduced
to real ones via the standard doubling embedding
``[[Re A, -Im A], [Im A, Re A]]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import eigh_kernel
from .errors import GramMismatch, InvalidInput, NotPsd


def _as_matrix(a, dtype=None):
    m = np.asarray(getattr(a, "entries", a), dtype=dtype)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInput("expected a square matrix, got shape %r" % (m.shape,))
    return m


@dataclass(frozen=True)
class RealSymMatrix:
    """Dense real symmetric matrix; symmetrized exactly on construction."""

    entries: np.ndarray

    def __post_init__(self):
        m = _as_matrix(self.entries, dtype=np.float64)
        object.__setattr__(self, "entries", 0.5 * (m + m.T))

    @property
    def dim(self):
        return self.entries.shape[0]


@dataclass(frozen=True)
class ComplexHermMatrix:
    """Dense complex Hermitian matrix; Hermitized exactly on construction."""

    entries: np.ndarray

    def __post_init__(self):
        m = _as_matrix(self.entries, dtype=np.complex128)
        object.__setattr__(self, "entries", 0.5 * (m + m.conj().T))

    @property
    def dim(self):
        return self.entries.shape[0]


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues ascending; eigenvectors as orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T


def eig_sym(a) -> EigenDecomposition:
    """Full eigendecomposition of a real symmetric matrix."""
    m = _as_matrix(a, dtype=np.float64)
    if not np.all(np.isfinite(m)):
        raise InvalidInput("matrix has non-finite entries")
    m = 0.5 * (m + m.T)
    w, v = eigh_kernel(m)
    return EigenDecomposition(np.asarray(w), np.asarray(v))


def eigvals_herm(a) -> np.ndarray:
    """Eigenvalues (ascending) of a complex Hermitian matrix.

    Solved through the real doubling embedding; each eigenvalue of A appears
    twice in the embedding, so we keep every other one.
    """
    m = _as_matrix(a, dtype=np.complex128)
    w = eig_sym(herm_to_real(m)).eigenvalues
    return w[::2]


def is_psd(a, tol: float) -> bool:
    """PSD test: lambda_min(A) >= -tol * max(1, max |A_ij|).

    Accepts real symmetric or complex Hermitian input.
    """
    if tol < 0:
        raise InvalidInput("tol must be nonnegative")
    m = np.asarray(getattr(a, "entries", a))
    if np.iscomplexobj(m):
        lam_min = eigvals_herm(m)[0]
    else:
        lam_min = eig_sym(m).eigenvalues[0]
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 0.0)
    return bool(lam_min >= -tol * scale)


def psd_project(a) -> np.ndarray:
    """Frobenius-nearest PSD matrix: clip negative eigenvalues at zero."""
    dec = eig_sym(a)
    w = np.maximum(dec.eigenvalues, 0.0)
    return (dec.eigenvectors * w) @ dec.eigenvectors.T


def herm_to_real(a) -> np.ndarray:
    """Doubling embedding [[Re A, -Im A], [Im A, Re A]] of a Hermitian A.

    The result is symmetric and carries the eigenvalues of A with doubled
    multiplicity.
    """
    m = _as_matrix(a, dtype=np.complex128)
    re, im = m.real, m.imag
    return np.block([[re, -im], [im, re]])


def real_pair_to_herm(v) -> np.ndarray:
    """Inverse-direction map U = (A+C)/2 + i(B^T - B)/2 for V = [[A,B],[B^T,C]].

    If V is PSD then U is PSD; composed with herm_to_real it is the identity.
    """
    m = _as_matrix(v, dtype=np.float64)
    if m.shape[0] % 2 != 0:
        raise InvalidInput("dimension must be even, got %d" % m.shape[0])
    n = m.shape[0] // 2
    a, b, c = m[:n, :n], m[:n, n:], m[n:, n:]
    return 0.5 * (a + c) + 0.5j * (b.T - b)


def gram_factor(a, rows: int) -> np.ndarray:
    """Factor a PSD matrix as A = F^T F with F having exactly `rows` rows.

    Eigenvalues below -1e-8 * max(1, ||A||_F) raise NotPsd; small negative
    ones are clipped.  Rows beyond the rank are zero.
    """
    m = _as_matrix(a, dtype=np.float64)
    dec = eig_sym(m)
    scale = max(1.0, float(np.linalg.norm(m)))
    if dec.eigenvalues[0] < -1e-8 * scale:
        raise NotPsd("min eigenvalue %.3e below PSD tolerance" % dec.eigenvalues[0])
    w = np.maximum(dec.eigenvalues, 0.0)[::-1]
    v = dec.eigenvectors[:, ::-1]
    n = m.shape[0]
    f_full = np.sqrt(w)[:, None] * v.T
    if rows >= n:
        f = np.zeros((rows, n))
        f[:n] = f_full
        return f
    if np.any(w[rows:] > 1e-12 * scale):
        raise InvalidInput("rows=%d is below the numerical rank" % rows)
    return f_full[:rows]


def orthogonal_extension(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Given A (p x n), B (q x n), p <= q, with A^T A = B^T B, return U (q x p)
    with U^T U = I and B = U A.

    Computed as the orthogonal-Procrustes solution: the polar factor of
    B A^T minimizes ||U A - B||_F over matrices with orthonormal columns,
    and the minimum is zero exactly when the Gram matrices agree.  Unlike
    matching the singular subspaces directly, the polar factor does not
    amplify error in directions with near-zero singular values.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    p, n = a.shape
    q = b.shape[0]
    if b.shape[1] != n or p > q:
        raise InvalidInput("need A (p x n), B (q x n) with p <= q")
    g = a.T @ a
    gb = b.T @ b
    if np.linalg.norm(g - gb) > 1e-8 * (1.0 + np.linalg.norm(g)):
        raise GramMismatch("A^T A != B^T B beyond tolerance")
    pm, _, qm = np.linalg.svd(b @ a.T, full_matrices=False)
    return pm @ qm
