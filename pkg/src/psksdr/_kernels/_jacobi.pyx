# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cyclic Jacobi eigendecomposition for dense symmetric matrices.

This is the compiled hot kernel behind the PSD-cone projections.  For the
small matrix blocks that dominate the operator-splitting solver's inner loop
(dimension a few dozen), a tight Jacobi sweep beats the fixed per-call
overhead of going through LAPACK from Python.  See benchmarks/bench_kernels.py.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, hypot, sqrt

cnp.import_array()


def jacobi_eigh(cnp.ndarray[cnp.float64_t, ndim=2] a_in,
                double rel_off_tol=1e-12, int max_sweeps=64):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (w, V) with w ascending and a_in ~= V @ diag(w) @ V.T.
    Sweeps stop once the off-diagonal Frobenius norm drops below
    rel_off_tol * ||A||_F.
    """
    cdef int n = a_in.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] A = np.array(a_in, dtype=np.float64, order="C")
    cdef cnp.ndarray[cnp.float64_t, ndim=2] V = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] a = A
    cdef double[:, ::1] v = V
    cdef int p, q, k, sweep
    cdef double norm_a = 0.0, off, thresh
    cdef double apq, app, aqq, tau, t, c, s, akp, akq

    for p in range(n):
        for q in range(n):
            norm_a += a[p, q] * a[p, q]
    norm_a = sqrt(norm_a)
    thresh = rel_off_tol * norm_a

    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += 2.0 * a[p, q] * a[p, q]
        off = sqrt(off)
        if off <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if fabs(apq) <= 1e-3 * thresh / n:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + hypot(1.0, tau))
                else:
                    t = -1.0 / (-tau + hypot(1.0, tau))
                c = 1.0 / hypot(1.0, t)
                s = t * c
                # A <- J^T A J with J the (p,q) Givens rotation.
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    akp = a[p, k]
                    akq = a[q, k]
                    a[p, k] = c * akp - s * akq
                    a[q, k] = s * akp + c * akq
                # Zero the target pair exactly to keep symmetry clean.
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    akp = v[k, p]
                    akq = v[k, q]
                    v[k, p] = c * akp - s * akq
                    v[k, q] = s * akp + c * akq

    w = np.empty(n, dtype=np.float64)
    for p in range(n):
        w[p] = a[p, p]
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]
