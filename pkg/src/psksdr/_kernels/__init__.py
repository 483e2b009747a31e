"""Eigendecomposition kernel selection.

The compiled cyclic-Jacobi kernel wins for the small symmetric blocks that
dominate the conic solver's projection loop; above ``JACOBI_CROSSOVER_DIM``
LAPACK's blocked algorithms take over and we delegate to numpy.  Set
``PSKSDR_FORCE_PURE=1`` to disable the compiled kernel entirely (or when the
extension was not built).
"""

import os

import numpy as np

from ._pure import lapack_eigh

# Dimension above which LAPACK beats the scalar Jacobi sweep; measured with
# benchmarks/bench_kernels.py on x86-64.
JACOBI_CROSSOVER_DIM = 8

if os.environ.get("PSKSDR_FORCE_PURE"):
    jacobi_eigh = None
else:
    try:
        from ._jacobi import jacobi_eigh
    except ImportError:
        jacobi_eigh = None

HAVE_COMPILED = jacobi_eigh is not None


def eigh_kernel(a):
    """Symmetric eigendecomposition (w ascending, V orthonormal columns)."""
    if HAVE_COMPILED and a.shape[0] <= JACOBI_CROSSOVER_DIM:
        return jacobi_eigh(np.ascontiguousarray(a, dtype=np.float64))
    return lapack_eigh(a)


def backend_name():
    if HAVE_COMPILED:
        return "jacobi-cython+lapack(dim>%d)" % JACOBI_CROSSOVER_DIM
    return "lapack"
