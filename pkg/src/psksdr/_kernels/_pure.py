"""Pure-Python (LAPACK-backed) symmetric eigendecomposition fallback."""

import numpy as np


def lapack_eigh(a, rel_off_tol=None, max_sweeps=None):
    """Same contract as the compiled kernel: (w ascending, V columnwise).

    The tolerance arguments are accepted for interface parity; LAPACK always
    drives the off-diagonal mass to machine precision.
    """
    w, v = np.linalg.eigh(a)
    return w, v
