import numpy as np
import pytest

from psksdr._kernels import HAVE_COMPILED, JACOBI_CROSSOVER_DIM, backend_name, eigh_kernel
from psksdr._kernels._pure import lapack_eigh


def rand_sym(rng, d):
    a = rng.normal(size=(d, d))
    return a + a.T


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernel unavailable")
def test_jacobi_agrees_with_lapack():
    from psksdr._kernels._jacobi import jacobi_eigh

    rng = np.random.default_rng(0)
    for d in (1, 2, 3, 10, 25, 40):
        a = rand_sym(rng, d)
        wj, vj = jacobi_eigh(a)
        wl, _ = lapack_eigh(a)
        assert np.allclose(wj, wl, atol=1e-9 * max(1.0, np.abs(wl).max()))
        assert np.allclose(vj @ np.diag(wj) @ vj.T, a, atol=1e-8)
        assert np.allclose(vj.T @ vj, np.eye(d), atol=1e-10)


def test_dispatch_and_contract():
    rng = np.random.default_rng(1)
    for d in (5, JACOBI_CROSSOVER_DIM + 5):
        a = rand_sym(rng, d)
        w, v = eigh_kernel(a)
        assert np.all(np.diff(w) >= 0)  # ascending
        assert np.allclose(v @ np.diag(w) @ v.T, a, atol=1e-8)
    assert isinstance(backend_name(), str)
