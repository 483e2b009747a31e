"""Compare the compiled Jacobi eigensolver against the LAPACK path.

Usage: python3 benchmarks/bench_kernels.py [--repeats 200]

Prints per-dimension mean wall time for both backends and the crossover
recommendation.  The dispatch in psksdr._kernels uses the compiled kernel
below JACOBI_CROSSOVER_DIM and LAPACK above it.
"""

import argparse
import time

import numpy as np

from psksdr._kernels import HAVE_COMPILED, JACOBI_CROSSOVER_DIM
from psksdr._kernels._pure import lapack_eigh

DIMS = (3, 5, 9, 17, 21, 33, 41, 65, 81)


def bench(fn, mats, repeats):
    t0 = time.perf_counter()
    for _ in range(repeats):
        for a in mats:
            fn(a)
    return (time.perf_counter() - t0) / (repeats * len(mats))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=200)
    args = ap.parse_args()

    if not HAVE_COMPILED:
        raise SystemExit("compiled kernel not built; run pip install -e .")
    from psksdr._kernels._jacobi import jacobi_eigh

    rng = np.random.default_rng(0)
    print("crossover dim in dispatch: %d" % JACOBI_CROSSOVER_DIM)
    print("%6s %14s %14s %8s" % ("dim", "jacobi (us)", "lapack (us)", "ratio"))
    for d in DIMS:
        mats = []
        for _ in range(5):
            a = rng.normal(size=(d, d))
            mats.append(a + a.T)
        tj = bench(jacobi_eigh, mats, args.repeats)
        tl = bench(lapack_eigh, mats, args.repeats)
        print("%6d %14.2f %14.2f %8.2f" % (d, 1e6 * tj, 1e6 * tl, tj / tl))


if __name__ == "__main__":
    main()
