"""Reference oracles: exhaustive ML detection and feasible-point sampling."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import TooLarge
from .model import MimoInstance, make_symbol_set, ml_objective
from .sdr import ConicProgram, vertex_point

MAX_ENUMERATION = 10_000_000


@dataclass(frozen=True)
class MlResult:
    objective: float
    x: np.ndarray
    u: np.ndarray  # 0-based symbol indices
    num_evaluated: int


def brute_force_ml(inst: MimoInstance) -> MlResult:
    """Exhaustive minimization of ||Hx - r||^2 over the constellation grid.

    Ties break lexicographically on the index vector (first enumeration order
    wins).  Refuses M^n > 10^7.
    """
    ss = make_symbol_set(inst.M)
    total = inst.M ** inst.n
    if total > MAX_ENUMERATION:
        raise TooLarge("M^n = %d exceeds enumeration limit %d" % (total, MAX_ENUMERATION))
    best_obj = np.inf
    best_u = None
    count = 0
    # evaluate in chunks to keep memory bounded while staying vectorized
    chunk = []
    chunk_size = 4096
    H = inst.H

    def flush(chunk, best_obj, best_u):
        U = np.array(chunk)
        X = ss.symbols[U]                       # (B, n)
        D = X @ H.T - inst.r[None, :]           # (B, m)
        objs = np.sum(np.abs(D) ** 2, axis=1)
        k = int(np.argmin(objs))
        if objs[k] < best_obj:
            return float(objs[k]), U[k]
        return best_obj, best_u

    for u in product(range(inst.M), repeat=inst.n):
        chunk.append(u)
        count += 1
        if len(chunk) == chunk_size:
            best_obj, best_u = flush(chunk, best_obj, best_u)
            chunk = []
    if chunk:
        best_obj, best_u = flush(chunk, best_obj, best_u)
    best_u = np.asarray(best_u, dtype=np.int64)
    x = ss.symbols[best_u]
    return MlResult(objective=float(ml_objective(inst, x)), x=x, u=best_u,
                    num_evaluated=count)


def sample_feasible_membership(program: ConicProgram, rng, num_points=10):
    """Random feasible points of a relaxation as convex combinations of the
    rank-one vertices; returns the list of per-block values."""
    md = program.metadata
    n, M = md["n"], md["M"]
    points = []
    for _ in range(num_points):
        k = int(rng.integers(1, 5))
        weights = rng.dirichlet(np.ones(k))
        combo = None
        for w in weights:
            u = rng.integers(0, M, size=n)
            vert = vertex_point(program, u)
            if combo is None:
                combo = [w * np.asarray(v) for v in vert]
            else:
                for a, v in enumerate(vert):
                    combo[a] = combo[a] + w * np.asarray(v)
        points.append(combo)
    return points
