"""Separable-structure equivalence between PSD-cone subsets.

A transformation matrix P (k x d) is separable when rows and columns can be
partitioned into groups so all off-group blocks vanish.  ``lift`` constructs
a full (t, T) pair from per-group pairs by the Gram-factor / orthogonal
extension argument; ``restrict`` is the easy direction (take submatrices).
The two specializations implemented on top are the ESDR2-T <-> ESDR-Y maps
(P = Shat) and the VA-SDR <-> BC-SDR maps (P = [I 2I ... 2^{q-1} I]).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls
from scipy.sparse.csgraph import connected_components
import scipy.sparse as sp

from .errors import GramMismatch, InvalidInput
from .linalg import eig_sym, gram_factor, orthogonal_extension
from .model import ProblemData, make_symbol_set

_PSD_TOL = 1e-8


@dataclass(frozen=True)
class SeparablePartition:
    row_groups: tuple   # tuple of index tuples over {0..k-1}
    col_groups: tuple   # tuple of index tuples over {0..d-1}
    blocks: tuple       # P[alpha_i, beta_i] submatrices

    @property
    def num_groups(self):
        return len(self.row_groups)


@dataclass(frozen=True)
class DecomposedPoint:
    y: np.ndarray
    Y: np.ndarray
    group_t: tuple  # per-group vectors t^(i)
    group_T: tuple  # per-group matrices T^(i)


@dataclass(frozen=True)
class LiftedPoint:
    t: np.ndarray
    T: np.ndarray


def find_partition(P) -> SeparablePartition:
    """Finest separable partition via connected components of the bipartite
    nonzero graph; zero rows/columns are folded into the first group."""
    P = np.asarray(P, dtype=np.float64)
    k, d = P.shape
    rows, cols = np.nonzero(P)
    adj = sp.csr_matrix(
        (np.ones(len(rows)), (rows, k + cols)), shape=(k + d, k + d)
    )
    adj = adj + adj.T
    ncomp, labels = connected_components(adj, directed=False)
    groups = {}
    for node in range(k + d):
        groups.setdefault(labels[node], []).append(node)
    proper = []
    orphan_rows, orphan_cols = [], []
    for comp in sorted(groups.values(), key=lambda c: c[0]):
        rset = [i for i in comp if i < k]
        cset = [i - k for i in comp if i >= k]
        if rset and cset:
            proper.append((rset, cset))
        else:
            orphan_rows.extend(rset)
            orphan_cols.extend(cset)
    if not proper:
        proper = [([], [])]
    proper[0] = (sorted(proper[0][0] + orphan_rows), sorted(proper[0][1] + orphan_cols))
    row_groups = tuple(tuple(r) for r, _ in proper)
    col_groups = tuple(tuple(c) for _, c in proper)
    blocks = tuple(P[np.ix_(r, c)] for r, c in zip(row_groups, col_groups))
    return SeparablePartition(row_groups=row_groups, col_groups=col_groups, blocks=blocks)


def _bordered(vec, mat):
    d = len(vec)
    out = np.empty((d + 1, d + 1))
    out[0, 0] = 1.0
    out[0, 1:] = vec
    out[1:, 0] = vec
    out[1:, 1:] = mat
    return out


def _check_psd(mat, tol, what):
    w = eig_sym(mat).eigenvalues
    scale = max(1.0, float(np.max(np.abs(mat))))
    if w[0] < -tol * scale:
        raise InvalidInput("%s is not PSD (min eig %.3e)" % (what, w[0]))


def restrict(point: LiftedPoint, part: SeparablePartition, y, Y) -> DecomposedPoint:
    """Easy direction of the equivalence: read off per-group submatrices."""
    y = np.asarray(y, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    t, T = np.asarray(point.t), np.asarray(point.T)
    P = _assemble_p(part, y.shape[0], t.shape[0])
    tol = _PSD_TOL
    scale = 1.0 + float(np.max(np.abs(Y)))
    if (np.max(np.abs(Y - P @ T @ P.T)) > tol * scale
            or np.max(np.abs(y - P @ t)) > tol * scale):
        raise InvalidInput("lifted point violates Y = P T P^T / y = P t")
    _check_psd(_bordered(t, T), tol, "[[1,t],[t,T]]")
    _check_psd(_bordered(y, Y), tol, "[[1,y],[y,Y]]")
    gt = tuple(t[list(beta)] for beta in part.col_groups)
    gT = tuple(T[np.ix_(beta, beta)] for beta in part.col_groups)
    return DecomposedPoint(y=y, Y=Y, group_t=gt, group_T=gT)


def _assemble_p(part: SeparablePartition, k, d):
    P = np.zeros((k, d))
    for (alpha, beta, blk) in zip(part.row_groups, part.col_groups, part.blocks):
        P[np.ix_(alpha, beta)] = blk
    return P


def lift(point: DecomposedPoint, part: SeparablePartition) -> LiftedPoint:
    """Constructive direction: build (t, T) from the per-group pairs.

    Follows the Gram-factorization construction: factor the bordered (y, Y)
    with max(k, d)+1 rows, factor each bordered group pair, match the two
    factorizations of each bordered principal submatrix by an orthogonal
    extension, and read (t, T) off the assembled product.
    """
    y = np.asarray(point.y, dtype=np.float64)
    Y = np.asarray(point.Y, dtype=np.float64)
    k = y.shape[0]
    d = sum(len(beta) for beta in part.col_groups)
    r = max(k, d)

    _check_psd(_bordered(y, Y), _PSD_TOL, "[[1,y],[y,Y]]")
    for i, (ti, Ti) in enumerate(zip(point.group_t, point.group_T)):
        _check_psd(_bordered(np.asarray(ti), np.asarray(Ti)), _PSD_TOL,
                   "group %d [[1,t],[t,T]]" % i)

    vtil = gram_factor(_bordered(y, Y), rows=r + 1)   # (r+1) x (k+1)
    v0 = vtil[:, 0]
    R = np.zeros((r + 1, d + 1))
    R[:, 0] = v0
    for alpha, beta, blk, ti, Ti in zip(part.row_groups, part.col_groups,
                                        part.blocks, point.group_t, point.group_T):
        ti = np.asarray(ti, dtype=np.float64)
        Ti = np.asarray(Ti, dtype=np.float64)
        di = len(beta)
        ztil = gram_factor(_bordered(ti, Ti), rows=di + 1)  # (di+1) x (di+1)
        ptil = np.zeros((len(alpha) + 1, di + 1))
        ptil[0, 0] = 1.0
        ptil[1:, 1:] = blk
        a_i = ztil @ ptil.T                                  # (di+1) x (ki+1)
        b_i = np.column_stack([v0] + [vtil[:, 1 + a] for a in alpha])
        try:
            u_i = orthogonal_extension(a_i, b_i)
        except GramMismatch:
            raise GramMismatch(
                "group factors disagree; input violates Y[alpha]=P T P^T"
            )
        R[:, [1 + c for c in beta]] = u_i @ ztil[:, 1:]
    full = R.T @ R
    return LiftedPoint(t=full[1:, 0].copy(), T=full[1:, 1:].copy())


def lemma44_interval(q: int):
    """Image interval of B -> w^T B w over unit-diagonal PSD B: [1, (2^q-1)^2]."""
    if q < 1:
        raise InvalidInput("q must be >= 1")
    return 1.0, float((2 ** q - 1) ** 2)


def _lemma44_w(q):
    return 2.0 ** np.arange(q)


def lemma44_witness(q: int, target: float) -> np.ndarray:
    """Unit-diagonal PSD B with w^T B w = target, as a convex blend of the
    all-ones matrix and the rank-one [-1,...,-1,1] witness."""
    lo, hi = lemma44_interval(q)
    if not (lo - 1e-12 <= target <= hi + 1e-12):
        raise InvalidInput("target %.6g outside [%g, %g]" % (target, lo, hi))
    ones = np.ones((q, q))
    u = np.ones(q)
    u[:-1] = -1.0
    low = np.outer(u, u)
    theta = 0.0 if hi == lo else (target - lo) / (hi - lo)
    return theta * ones + (1.0 - theta) * low


def esdr2t_to_esdry(t, T, pd: ProblemData):
    """Map an ESDR2-T feasible (t, T) to ESDR-Y coordinates: Y = S T S^T, y = S t.

    Objective values agree exactly because Qbar = Shat^T Qhat Shat.
    """
    t = np.asarray(t, dtype=np.float64)
    T = np.asarray(T, dtype=np.float64)
    _validate_t_feasible(t, T, pd)
    S = pd.Shat
    return S @ t, S @ T @ S.T


def _validate_t_feasible(t, T, pd, tol=_PSD_TOL):
    d = pd.Shat.shape[1]
    M = pd.K.shape[0]
    n = d // M
    if t.shape != (d,) or T.shape != (d, d):
        raise InvalidInput("dimension mismatch with problem data")
    sums = t.reshape(n, M).sum(axis=1)
    if np.max(np.abs(sums - 1.0)) > tol or np.min(t) < -tol:
        raise InvalidInput("t violates the simplex constraints")
    for i in range(n):
        blk = T[i * M:(i + 1) * M, i * M:(i + 1) * M]
        if np.max(np.abs(blk - np.diag(t[i * M:(i + 1) * M]))) > tol:
            raise InvalidInput("T_{i,i} != Diag(t_i)")
    _check_psd(_bordered(t, T), tol, "[[1,t],[t,T]]")


def hull_weights(y, Y, pd: ProblemData, i: int, tol=1e-6) -> np.ndarray:
    """Recover nonnegative hull weights for the i-th 3x3 moment submatrix.

    The moment system is underdetermined for M > 5; we take the (ridge-
    regularized) least-norm nonnegative solution via active-set NNLS, clip
    negativity at -1e-9, and renormalize.
    """
    ss_M = pd.K.shape[0]
    n = pd.Shat.shape[0] // 2
    ss = make_symbol_set(ss_M)
    E = np.vstack([
        np.ones(ss_M),
        ss.sR,
        ss.sI,
        ss.sR ** 2,
        ss.sR * ss.sI,
        ss.sI ** 2,
    ])
    f = np.array([1.0, y[i], y[n + i], Y[i, i], Y[i, n + i], Y[n + i, n + i]])
    reg = 1e-6
    E_aug = np.vstack([E, reg * np.eye(ss_M)])
    f_aug = np.concatenate([f, np.zeros(ss_M)])
    w, _ = nnls(E_aug, f_aug)
    if np.linalg.norm(E @ w - f) > tol:
        raise InvalidInput("moment submatrix %d lies outside the symbol hull" % i)
    # polish away the ridge bias: minimum-norm correction onto E w = f
    w = w + np.linalg.lstsq(E, f - E @ w, rcond=None)[0]
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if total <= 0:
        raise InvalidInput("degenerate hull weights")
    return w / total


def esdry_to_esdr2t(y, Y, pd: ProblemData):
    """Map an ESDR-Y feasible (y, Y) to an ESDR2-T feasible (t, T).

    Per-symbol weights come from the 3x3 moment submatrices.  The full T is
    assembled without any Gram-factor matching: with X the bordered (y, Y)
    matrix, A_i = [w_i, D_i S_i^T] the indicator/(1, s) cross-moments,
    G_i the bordered 3x3 moment submatrix and C_i = A_i G_i^{-1},

        [[1, t^T], [t, T]] = C X C^T + blockdiag(0, D_i - C_i A_i^T)

    Each correction block is the Schur complement of the indicator block in
    the joint moment matrix of the discrete symbol distribution w_i, hence
    PSD; the inverse-cancellation identities S_i C_i = [0 I] and
    C_i G_i[:, 0] = w_i make the map reproduce y, Y and the diagonal
    constraint T_ii = Diag(t_i) exactly, so objectives match to rounding.
    """
    y = np.asarray(y, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    n = pd.Shat.shape[0] // 2
    M = pd.K.shape[0]
    d = M * n
    X = _bordered(y, Y)
    ss = make_symbol_set(M)
    Si = np.vstack([ss.sR, ss.sI])  # 2 x M, identical for every antenna
    C = np.zeros((d + 1, 2 * n + 1))
    C[0, 0] = 1.0
    corr = np.zeros((d + 1, d + 1))
    for i in range(n):
        w = hull_weights(y, Y, pd, i)
        D = np.diag(w)
        A = np.column_stack([w, D @ Si.T])            # M x 3
        G = X[np.ix_([0, 1 + i, 1 + n + i], [0, 1 + i, 1 + n + i])]
        Ci = A @ np.linalg.pinv(G, rcond=1e-10)
        rows = slice(1 + i * M, 1 + (i + 1) * M)
        C[rows, 0] = Ci[:, 0]
        C[rows, 1 + i] = Ci[:, 1]
        C[rows, 1 + n + i] = Ci[:, 2]
        corr[rows, rows] = D - Ci @ A.T
    full = C @ X @ C.T + corr
    full = 0.5 * (full + full.T)
    t = full[1:, 0].copy()
    T = full[1:, 1:].copy()
    # exactness of the diagonal blocks: overwrite rounding-level asymmetry
    for i in range(n):
        blk = slice(i * M, (i + 1) * M)
        T[blk, blk] = np.diag(t[blk])
    return t, T


def va_bc_maps(q: int, n: int, direction: str, point):
    """Feasible-set maps between VA-SDR (b, B) and BC-SDR (x, X).

    direction "va_to_bc": X = W B W^T, x = W b.
    direction "bc_to_va": per-coordinate witnesses for the diagonal plus the
    constructive lift over W's partition.
    """
    W = np.hstack([(2.0 ** j) * np.eye(n) for j in range(q)])
    w = _lemma44_w(q)
    if direction == "va_to_bc":
        b, B = (np.asarray(p, dtype=np.float64) for p in point)
        if B.shape != (q * n, q * n) or b.shape != (q * n,):
            raise InvalidInput("dimension mismatch")
        if np.max(np.abs(np.diag(B) - 1.0)) > _PSD_TOL:
            raise InvalidInput("diag(B) != 1")
        _check_psd(_bordered(b, B), _PSD_TOL, "[[1,b],[b,B]]")
        return W @ b, W @ B @ W.T
    if direction == "bc_to_va":
        x, X = (np.asarray(p, dtype=np.float64) for p in point)
        lo, hi = lemma44_interval(q)
        diag = np.diag(X)
        if np.min(diag) < lo - 1e-8 or np.max(diag) > hi + 1e-8:
            raise InvalidInput("diag(X) outside [%g, %g]" % (lo, hi))
        _check_psd(_bordered(x, X), _PSD_TOL, "[[1,x],[x,X]]")
        part = find_partition(W)
        group_b, group_B = [], []
        for i in range(n):
            Bi = lemma44_witness(q, float(np.clip(diag[i], lo, hi)))
            bi = (x[i] / diag[i]) * (Bi @ w)
            group_b.append(bi)
            group_B.append(Bi)
        dec = DecomposedPoint(y=x, Y=X, group_t=tuple(group_b), group_T=tuple(group_B))
        lifted = lift(dec, part)
        return lifted.t, lifted.T
    raise InvalidInput("direction must be 'va_to_bc' or 'bc_to_va'")


def partition_to_json(part: SeparablePartition) -> str:
    return json.dumps({
        "row_groups": [list(g) for g in part.row_groups],
        "col_groups": [list(g) for g in part.col_groups],
        "blocks": [b.tolist() for b in part.blocks],
    })
