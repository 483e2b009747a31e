"""Standard-form conic encodings of the five relaxations.

Each builder emits a ``ConicProgram``: an ordered list of cone blocks (PSD
blocks in scaled upper-triangular vector form, off-diagonals times sqrt(2),
plus nonnegative-orthant blocks), a cost vector over the stacked variable,
and sparse affine equalities A u = b.

Complex models (CSDR, ESDR-X) are embedded into one real PSD block of
doubled size via [[Re, -Im], [Im, Re]], with explicit coupling equalities
forcing the block to represent a Hermitian matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InvalidInput
from .model import MimoInstance, ProblemData, make_symbol_set

TIGHT_INF_NORM_TOL = 1e-4

_SQRT2 = np.sqrt(2.0)


def svec_size(d: int) -> int:
    return d * (d + 1) // 2


def svec(mat: np.ndarray) -> np.ndarray:
    """Scaled upper-triangular vectorization: svec(A).svec(B) = <A, B>."""
    d = mat.shape[0]
    iu, ju = np.triu_indices(d)
    v = mat[iu, ju].astype(np.float64).copy()
    v[iu != ju] *= _SQRT2
    return v


def smat(vec: np.ndarray, d: int) -> np.ndarray:
    """Inverse of svec."""
    iu, ju = np.triu_indices(d)
    out = np.zeros((d, d))
    v = np.asarray(vec, dtype=np.float64).copy()
    off = iu != ju
    v[off] /= _SQRT2
    out[iu, ju] = v
    out[ju, iu] = v
    return out


def _svec_index(i: int, j: int, d: int) -> int:
    # position of (i, j), i <= j, in row-major upper-triangular order
    return i * d - i * (i - 1) // 2 + (j - i)


@dataclass(frozen=True)
class ConeBlock:
    kind: str  # "PSD" | "NONNEG"
    dim: int

    @property
    def size(self) -> int:
        return svec_size(self.dim) if self.kind == "PSD" else self.dim


@dataclass(frozen=True)
class ConicProgram:
    blocks: tuple
    cost: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray
    metadata: dict

    @property
    def num_vars(self) -> int:
        return self.cost.shape[0]

    def block_offsets(self):
        offs = []
        pos = 0
        for blk in self.blocks:
            offs.append(pos)
            pos += blk.size
        return offs

    def split(self, u: np.ndarray):
        """Unstack a flat variable into block values (matrices / vectors)."""
        out = []
        pos = 0
        for blk in self.blocks:
            chunk = u[pos:pos + blk.size]
            out.append(smat(chunk, blk.dim) if blk.kind == "PSD" else chunk.copy())
            pos += blk.size
        return out

    def stack(self, blocks) -> np.ndarray:
        parts = []
        for blk, val in zip(self.blocks, blocks):
            parts.append(svec(val) if blk.kind == "PSD" else np.asarray(val, dtype=np.float64))
        return np.concatenate(parts)

    def constraint_residual(self, blocks) -> float:
        u = self.stack(blocks)
        return float(np.max(np.abs(self.A @ u - self.b))) if self.b.size else 0.0

    def objective_at(self, blocks) -> float:
        return float(self.cost @ self.stack(blocks))

    def to_json(self) -> str:
        coo = self.A.tocoo()
        return json.dumps({
            "blocks": [{"kind": blk.kind, "dim": blk.dim} for blk in self.blocks],
            "cost": self.cost.tolist(),
            "A_triplets": [coo.row.tolist(), coo.col.tolist(), coo.data.tolist()],
            "b": self.b.tolist(),
            "metadata": {k: v for k, v in self.metadata.items()},
        })


@dataclass(frozen=True)
class SdrSolution:
    objective: float
    xhat: np.ndarray
    matrix_part: list
    residuals: dict
    tight: bool
    iterations: int
    status: str = "Solved"

    def to_json(self) -> str:
        return json.dumps({
            "status": self.status,
            "objective": self.objective,
            "xhat_re": self.xhat.real.tolist(),
            "xhat_im": self.xhat.imag.tolist(),
            "residuals": self.residuals,
            "tight": self.tight,
            "iterations": self.iterations,
        })


class _Builder:
    def __init__(self):
        self.blocks = []
        self._rows = []
        self._cols = []
        self._vals = []
        self._b = []
        self._cost = {}

    def add_block(self, kind, dim):
        self.blocks.append(ConeBlock(kind, dim))
        return len(self.blocks) - 1

    def _offset(self, block):
        return sum(b.size for b in self.blocks[:block])

    def new_row(self, rhs):
        self._b.append(float(rhs))
        return len(self._b) - 1

    def psd_entry(self, row, block, i, j, w):
        """Add w * G[i, j] (counting the symmetric pair once) to a row."""
        if i > j:
            i, j = j, i
        d = self.blocks[block].dim
        idx = self._offset(block) + _svec_index(i, j, d)
        self._rows.append(row)
        self._cols.append(idx)
        self._vals.append(w if i == j else w / _SQRT2)

    def lin_entry(self, row, block, k, w):
        self._rows.append(row)
        self._cols.append(self._offset(block) + k)
        self._vals.append(w)

    def cost_psd_matrix(self, block, mat):
        off = self._offset(block)
        for k, v in enumerate(svec(mat)):
            if v != 0.0:
                self._cost[off + k] = self._cost.get(off + k, 0.0) + v

    def build(self, metadata):
        nvar = sum(b.size for b in self.blocks)
        cost = np.zeros(nvar)
        for k, v in self._cost.items():
            cost[k] = v
        A = sp.csr_matrix(
            (self._vals, (self._rows, self._cols)), shape=(len(self._b), nvar)
        )
        A.sum_duplicates()
        return ConicProgram(
            blocks=tuple(self.blocks), cost=cost, A=A,
            b=np.array(self._b), metadata=metadata,
        )


def _complex_embedding_block(bld, k):
    """PSD block of dim 2k representing a Hermitian (k x k) matrix.

    Adds the coupling equalities G22 = G11 (strict upper triangle; diagonals
    are pinned separately by the callers) and G12 antisymmetric.
    """
    blk = bld.add_block("PSD", 2 * k)
    for a in range(k):
        for b2 in range(a + 1, k):
            row = bld.new_row(0.0)
            bld.psd_entry(row, blk, a, b2, 1.0)
            bld.psd_entry(row, blk, k + a, k + b2, -1.0)
    for a in range(k):
        for b2 in range(a, k):
            row = bld.new_row(0.0)
            if a == b2:
                bld.psd_entry(row, blk, a, k + a, 1.0)
            else:
                bld.psd_entry(row, blk, a, k + b2, 1.0)
                bld.psd_entry(row, blk, b2, k + a, 1.0)
    return blk


def _embedded_cost(Q, c):
    k = Q.shape[0] + 1
    ctil = np.zeros((k, k), dtype=np.complex128)
    ctil[0, 1:] = c.conj()
    ctil[1:, 0] = c
    ctil[1:, 1:] = Q
    from .linalg import herm_to_real

    return 0.5 * herm_to_real(ctil)


def build_csdr(pd: ProblemData, inst: MimoInstance) -> ConicProgram:
    """Conventional SDR: drop the symbol constraints, keep X_ii = 1."""
    n = inst.n
    k = n + 1
    bld = _Builder()
    blk = _complex_embedding_block(bld, k)
    # corner and unit-diagonal constraints on both embedding copies
    for a in range(k):
        rhs = 1.0
        row = bld.new_row(rhs)
        bld.psd_entry(row, blk, a, a, 1.0)
        row = bld.new_row(rhs)
        bld.psd_entry(row, blk, k + a, k + a, 1.0)
    bld.cost_psd_matrix(blk, _embedded_cost(pd.Q, pd.c))
    return bld.build(_meta("CSDR", inst, psd_block=blk, k=k))


def build_esdr_x(pd: ProblemData, inst: MimoInstance) -> ConicProgram:
    """CSDR plus x constrained to the convex hull of the constellation."""
    n, M = inst.n, inst.M
    ss = make_symbol_set(M)
    k = n + 1
    bld = _Builder()
    blk = _complex_embedding_block(bld, k)
    for a in range(k):
        row = bld.new_row(1.0)
        bld.psd_entry(row, blk, a, a, 1.0)
        row = bld.new_row(1.0)
        bld.psd_entry(row, blk, k + a, k + a, 1.0)
    tblk = bld.add_block("NONNEG", M * n)
    for i in range(n):
        row = bld.new_row(0.0)
        bld.psd_entry(row, blk, 0, 1 + i, 1.0)
        for j in range(M):
            bld.lin_entry(row, tblk, i * M + j, -ss.sR[j])
        row = bld.new_row(0.0)
        bld.psd_entry(row, blk, 0, k + 1 + i, 1.0)
        for j in range(M):
            bld.lin_entry(row, tblk, i * M + j, -ss.sI[j])
        row = bld.new_row(1.0)
        for j in range(M):
            bld.lin_entry(row, tblk, i * M + j, 1.0)
    bld.cost_psd_matrix(blk, _embedded_cost(pd.Q, pd.c))
    return bld.build(_meta("ESDR-X", inst, psd_block=blk, k=k, t_block=tblk))


def build_esdr_y(pd: ProblemData, inst: MimoInstance) -> ConicProgram:
    """Real enhanced SDR with the per-symbol 3x3 hull constraints."""
    n, M = inst.n, inst.M
    ss = make_symbol_set(M)
    bld = _Builder()
    blk = bld.add_block("PSD", 2 * n + 1)
    tblk = bld.add_block("NONNEG", M * n)
    row = bld.new_row(1.0)
    bld.psd_entry(row, blk, 0, 0, 1.0)
    sR, sI = ss.sR, ss.sI
    # per-i matching of the 5 independent entries of the 3x3 submatrix to
    # the hull weights, plus the simplex constraint
    entry_specs = [
        ((0, 1), sR), ((0, 2), sI),
        ((1, 1), sR * sR), ((1, 2), sR * sI), ((2, 2), sI * sI),
    ]
    for i in range(n):
        pos = {0: 0, 1: 1 + i, 2: 1 + n + i}
        for (a, b2), coeffs in entry_specs:
            row = bld.new_row(0.0)
            bld.psd_entry(row, blk, pos[a], pos[b2], 1.0)
            for j in range(M):
                bld.lin_entry(row, tblk, i * M + j, -coeffs[j])
        row = bld.new_row(1.0)
        for j in range(M):
            bld.lin_entry(row, tblk, i * M + j, 1.0)
    cmat = np.zeros((2 * n + 1, 2 * n + 1))
    cmat[0, 1:] = pd.chat
    cmat[1:, 0] = pd.chat
    cmat[1:, 1:] = pd.Qhat
    bld.cost_psd_matrix(blk, cmat)
    return bld.build(_meta("ESDR-Y", inst, psd_block=blk, t_block=tblk))


def _build_t_model(pd, inst, diagonal_inner):
    n, M = inst.n, inst.M
    d = M * n
    bld = _Builder()
    blk = bld.add_block("PSD", d + 1)
    tblk = bld.add_block("NONNEG", d)
    row = bld.new_row(1.0)
    bld.psd_entry(row, blk, 0, 0, 1.0)
    for a in range(d):
        # nonnegativity of t via coupling to the orthant block
        row = bld.new_row(0.0)
        bld.psd_entry(row, blk, 0, 1 + a, 1.0)
        bld.lin_entry(row, tblk, a, -1.0)
        # diag(T_{i,i}) = t_i
        row = bld.new_row(0.0)
        bld.psd_entry(row, blk, 1 + a, 1 + a, 1.0)
        bld.psd_entry(row, blk, 0, 1 + a, -1.0)
    for i in range(n):
        row = bld.new_row(1.0)
        for j in range(M):
            bld.psd_entry(row, blk, 0, 1 + i * M + j, 1.0)
    if diagonal_inner:
        for i in range(n):
            for j1 in range(M):
                for j2 in range(j1 + 1, M):
                    row = bld.new_row(0.0)
                    bld.psd_entry(row, blk, 1 + i * M + j1, 1 + i * M + j2, 1.0)
    cmat = np.zeros((d + 1, d + 1))
    cmat[0, 1:] = pd.cbar
    cmat[1:, 0] = pd.cbar
    cmat[1:, 1:] = pd.Qbar
    bld.cost_psd_matrix(blk, cmat)
    kind = "ESDR2-T" if diagonal_inner else "ESDR1-T"
    return bld.build(_meta(kind, inst, psd_block=blk, t_block=tblk))


def build_esdr1_t(pd: ProblemData, inst: MimoInstance) -> ConicProgram:
    """Zero-one lifting with diag(T_{i,i}) = t_i."""
    return _build_t_model(pd, inst, diagonal_inner=False)


def build_esdr2_t(pd: ProblemData, inst: MimoInstance) -> ConicProgram:
    """Zero-one lifting with T_{i,i} = Diag(t_i)."""
    return _build_t_model(pd, inst, diagonal_inner=True)


def _meta(kind, inst, **extra):
    md = {"sdr_kind": kind, "m": inst.m, "n": inst.n, "M": inst.M}
    md.update(extra)
    return md


BUILDERS = {
    "CSDR": build_csdr,
    "ESDR-X": build_esdr_x,
    "ESDR-Y": build_esdr_y,
    "ESDR1-T": build_esdr1_t,
    "ESDR2-T": build_esdr2_t,
}


def extract_xhat(sol_blocks, program: ConicProgram) -> np.ndarray:
    """Read the complex symbol estimate out of solved block values."""
    md = program.metadata
    kind = md.get("sdr_kind")
    n, M = md["n"], md["M"]
    if kind in ("CSDR", "ESDR-X"):
        G = sol_blocks[md["psd_block"]]
        k = md["k"]
        return G[0, 1:1 + n] + 1j * G[0, k + 1:k + 1 + n]
    if kind == "ESDR-Y":
        G = sol_blocks[md["psd_block"]]
        y = G[0, 1:]
        return y[:n] + 1j * y[n:]
    if kind in ("ESDR1-T", "ESDR2-T"):
        t = np.asarray(sol_blocks[md["t_block"]])
        ss = make_symbol_set(M)
        return t.reshape(n, M) @ ss.symbols
    raise InvalidInput("unknown sdr_kind %r" % (kind,))


def decide_tight(xhat, xstar) -> bool:
    """Tightness decision rule ||xhat - x*||_inf <= 1e-4."""
    xhat = np.asarray(xhat)
    xstar = np.asarray(xstar)
    if xhat.shape != xstar.shape:
        raise InvalidInput("length mismatch")
    return bool(np.max(np.abs(xhat - xstar)) <= TIGHT_INF_NORM_TOL)


def ground_truth_point(program: ConicProgram, inst: MimoInstance):
    """The rank-one feasible point encoding (x*, one-hot t); used by tests."""
    return vertex_point(program, inst.ustar)


def vertex_point(program: ConicProgram, u_indices):
    """Feasible rank-one vertex for an arbitrary symbol-index vector."""
    from .linalg import herm_to_real

    md = program.metadata
    kind = md["sdr_kind"]
    n, M = md["n"], md["M"]
    ss = make_symbol_set(M)
    u_indices = np.asarray(u_indices)
    x = ss.symbols[u_indices]
    t = np.zeros(M * n)
    t[np.arange(n) * M + u_indices] = 1.0
    blocks = [None] * len(program.blocks)
    if kind in ("CSDR", "ESDR-X"):
        xa = np.concatenate([[1.0 + 0j], x])
        blocks[md["psd_block"]] = herm_to_real(np.outer(xa, xa.conj()))
        if "t_block" in md:
            blocks[md["t_block"]] = t
    elif kind == "ESDR-Y":
        ya = np.concatenate([[1.0], x.real, x.imag])
        blocks[md["psd_block"]] = np.outer(ya, ya)
        blocks[md["t_block"]] = t
    elif kind in ("ESDR1-T", "ESDR2-T"):
        ta = np.concatenate([[1.0], t])
        blocks[md["psd_block"]] = np.outer(ta, ta)
        blocks[md["t_block"]] = t
    else:
        raise InvalidInput("unknown sdr_kind %r" % (kind,))
    return blocks
