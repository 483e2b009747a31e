"""First-order operator-splitting solver for the standard-form programs.

Splitting on  min c.u  s.t.  A u = b,  u in K  (K = product of PSD cones and
a nonnegative orthant):

    affine step   x  <- argmin_{Au=b} c.x + (rho/2)||x - (z - w)||^2
    cone step     z  <- Pi_K(alpha x + (1-alpha) z + w)
    dual step     w  <- w + alpha x + (1-alpha) z - z

The affine step reuses a cached Cholesky factorization of A A^T (+ ridge).
Cone projection is an eigenvalue clip per PSD block and a clamp at zero on
the orthant.  Dual estimate y = -rho * nu from the normal-equation
multiplier; s = -rho * w in K* at convergence.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from ._kernels import eigh_kernel
from .errors import NumericalBreakdown
from .sdr import ConicProgram, svec_size

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 50_000
    eps_primal: float = 1e-9
    eps_dual: float = 1e-9
    eps_gap: float = 1e-9
    over_relaxation: float = 1.0
    check_every: int = 25
    rho: float = 1.0
    # residual balancing: scale rho when primal/dual residuals drift apart
    adaptive_rho: bool = True
    rho_balance: float = 10.0
    rho_scale: float = 2.0


@dataclass(frozen=True)
class SolveStatus:
    kind: str  # "Solved" | "MaxIters" | "NumericalBreakdown"
    primal_res: float
    dual_res: float
    gap: float
    iterations: int


def _psd_project_svec(chunk, d, iu, ju, offdiag):
    """Project one svec'd block onto the PSD cone in place-free form."""
    m = np.zeros((d, d))
    vals = chunk.copy()
    vals[offdiag] /= _SQRT2
    m[iu, ju] = vals
    m[ju, iu] = vals
    w, v = eigh_kernel(m)
    if w[0] >= 0.0:
        return chunk
    pos = w > 0.0
    proj = (v[:, pos] * w[pos]) @ v[:, pos].T
    out = proj[iu, ju]
    out[offdiag] *= _SQRT2
    return out


class _ConeProjector:
    def __init__(self, program: ConicProgram):
        self._plan = []
        pos = 0
        for blk in program.blocks:
            size = blk.size
            if blk.kind == "PSD":
                iu, ju = np.triu_indices(blk.dim)
                self._plan.append(("PSD", pos, size, blk.dim, iu, ju, iu != ju))
            else:
                self._plan.append(("NONNEG", pos, size, None, None, None, None))
            pos += size

    def __call__(self, u):
        out = u.copy()
        for kind, pos, size, d, iu, ju, off in self._plan:
            if kind == "PSD":
                out[pos:pos + size] = _psd_project_svec(u[pos:pos + size], d, iu, ju, off)
            else:
                np.maximum(out[pos:pos + size], 0.0, out=out[pos:pos + size])
        return out


def solve(program: ConicProgram, cfg: SolverConfig = SolverConfig(),
          trace=None, warm_start=None):
    """Run the splitting iteration; returns (status, blocks, dual, objective).

    ``trace`` may be a writable text stream receiving per-check CSV rows
    (iter, primal_res, dual_res, gap).  ``warm_start`` accepts the (z, w)
    pair returned inside a previous status for sweeps over related programs.
    """
    A = sp.csr_matrix(program.A)
    b = program.b.astype(np.float64)
    c = program.cost.astype(np.float64)
    nvar = c.shape[0]

    # normalize constraint rows: well-scaled AA^T and uniform residual meaning
    row_norms = np.sqrt(np.asarray(A.multiply(A).sum(axis=1)).ravel())
    d_scale = 1.0 / np.maximum(row_norms, 1e-12)
    As = sp.diags(d_scale) @ A
    bs = d_scale * b
    AsT = As.T.tocsr()

    gram = (As @ AsT).toarray()
    gram[np.diag_indices_from(gram)] += 1e-12
    try:
        cho = sla.cho_factor(gram, lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise NumericalBreakdown("Cholesky of A A^T failed: %s" % exc)

    project = _ConeProjector(program)
    rho = cfg.rho
    alpha = cfg.over_relaxation
    c_over_rho = c / rho

    if warm_start is not None:
        z = warm_start[0].copy()
        w = warm_start[1].copy()
    else:
        z = np.zeros(nvar)
        w = np.zeros(nvar)

    bnorm = 1.0 + np.linalg.norm(bs)
    cnorm = 1.0 + np.linalg.norm(c)

    writer = csv.writer(trace) if trace is not None else None
    if writer is not None:
        writer.writerow(["iter", "primal_res", "dual_res", "gap"])

    status = None
    nu = np.zeros(len(bs))
    it = 0
    for it in range(1, cfg.max_iters + 1):
        t = z - w - c_over_rho
        nu = sla.cho_solve(cho, As @ t - bs, check_finite=False)
        x = t - AsT @ nu
        xh = alpha * x + (1.0 - alpha) * z
        v = xh + w
        z_new = project(v)
        w = v - z_new
        z_prev, z = z, z_new

        if it % cfg.check_every == 0 or it == cfg.max_iters:
            primal = np.linalg.norm(As @ z - bs) / bnorm
            y = -rho * nu
            s = -rho * w
            dual = np.linalg.norm(c - AsT @ y - s) / cnorm
            pobj = c @ z
            dobj = bs @ y
            gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
            if writer is not None:
                writer.writerow([it, primal, dual, gap])
            if primal <= cfg.eps_primal and dual <= cfg.eps_dual and gap <= cfg.eps_gap:
                status = SolveStatus("Solved", primal, dual, gap, it)
                break
            if cfg.adaptive_rho:
                # the affine-step factorization is rho-free, so rescaling rho
                # only requires rescaling the (scaled) dual iterate w
                if primal > cfg.rho_balance * dual:
                    rho *= cfg.rho_scale
                    w /= cfg.rho_scale
                    c_over_rho = c / rho
                elif dual > cfg.rho_balance * primal:
                    rho /= cfg.rho_scale
                    w *= cfg.rho_scale
                    c_over_rho = c / rho
    if status is None:
        primal = np.linalg.norm(As @ z - bs) / bnorm
        y = -rho * nu
        s = -rho * w
        dual = np.linalg.norm(c - AsT @ y - s) / cnorm
        pobj = c @ z
        gap = abs(pobj - bs @ y) / (1.0 + abs(pobj) + abs(bs @ y))
        status = SolveStatus("MaxIters", primal, dual, gap, it)

    blocks = program.split(z)
    dual_vec = d_scale * (-rho * nu)
    objective = float(c @ z)
    return status, blocks, dual_vec, objective


def rank_of_block(block_value, rel_tol: float) -> int:
    """Number of eigenvalues above rel_tol * lambda_max (0 if none positive)."""
    w, _ = eigh_kernel(np.asarray(block_value, dtype=np.float64))
    lam_max = w[-1]
    if lam_max <= 0.0:
        return 0
    return int(np.sum(w > rel_tol * lam_max))
