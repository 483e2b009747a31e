"""Closed-form tightness certificates for the relaxations.

Implemented checks (with z_i = (x*_i)^{-1} (H^dag v)_i):

  * sufficient:    lambda_min(Q) sin(pi/M) > ||H^dag v||_inf
  * iff (ESDR-X):  Q + Diag(Re z) - cot(pi/M)  Diag(|Im z|) >= 0
  * necessary (Y): Q + Diag(Re z) - cot(2pi/M) Diag(|Im z|) >= 0
  * real binary:   H^T H + Diag(x*)^{-1} Diag(H^T v) >= 0
  * ESDR1-T necessary event: Re(z_i) >= 0 for all i

plus the dual-certificate validator for the ESDR-Y KKT system and the
(2/M)^n / (1/2)^n tightness probability bounds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, Unsupported
from .linalg import eig_sym, eigvals_herm, herm_to_real
from .model import MimoInstance, ProblemData

PSD_CERT_TOL = 1e-9


@dataclass(frozen=True)
class TightnessReport:
    esdrx_sufficient_14: bool
    esdrx_iff_15: bool
    esdry_necessary_16: bool
    esdr1_re_z_necessary: bool
    min_eig_15: float
    min_eig_16: float

    def to_json(self) -> str:
        return json.dumps({
            "esdrx_sufficient_14": self.esdrx_sufficient_14,
            "esdrx_iff_15": self.esdrx_iff_15,
            "esdry_necessary_16": self.esdry_necessary_16,
            "esdr1_re_z_necessary": self.esdr1_re_z_necessary,
            "min_eig_15": self.min_eig_15,
            "min_eig_16": self.min_eig_16,
        })


@dataclass(frozen=True)
class DualCertificate:
    lam: np.ndarray          # length n (ESDR-X) or 2n (ESDR-Y)
    mu: np.ndarray = None    # length n, ESDR-Y only


def _require_m_ge_4(M):
    if M < 4:
        raise Unsupported("condition defined for M >= 4, got M=%d" % M)


def check_condition_14(pd: ProblemData, inst: MimoInstance) -> bool:
    """Strict sufficient condition lambda_min(Q) sin(pi/M) > ||H^dag v||_inf."""
    _require_m_ge_4(inst.M)
    lam_min = eigvals_herm(pd.Q)[0]
    rhs = float(np.max(np.abs(inst.H.conj().T @ inst.v)))
    return bool(lam_min * np.sin(np.pi / inst.M) - rhs > 0.0)


def _shifted_psd_check(Q, z, cot_value):
    mat = Q + np.diag(z.real - cot_value * np.abs(z.imag)).astype(np.complex128)
    min_eig = float(eigvals_herm(mat)[0])
    scale = max(1.0, float(np.max(np.abs(mat))))
    return bool(min_eig >= -PSD_CERT_TOL * scale), min_eig


def check_condition_15(pd: ProblemData, z, M):
    """Iff condition for ESDR-X tightness; also returns the minimum eigenvalue."""
    _require_m_ge_4(M)
    return _shifted_psd_check(pd.Q, np.asarray(z), 1.0 / np.tan(np.pi / M))


def check_condition_16(pd: ProblemData, z, M):
    """Necessary condition for ESDR-Y tightness (cot(2pi/M) variant)."""
    _require_m_ge_4(M)
    cot = 0.0 if M == 4 else 1.0 / np.tan(2.0 * np.pi / M)
    return _shifted_psd_check(pd.Q, np.asarray(z), cot)


def check_condition_real_binary(H, v, xstar) -> bool:
    """Iff condition for the real-channel binary case."""
    H = np.asarray(H, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    xstar = np.asarray(xstar, dtype=np.float64)
    if not np.all(np.abs(xstar) == 1.0):
        raise InvalidInput("entries of xstar must be +1 or -1")
    mat = H.T @ H + np.diag((H.T @ v) / xstar)
    w = eig_sym(mat).eigenvalues
    scale = max(1.0, float(np.max(np.abs(mat))))
    return bool(w[0] >= -PSD_CERT_TOL * scale)


def check_esdr1_necessary(z) -> bool:
    """ESDR1-T tight implies Re(z_i) >= 0 for every i."""
    return bool(np.all(np.asarray(z).real >= 0.0))


def esdrx_dual_from_z(z, M) -> DualCertificate:
    """Extreme feasible dual: lambda_i = Re(z_i) - |Im(z_i)| cot(pi/M)."""
    z = np.asarray(z)
    lam = z.real - np.abs(z.imag) / np.tan(np.pi / M)
    return DualCertificate(lam=lam)


def esdry_inequality_coeffs(inst: MimoInstance, z, M):
    """Linear inequalities of the ESDR-Y dual feasibility system.

    One record per (i, j != u_i):
      coeff_lambda_i * lam_i + coeff_lambda_n_i * lam_{n+i} + coeff_mu_i * mu_i <= rhs
    with coefficients sin^2/cos^2 at theta_{u_i} + dtheta/2 and -sin(2theta_{u_i}+dtheta),
    and rhs = Re(z_i) - cot(dtheta/2) Im(z_i).
    """
    _require_m_ge_4(M)
    z = np.asarray(z)
    theta = 2.0 * np.pi * np.arange(M) / M
    records = []
    for i in range(inst.n):
        tu = theta[inst.ustar[i]]
        for j in range(M):
            if j == inst.ustar[i]:
                continue
            dtheta = theta[j] - tu
            half = tu + dtheta / 2.0
            records.append({
                "i": i,
                "j": j,
                "coeff_lambda_i": np.sin(half) ** 2,
                "coeff_lambda_n_i": np.cos(half) ** 2,
                "coeff_mu_i": -np.sin(2.0 * tu + dtheta),
                "rhs": z[i].real - z[i].imag / np.tan(dtheta / 2.0),
            })
    return records


def esdry_certificate_check(pd: ProblemData, cert: DualCertificate, ineqs) -> bool:
    """Validate a supplied (lambda, mu) for the ESDR-Y KKT system.

    True iff every linear inequality holds at the certificate (tol 1e-9) and
    Qhat + Diag(lambda) + [[0, Diag(mu)], [Diag(mu), 0]] is PSD.
    """
    n = pd.Q.shape[0]
    lam = np.asarray(cert.lam, dtype=np.float64)
    mu = np.asarray(cert.mu, dtype=np.float64) if cert.mu is not None else None
    if lam.shape != (2 * n,) or mu is None or mu.shape != (n,):
        raise InvalidInput("ESDR-Y certificate needs lambda in R^{2n}, mu in R^n")
    for rec in ineqs:
        i = rec["i"]
        lhs = (rec["coeff_lambda_i"] * lam[i]
               + rec["coeff_lambda_n_i"] * lam[n + i]
               + rec["coeff_mu_i"] * mu[i])
        if lhs > rec["rhs"] + 1e-9:
            return False
    mmat = np.zeros((2 * n, 2 * n))
    mmat[:n, n:] = np.diag(mu)
    mmat[n:, :n] = np.diag(mu)
    mat = pd.Qhat + np.diag(lam) + mmat
    w = eig_sym(mat).eigenvalues
    scale = max(1.0, float(np.max(np.abs(mat))))
    return bool(w[0] >= -PSD_CERT_TOL * scale)


def tightness_probability_bound(M: int, n: int) -> float:
    """(2/M)^n for M >= 4, (1/2)^n for M = 2."""
    if n < 1 or M < 2 or (M & (M - 1)) != 0:
        raise InvalidInput("need n >= 1 and M a power of two >= 2")
    if M == 2:
        return 0.5 ** n
    return (2.0 / M) ** n


def evaluate_report(pd: ProblemData, inst: MimoInstance, z=None) -> TightnessReport:
    from .model import compute_z

    if z is None:
        z = compute_z(inst)
    ok15, eig15 = check_condition_15(pd, z, inst.M)
    ok16, eig16 = check_condition_16(pd, z, inst.M)
    return TightnessReport(
        esdrx_sufficient_14=check_condition_14(pd, inst),
        esdrx_iff_15=ok15,
        esdry_necessary_16=ok16,
        esdr1_re_z_necessary=check_esdr1_necessary(z),
        min_eig_15=eig15,
        min_eig_16=eig16,
    )
