"""MIMO channel instances and derived problem data.

An instance is one realization r = H x* + v with x* drawn entrywise from the
M-PSK constellation.  ``derive_problem`` produces every matrix used by the
relaxation builders:

    Q = H^dag H,  c = -H^dag r,
    Qhat / chat   real doubling of (Q, c),
    Shat          [I_n (x) sR^T ; I_n (x) sI^T],
    Qbar = Shat^T Qhat Shat,  cbar = Shat^T chat,
    K_j           rank-one extreme points of the per-symbol 3x3 hull.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput
from .linalg import herm_to_real

SERIALIZATION_INDEX_CONVENTION = "ustar indices are 0-based in serialized form"


@dataclass(frozen=True)
class SymbolSet:
    """M-PSK constellation s_j = exp(2*pi*1j*(j-1)/M), 1-based j in the docs."""

    M: int
    symbols: np.ndarray
    sR: np.ndarray
    sI: np.ndarray


def make_symbol_set(M: int) -> SymbolSet:
    if M < 2 or (M & (M - 1)) != 0:
        raise InvalidInput("M must be a power of two >= 2, got %r" % (M,))
    theta = 2.0 * np.pi * np.arange(M) / M
    symbols = np.exp(1j * theta)
    return SymbolSet(M=M, symbols=symbols, sR=symbols.real.copy(), sI=symbols.imag.copy())


@dataclass(frozen=True)
class MimoInstance:
    m: int
    n: int
    M: int
    snr_db: float
    H: np.ndarray
    v: np.ndarray
    xstar: np.ndarray
    r: np.ndarray
    sigma2: float
    ustar: np.ndarray  # 0-based symbol indices
    seed: object = None

    @property
    def symbol_set(self) -> SymbolSet:
        return make_symbol_set(self.M)


@dataclass(frozen=True)
class ProblemData:
    Q: np.ndarray      # n x n complex Hermitian, PSD
    c: np.ndarray      # complex n-vector
    Qhat: np.ndarray   # 2n x 2n real symmetric
    chat: np.ndarray   # real 2n-vector
    Shat: np.ndarray   # real 2n x Mn
    Qbar: np.ndarray   # Mn x Mn real symmetric
    cbar: np.ndarray   # real Mn-vector
    K: np.ndarray      # M x 3 x 3 rank-one PSD extreme points
    Hhat: np.ndarray   # real 2m x 2n
    vhat: np.ndarray   # real 2m-vector


def sample_instance(m, n, M, snr_db, rng) -> MimoInstance:
    """Draw H ~ CN(0,1), v ~ CN(0, sigma^2) with sigma^2 = 10^(-snr_db/10),
    and x* uniform over the M-PSK set.  SNR convention: SNR = 1/sigma^2."""
    if m < 1 or n < 1:
        raise InvalidInput("m, n must be >= 1")
    ss = make_symbol_set(M)
    sigma2 = 10.0 ** (-snr_db / 10.0)
    H = rng.normal(scale=np.sqrt(0.5), size=(m, n)) + 1j * rng.normal(
        scale=np.sqrt(0.5), size=(m, n)
    )
    v = rng.normal(scale=np.sqrt(sigma2 / 2.0), size=m) + 1j * rng.normal(
        scale=np.sqrt(sigma2 / 2.0), size=m
    )
    ustar = rng.integers(0, M, size=n)
    xstar = ss.symbols[ustar]
    r = H @ xstar + v
    return MimoInstance(
        m=m, n=n, M=M, snr_db=float(snr_db), H=H, v=v, xstar=xstar, r=r,
        sigma2=float(sigma2), ustar=ustar,
    )


def derive_problem(inst: MimoInstance) -> ProblemData:
    ss = inst.symbol_set
    n, M = inst.n, inst.M
    Q = inst.H.conj().T @ inst.H
    Q = 0.5 * (Q + Q.conj().T)
    c = -inst.H.conj().T @ inst.r
    Qhat = herm_to_real(Q)
    chat = np.concatenate([c.real, c.imag])
    Shat = np.vstack([np.kron(np.eye(n), ss.sR), np.kron(np.eye(n), ss.sI)])
    Qbar = Shat.T @ Qhat @ Shat
    Qbar = 0.5 * (Qbar + Qbar.T)
    cbar = Shat.T @ chat
    K = np.empty((M, 3, 3))
    for j in range(M):
        k = np.array([1.0, ss.sR[j], ss.sI[j]])
        K[j] = np.outer(k, k)
    Hhat = np.block([[inst.H.real, -inst.H.imag], [inst.H.imag, inst.H.real]])
    vhat = np.concatenate([inst.v.real, inst.v.imag])
    return ProblemData(Q=Q, c=c, Qhat=Qhat, chat=chat, Shat=Shat, Qbar=Qbar,
                       cbar=cbar, K=K, Hhat=Hhat, vhat=vhat)


def compute_z(inst: MimoInstance) -> np.ndarray:
    """z_i = (x*_i)^{-1} (H^dag v)_i; since |x*_i| = 1 this is conj(x*_i)(H^dag v)_i."""
    hv = inst.H.conj().T @ inst.v
    return np.conj(inst.xstar) * hv


def ml_objective(inst: MimoInstance, x) -> float:
    d = inst.H @ np.asarray(x) - inst.r
    return float(np.real(d.conj() @ d))


def nearest_symbols(x, ss: SymbolSet):
    """Round each entry to the closest constellation symbol (ties -> smaller index)."""
    x = np.asarray(x)
    d = np.abs(x[:, None] - ss.symbols[None, :])
    idx = np.argmin(d, axis=1)  # argmin takes the first (smallest) index on ties
    return ss.symbols[idx], idx


def instance_to_json(inst: MimoInstance) -> str:
    doc = {
        "index_convention": SERIALIZATION_INDEX_CONVENTION,
        "m": inst.m,
        "n": inst.n,
        "M": inst.M,
        "snr_db": inst.snr_db,
        "seed": inst.seed,
        "H_re": inst.H.real.ravel().tolist(),
        "H_im": inst.H.imag.ravel().tolist(),
        "v_re": inst.v.real.tolist(),
        "v_im": inst.v.imag.tolist(),
        "ustar": inst.ustar.tolist(),
    }
    return json.dumps(doc)


def instance_from_json(text: str) -> MimoInstance:
    doc = json.loads(text)
    m, n, M = int(doc["m"]), int(doc["n"]), int(doc["M"])
    H = (np.array(doc["H_re"]) + 1j * np.array(doc["H_im"])).reshape(m, n)
    v = np.array(doc["v_re"]) + 1j * np.array(doc["v_im"])
    ustar = np.array(doc["ustar"], dtype=np.int64)
    ss = make_symbol_set(M)
    xstar = ss.symbols[ustar]
    snr_db = float(doc["snr_db"])
    return MimoInstance(
        m=m, n=n, M=M, snr_db=snr_db, H=H, v=v, xstar=xstar, r=H @ xstar + v,
        sigma2=10.0 ** (-snr_db / 10.0), ustar=ustar, seed=doc.get("seed"),
    )
