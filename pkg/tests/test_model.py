import numpy as np
import pytest

from psksdr.errors import InvalidInput
from psksdr.linalg import herm_to_real
from psksdr.model import (
    compute_z,
    derive_problem,
    instance_from_json,
    instance_to_json,
    make_symbol_set,
    ml_objective,
    nearest_symbols,
    sample_instance,
)


def test_symbol_set_roots_of_unity():
    for M in (2, 4, 8, 16):
        ss = make_symbol_set(M)
        assert np.allclose(ss.symbols ** M, 1.0)
        assert np.allclose(np.abs(ss.symbols), 1.0)
        assert ss.symbols[0] == 1.0 + 0.0j
    for bad in (3, 6, 1, 0):
        with pytest.raises(InvalidInput):
            make_symbol_set(bad)


def test_sample_instance_model_equation():
    rng = np.random.default_rng(0)
    inst = sample_instance(6, 3, 8, 12.0, rng)
    assert np.allclose(inst.r, inst.H @ inst.xstar + inst.v)
    assert inst.sigma2 == pytest.approx(10.0 ** (-1.2))
    assert np.allclose(inst.xstar, make_symbol_set(8).symbols[inst.ustar])


def test_noise_variance_statistics():
    rng = np.random.default_rng(1)
    snr_db = 7.0
    vs = np.concatenate([
        sample_instance(50, 1, 4, snr_db, rng).v for _ in range(200)
    ])
    emp = np.mean(np.abs(vs) ** 2)
    assert emp == pytest.approx(10.0 ** (-0.7), rel=0.1)


def test_derive_problem_identities():
    rng = np.random.default_rng(2)
    inst = sample_instance(5, 3, 4, 10.0, rng)
    pd = derive_problem(inst)
    assert np.allclose(pd.Q, inst.H.conj().T @ inst.H, atol=1e-12)
    assert np.allclose(pd.Qhat, herm_to_real(pd.Q), atol=1e-12)
    assert np.allclose(pd.Qbar, pd.Shat.T @ pd.Qhat @ pd.Shat, atol=1e-12)
    assert np.allclose(pd.cbar, pd.Shat.T @ pd.chat, atol=1e-12)
    # Shat maps a one-hot weight vector to the split symbol coordinates
    ss = make_symbol_set(4)
    t = np.zeros(12)
    t[[1, 4 + 2, 8 + 3]] = 1.0
    y = pd.Shat @ t
    x = ss.symbols[[1, 2, 3]]
    assert np.allclose(y, np.concatenate([x.real, x.imag]))
    # K_j are rank-one with the advertised moment pattern
    for j in range(4):
        k = np.array([1.0, ss.sR[j], ss.sI[j]])
        assert np.allclose(pd.K[j], np.outer(k, k))
    # real doubling of the channel matches the complex action
    xr = np.concatenate([inst.xstar.real, inst.xstar.imag])
    hx = pd.Hhat @ xr
    assert np.allclose(hx, np.concatenate([(inst.H @ inst.xstar).real,
                                           (inst.H @ inst.xstar).imag]))


def test_compute_z_and_objective():
    rng = np.random.default_rng(3)
    inst = sample_instance(6, 2, 8, 15.0, rng)
    z = compute_z(inst)
    assert np.allclose(z, np.conj(inst.xstar) * (inst.H.conj().T @ inst.v))
    x = make_symbol_set(8).symbols[[0, 5]]
    direct = np.linalg.norm(inst.H @ x - inst.r) ** 2
    assert ml_objective(inst, x) == pytest.approx(direct)


def test_nearest_symbols_and_ties():
    ss = make_symbol_set(4)
    x = np.array([0.9 + 0.05j, -0.1 - 0.8j])
    sym, idx = nearest_symbols(x, ss)
    assert list(idx) == [0, 3]
    assert np.allclose(sym, ss.symbols[[0, 3]])
    # exactly equidistant point (BPSK symbols are exact): first index wins
    _, idx = nearest_symbols(np.array([0.0 + 0.0j]), make_symbol_set(2))
    assert idx[0] == 0


def test_json_round_trip():
    rng = np.random.default_rng(4)
    inst = sample_instance(4, 3, 8, 9.0, rng)
    back = instance_from_json(instance_to_json(inst))
    assert back.m == inst.m and back.n == inst.n and back.M == inst.M
    assert np.allclose(back.H, inst.H)
    assert np.allclose(back.v, inst.v)
    assert np.array_equal(back.ustar, inst.ustar)
    assert np.allclose(back.r, inst.r)
