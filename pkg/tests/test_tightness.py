import numpy as np
import pytest

from psksdr.errors import InvalidInput, Unsupported
from psksdr.model import compute_z, derive_problem, sample_instance
from psksdr.tightness import (
    DualCertificate,
    check_condition_14,
    check_condition_15,
    check_condition_16,
    check_condition_real_binary,
    check_esdr1_necessary,
    esdrx_dual_from_z,
    esdry_certificate_check,
    esdry_inequality_coeffs,
    evaluate_report,
    tightness_probability_bound,
)


def noiseless_instance(seed=0, m=6, n=3, M=8):
    rng = np.random.default_rng(seed)
    inst = sample_instance(m, n, M, 10.0, rng)
    return inst.__class__(
        m=inst.m, n=inst.n, M=inst.M, snr_db=inst.snr_db, H=inst.H,
        v=np.zeros_like(inst.v), xstar=inst.xstar,
        r=inst.H @ inst.xstar, sigma2=inst.sigma2, ustar=inst.ustar,
    )


def test_noiseless_satisfies_everything():
    inst = noiseless_instance()
    pd = derive_problem(inst)
    z = compute_z(inst)
    assert check_condition_14(pd, inst)
    assert check_condition_15(pd, z, inst.M)[0]
    assert check_condition_16(pd, z, inst.M)[0]
    assert check_esdr1_necessary(z)
    rep = evaluate_report(pd, inst)
    assert rep.esdrx_sufficient_14 and rep.esdrx_iff_15 and rep.esdry_necessary_16


def test_large_noise_breaks_iff_condition():
    rng = np.random.default_rng(1)
    inst = sample_instance(8, 4, 8, -20.0, rng)  # noise dominates
    pd = derive_problem(inst)
    z = compute_z(inst)
    assert not check_condition_14(pd, inst)
    ok15, eig15 = check_condition_15(pd, z, inst.M)
    assert not ok15 and eig15 < 0


def test_implication_chain_on_random_instances():
    rng = np.random.default_rng(2)
    for _ in range(200):
        snr = rng.uniform(0.0, 25.0)
        M = int(rng.choice([4, 8, 16]))
        inst = sample_instance(8, 4, M, snr, rng)
        pd = derive_problem(inst)
        z = compute_z(inst)
        c14 = check_condition_14(pd, inst)
        c15, _ = check_condition_15(pd, z, M)
        c16, _ = check_condition_16(pd, z, M)
        assert (not c14) or c15
        assert (not c15) or c16


def test_m4_uses_zero_cot_in_necessary_condition():
    # for M = 4 the necessary condition reduces to Q + Diag(Re z) >= 0
    rng = np.random.default_rng(3)
    inst = sample_instance(6, 3, 4, 5.0, rng)
    pd = derive_problem(inst)
    z = compute_z(inst)
    _, eig16 = check_condition_16(pd, z, 4)
    ref = np.linalg.eigvalsh(pd.Q + np.diag(z.real))[0]
    assert eig16 == pytest.approx(ref, abs=1e-9)


def test_m2_rejected_by_psk_conditions():
    rng = np.random.default_rng(4)
    inst = sample_instance(4, 2, 2, 10.0, rng)
    pd = derive_problem(inst)
    with pytest.raises(Unsupported):
        check_condition_14(pd, inst)


def test_real_binary_condition():
    H = np.eye(2)
    x = np.array([1.0, -1.0])
    assert check_condition_real_binary(H, np.array([0.1, 0.1]), x)
    # large noise against the symbol sign makes the shifted matrix indefinite
    assert not check_condition_real_binary(H, np.array([-2.0, 0.0]),
                                           np.array([1.0, 1.0]))
    with pytest.raises(InvalidInput):
        check_condition_real_binary(H, np.zeros(2), np.array([1.0, 0.5]))


def test_esdrx_dual_formula():
    z = np.array([1.0 + 0.5j, -0.2 - 0.1j])
    cert = esdrx_dual_from_z(z, 8)
    cot = 1.0 / np.tan(np.pi / 8)
    assert np.allclose(cert.lam, z.real - np.abs(z.imag) * cot)


def test_esdry_certificate_roundtrip_noiseless():
    # noiseless case: z = 0, lam = mu = 0 satisfies every inequality
    # (rhs = 0) and the PSD condition (Qhat >= 0)
    inst = noiseless_instance(seed=5)
    pd = derive_problem(inst)
    z = compute_z(inst)
    ineqs = esdry_inequality_coeffs(inst, z, inst.M)
    assert len(ineqs) == inst.n * (inst.M - 1)
    cert = DualCertificate(lam=np.zeros(2 * inst.n), mu=np.zeros(inst.n))
    assert esdry_certificate_check(pd, cert, ineqs)
    # a hugely positive lambda violates the inequalities
    bad = DualCertificate(lam=np.full(2 * inst.n, 1e6), mu=np.zeros(inst.n))
    assert not esdry_certificate_check(pd, bad, ineqs)


def test_probability_bounds():
    assert tightness_probability_bound(2, 3) == pytest.approx(0.125)
    assert tightness_probability_bound(8, 2) == pytest.approx(0.0625)
    with pytest.raises(InvalidInput):
        tightness_probability_bound(6, 2)
