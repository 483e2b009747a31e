"""Solver checks against analytically solvable programs."""

import io

import numpy as np
import pytest
import scipy.sparse as sp

from psksdr.model import derive_problem, sample_instance
from psksdr.sdr import BUILDERS, ConeBlock, ConicProgram, extract_xhat, svec
from psksdr.solver import SolverConfig, rank_of_block, solve

TIGHT = SolverConfig(eps_primal=1e-9, eps_dual=1e-9, eps_gap=1e-9)


def make_program(blocks, cost, rows, b):
    nvar = sum(blk.size for blk in blocks)
    A = sp.csr_matrix(np.array(rows, dtype=float).reshape(len(b), nvar))
    return ConicProgram(blocks=tuple(blocks), cost=np.asarray(cost, float),
                        A=A, b=np.asarray(b, float), metadata={})


def test_min_trace_with_pinned_corner():
    # min <I, X> over PSD 2x2 with X00 = 1 -> optimum 1 at X = e0 e0^T
    blocks = [ConeBlock("PSD", 2)]
    cost = svec(np.eye(2))
    rows = [[1.0, 0.0, 0.0]]
    st, vals, _, obj = solve(make_program(blocks, cost, rows, [1.0]), TIGHT)
    assert st.kind == "Solved"
    assert obj == pytest.approx(1.0, abs=1e-7)
    assert np.allclose(vals[0], np.diag([1.0, 0.0]), atol=1e-6)


def test_max_offdiagonal_correlation():
    # min -2 X01 over PSD 2x2 with unit diagonal -> optimum -2 at all-ones
    blocks = [ConeBlock("PSD", 2)]
    cost = svec(np.array([[0.0, -1.0], [-1.0, 0.0]]))
    rows = [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]
    st, vals, _, obj = solve(make_program(blocks, cost, rows, [1.0, 1.0]), TIGHT)
    assert obj == pytest.approx(-2.0, abs=1e-7)
    assert np.allclose(vals[0], np.ones((2, 2)), atol=1e-6)


def test_linear_program_on_orthant():
    # min 2a + 3b s.t. a + b = 1, a, b >= 0 -> 2 at (1, 0)
    blocks = [ConeBlock("NONNEG", 2)]
    st, vals, _, obj = solve(
        make_program(blocks, [2.0, 3.0], [[1.0, 1.0]], [1.0]), TIGHT)
    assert obj == pytest.approx(2.0, abs=1e-7)
    assert np.allclose(vals[0], [1.0, 0.0], atol=1e-6)


def test_dual_vector_certifies_lp():
    # dual of the LP above: max y s.t. y <= 2, y <= 3 -> y = 2
    blocks = [ConeBlock("NONNEG", 2)]
    st, _, dual, _ = solve(
        make_program(blocks, [2.0, 3.0], [[1.0, 1.0]], [1.0]), TIGHT)
    assert dual[0] == pytest.approx(2.0, abs=1e-6)


def test_csdr_scalar_channel():
    # n = m = 1, H = [1], noiseless r = 1: CSDR cost 1 - 2 Re(x) over
    # |x| <= 1 attains -1 at x = 1
    rng = np.random.default_rng(0)
    inst = sample_instance(1, 1, 4, 30.0, rng)
    inst = inst.__class__(m=1, n=1, M=4, snr_db=30.0,
                          H=np.array([[1.0 + 0j]]), v=np.array([0.0 + 0j]),
                          xstar=np.array([1.0 + 0j]), r=np.array([1.0 + 0j]),
                          sigma2=1e-3, ustar=np.array([0]))
    pd = derive_problem(inst)
    program = BUILDERS["CSDR"](pd, inst)
    st, vals, _, obj = solve(program, TIGHT)
    assert obj == pytest.approx(-1.0, abs=1e-6)
    assert extract_xhat(vals, program)[0] == pytest.approx(1.0 + 0j, abs=1e-5)


def test_esdr_y_linear_vertex_solution():
    # ESDR-Y with Qhat = I: trace term is constant 1 on the hull, so the
    # model minimizes the linear part and lands on the best vertex
    rng = np.random.default_rng(1)
    inst = sample_instance(2, 1, 4, 40.0, rng)
    H = np.array([[1.0 + 0j], [0.0 + 0j]])
    x = np.array([1j])
    inst = inst.__class__(m=2, n=1, M=4, snr_db=40.0, H=H,
                          v=np.zeros(2, complex), xstar=x, r=H @ x,
                          sigma2=1e-4, ustar=np.array([1]))
    pd = derive_problem(inst)
    program = BUILDERS["ESDR-Y"](pd, inst)
    st, vals, _, obj = solve(program, TIGHT)
    # cost = <Qhat, Y> + 2 chat.y = 1 - 2 = -1 at y = (0, 1)
    assert obj == pytest.approx(-1.0, abs=1e-6)
    assert extract_xhat(vals, program)[0] == pytest.approx(1j, abs=1e-5)


def test_trace_csv_and_status_fields():
    blocks = [ConeBlock("PSD", 2)]
    cost = svec(np.eye(2))
    buf = io.StringIO()
    st, _, _, _ = solve(make_program(blocks, cost, [[1.0, 0.0, 0.0]], [1.0]),
                        SolverConfig(check_every=10), trace=buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "iter,primal_res,dual_res,gap"
    assert len(lines) >= 2
    assert st.iterations >= 10


def test_deterministic_iterates():
    rng = np.random.default_rng(2)
    inst = sample_instance(4, 2, 4, 10.0, rng)
    pd = derive_problem(inst)
    program = BUILDERS["ESDR-Y"](pd, inst)
    s1 = solve(program, TIGHT)
    s2 = solve(program, TIGHT)
    assert s1[0].iterations == s2[0].iterations
    assert s1[3] == s2[3]


def test_rank_of_block():
    assert rank_of_block(np.diag([1.0, 1e-12, 0.0]), 1e-6) == 1
    assert rank_of_block(np.diag([2.0, 1.0]), 1e-6) == 2
    assert rank_of_block(-np.eye(2), 1e-6) == 0
