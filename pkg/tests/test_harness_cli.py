import csv
import io
import json

import numpy as np
import pytest

from psksdr.cli import main
from psksdr.errors import InvalidInput
from psksdr.harness import (
    ExperimentConfig,
    run_equivalence_table,
    run_sweep,
    run_timing,
    write_sweep_csv,
)
from psksdr.model import instance_to_json, sample_instance
from psksdr.solver import SolverConfig

FAST = SolverConfig(eps_primal=1e-6, eps_dual=1e-6, eps_gap=1e-6, max_iters=30000)

SMALL = ExperimentConfig(
    m=4, n=2, M=4, snr_grid_db=(10.0,), trials_per_point=4,
    models=("CSDR", "ESDR-Y"), conditions=("c15", "c16"),
    master_seed=11, solver=FAST,
)


def test_sweep_is_deterministic_and_well_formed():
    rows1 = run_sweep(SMALL)
    rows2 = run_sweep(SMALL)
    assert len(rows1) == 1
    r1, r2 = rows1[0], rows2[0]
    assert r1.tight_freq == r2.tight_freq
    assert r1.mean_objective == r2.mean_objective
    assert r1.trials == 4 and r1.failures == 0
    for f in list(r1.tight_freq.values()) + list(r1.cond_freq.values()):
        assert 0.0 <= f <= 1.0


def test_sweep_invariant_to_worker_count():
    serial = run_sweep(SMALL)
    parallel = run_sweep(ExperimentConfig(**{**SMALL.__dict__, "workers": 2}))
    assert serial[0].tight_freq == parallel[0].tight_freq
    assert serial[0].mean_objective == parallel[0].mean_objective


def test_config_validation():
    with pytest.raises(InvalidInput):
        run_sweep(ExperimentConfig(trials_per_point=0))
    with pytest.raises(InvalidInput):
        ExperimentConfig(models=("NOPE",)).validated()


def test_equivalence_table_small():
    cfg = ExperimentConfig(m=4, n=2, M=4, snr_grid_db=(5.0,),
                           trials_per_point=3, master_seed=1,
                           solver=SolverConfig(eps_primal=1e-8, eps_dual=1e-8,
                                               eps_gap=1e-8, max_iters=60000))
    table = run_equivalence_table(cfg)
    assert table[0]["mean_rel_diff"] < 1e-4
    assert table[0]["trials"] == 3


def test_timing_rows():
    cfg = ExperimentConfig(m=6, M=4, snr_grid_db=(10.0,), trials_per_point=1,
                           models=("ESDR-Y", "ESDR2-T"), master_seed=2,
                           solver=FAST, n_grid=(2, 3))
    rows = run_timing(cfg)
    assert [r["n"] for r in rows] == [2, 3]
    for r in rows:
        assert r["time_ESDR-Y"] > 0 and r["ratio_2T_over_Y"] > 0


def test_sweep_csv_format():
    rows = run_sweep(SMALL)
    buf = io.StringIO()
    write_sweep_csv(rows, SMALL, buf)
    lines = buf.getvalue().strip().splitlines()
    header = lines[0].split(",")
    assert header[0] == "snr_db"
    assert "tight_CSDR" in header and "cond_c15" in header
    parsed = next(csv.DictReader(io.StringIO(buf.getvalue())))
    assert float(parsed["snr_db"]) == 10.0


def test_cli_check_solve_oracle(tmp_path, capsys):
    rng = np.random.default_rng(0)
    inst = sample_instance(4, 2, 4, 15.0, rng)
    path = tmp_path / "inst.json"
    path.write_text(instance_to_json(inst))

    main(["check", str(path)])
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) >= {"esdrx_iff_15", "esdry_necessary_16"}

    main(["solve", str(path), "--model", "ESDR-Y"])
    doc = json.loads(capsys.readouterr().out)
    assert doc["status"] == "Solved"

    main(["oracle", str(path)])
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["u"]) == 2


def test_cli_simulate_to_file(tmp_path):
    out = tmp_path / "sweep.csv"
    main(["simulate", "--m", "4", "--n", "2", "--M", "4", "--trials", "2",
          "--snr", "12", "--models", "ESDR-Y", "--seed", "3",
          "--out", str(out)])
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("snr_db,")
    assert len(lines) == 2


def test_cli_config_file(tmp_path):
    cfgfile = tmp_path / "exp.toml"
    cfgfile.write_text(
        'm = 4\nn = 2\nM = 4\nsnr_grid_db = [9.0]\ntrials_per_point = 2\n'
        'models = ["ESDR-Y"]\nmaster_seed = 5\n\n[solver]\neps_primal = 1e-6\n'
        'eps_dual = 1e-6\neps_gap = 1e-6\n'
    )
    out = tmp_path / "o.csv"
    main(["simulate", "--config", str(cfgfile), "--out", str(out)])
    assert out.read_text().startswith("snr_db,")


def test_cli_lift_restrict_round_trip(tmp_path, capsys):
    from psksdr.model import derive_problem

    rng = np.random.default_rng(4)
    inst = sample_instance(4, 2, 4, 10.0, rng)
    pd = derive_problem(inst)
    t = np.zeros(8)
    t[[0, 4 + 1]] = 1.0
    T = np.outer(t, t)
    y, Y = pd.Shat @ t, pd.Shat @ T @ pd.Shat.T
    doc = {"P": pd.Shat.tolist(), "y": y.tolist(), "Y": Y.tolist(),
           "t": t.tolist(), "T": T.tolist()}
    p = tmp_path / "point.json"
    p.write_text(json.dumps(doc))
    main(["restrict", str(p)])
    groups = json.loads(capsys.readouterr().out)
    doc2 = {"P": pd.Shat.tolist(), "y": y.tolist(), "Y": Y.tolist(),
            "group_t": groups["group_t"], "group_T": groups["group_T"]}
    p2 = tmp_path / "dec.json"
    p2.write_text(json.dumps(doc2))
    main(["lift", str(p2)])
    lifted = json.loads(capsys.readouterr().out)
    assert np.max(np.abs(np.array(lifted["t"]) - t)) < 1e-8
    assert np.max(np.abs(pd.Shat @ np.array(lifted["T"]) @ pd.Shat.T - Y)) < 1e-8
