"""Monte Carlo experiment engine: tightness sweeps, objective-equivalence
tables, and timing comparisons, with trial-level parallelism.

Determinism contract: every trial owns a fresh generator seeded by
(master_seed, point_index, trial_index), so aggregated numbers do not depend
on the worker count or scheduling order.  Frequencies are accumulated as
exact rationals; means use compensated summation.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .errors import InvalidInput, NumericalBreakdown
from .model import compute_z, derive_problem, sample_instance
from .sdr import BUILDERS, SdrSolution, decide_tight, extract_xhat
from .solver import SolverConfig, solve
from .tightness import (
    check_condition_14,
    check_condition_15,
    check_condition_16,
    check_esdr1_necessary,
)

ALL_MODELS = ("CSDR", "ESDR-X", "ESDR-Y", "ESDR1-T", "ESDR2-T")
ALL_CONDITIONS = ("c14", "c15", "c16", "esdr1_rez")


@dataclass(frozen=True)
class ExperimentConfig:
    m: int = 16
    n: int = 10
    M: int = 8
    snr_grid_db: tuple = (3.0, 6.0, 9.0, 12.0, 15.0, 18.0, 21.0, 24.0)
    trials_per_point: int = 500
    models: tuple = ALL_MODELS
    conditions: tuple = ALL_CONDITIONS
    master_seed: int = 0
    # sweep default: tightness decisions compare xhat to x* at 1e-4; a 1e-7
    # residual target keeps the xhat error near 1e-5 (a decade of slack)
    # while staying much cheaper than the 1e-9 solver default
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(
        eps_primal=1e-7, eps_dual=1e-7, eps_gap=1e-7, max_iters=90_000))
    workers: int = 1
    n_grid: tuple = (4, 6, 8)   # used by run_timing
    output_path: str = None

    def validated(self):
        if self.trials_per_point < 1:
            raise InvalidInput("trials_per_point must be >= 1")
        if not self.snr_grid_db:
            raise InvalidInput("snr_grid_db must be nonempty")
        for mdl in self.models:
            if mdl not in ALL_MODELS:
                raise InvalidInput("unknown model %r" % (mdl,))
        for cond in self.conditions:
            if cond not in ALL_CONDITIONS:
                raise InvalidInput("unknown condition %r" % (cond,))
        return self


@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    trials: int
    failures: int
    tight_freq: dict       # model -> float in [0, 1]
    cond_freq: dict        # condition -> float in [0, 1]
    mean_objective: dict   # model -> float
    mean_iterations: dict  # model -> float
    wall_time: float


def _trial_rng(master_seed, point_index, trial):
    return np.random.default_rng([master_seed, point_index, trial])


def _eval_conditions(cfg, inst, pd, z):
    out = {}
    for cond in cfg.conditions:
        if cond == "c14":
            out[cond] = check_condition_14(pd, inst)
        elif cond == "c15":
            out[cond] = check_condition_15(pd, z, inst.M)[0]
        elif cond == "c16":
            out[cond] = check_condition_16(pd, z, inst.M)[0]
        elif cond == "esdr1_rez":
            out[cond] = check_esdr1_necessary(z)
    return out


def _run_trial(cfg: ExperimentConfig, point_index: int, snr_db: float, trial: int):
    rng = _trial_rng(cfg.master_seed, point_index, trial)
    inst = sample_instance(cfg.m, cfg.n, cfg.M, snr_db, rng)
    pd = derive_problem(inst)
    z = compute_z(inst)
    conds = _eval_conditions(cfg, inst, pd, z)
    result = {"conditions": conds, "models": {}, "failed": False}
    for kind in cfg.models:
        program = BUILDERS[kind](pd, inst)
        try:
            status, blocks, _, objective = solve(program, cfg.solver)
        except NumericalBreakdown:
            result["failed"] = True
            result["models"][kind] = None
            continue
        xhat = extract_xhat(blocks, program)
        result["models"][kind] = {
            "tight": decide_tight(xhat, inst.xstar),
            "objective": objective,
            "iterations": status.iterations,
            "status": status.kind,
        }
    return result


def _trial_star(args):
    return _run_trial(*args)


def _map_trials(cfg, tasks):
    if cfg.workers and cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(_trial_star, tasks, chunksize=4))
    return [_trial_star(t) for t in tasks]


def run_sweep(cfg: ExperimentConfig):
    """Tightness / condition frequency sweep over the SNR grid."""
    cfg.validated()
    rows = []
    for p, snr_db in enumerate(cfg.snr_grid_db):
        t0 = time.perf_counter()
        tasks = [(cfg, p, snr_db, t) for t in range(cfg.trials_per_point)]
        results = _map_trials(cfg, tasks)
        failures = sum(1 for r in results if r["failed"])
        ok = [r for r in results if not r["failed"]]
        denom = max(len(ok), 1)
        tight = {}
        mean_obj = {}
        mean_it = {}
        for kind in cfg.models:
            cnt = Fraction(sum(1 for r in ok if r["models"][kind]["tight"]), denom)
            tight[kind] = float(cnt)
            mean_obj[kind] = math.fsum(r["models"][kind]["objective"] for r in ok) / denom
            mean_it[kind] = math.fsum(r["models"][kind]["iterations"] for r in ok) / denom
        cond = {}
        for c in cfg.conditions:
            cond[c] = float(Fraction(sum(1 for r in ok if r["conditions"][c]), denom))
        rows.append(SweepRow(
            snr_db=float(snr_db), trials=len(results), failures=failures,
            tight_freq=tight, cond_freq=cond, mean_objective=mean_obj,
            mean_iterations=mean_it, wall_time=time.perf_counter() - t0,
        ))
    return rows


def run_equivalence_table(cfg: ExperimentConfig):
    """Mean relative objective difference |opt_Y - opt_2T| / |opt_2T| per cell."""
    cfg = replace(cfg, models=("ESDR-Y", "ESDR2-T")).validated()
    table = []
    for p, snr_db in enumerate(cfg.snr_grid_db):
        tasks = [(cfg, p, snr_db, t) for t in range(cfg.trials_per_point)]
        results = _map_trials(cfg, tasks)
        failures = sum(1 for r in results if r["failed"])
        ok = [r for r in results if not r["failed"]]
        diffs = [
            abs(r["models"]["ESDR-Y"]["objective"] - r["models"]["ESDR2-T"]["objective"])
            / abs(r["models"]["ESDR2-T"]["objective"])
            for r in ok
        ]
        table.append({
            "m": cfg.m, "n": cfg.n, "snr_db": float(snr_db),
            "trials": len(results), "failures": failures,
            "mean_rel_diff": math.fsum(diffs) / max(len(diffs), 1),
        })
    return table


def run_timing(cfg: ExperimentConfig):
    """Per-model mean wall-clock solve time across the n grid; includes the
    time(ESDR2-T)/time(ESDR-Y) ratio when both models are requested."""
    cfg.validated()
    snr_db = cfg.snr_grid_db[0]
    rows = []
    for p, n in enumerate(cfg.n_grid):
        per_model = {kind: [] for kind in cfg.models}
        iters = {kind: [] for kind in cfg.models}
        for t in range(cfg.trials_per_point):
            rng = _trial_rng(cfg.master_seed, p, t)
            inst = sample_instance(cfg.m, int(n), cfg.M, snr_db, rng)
            pd = derive_problem(inst)
            for kind in cfg.models:
                program = BUILDERS[kind](pd, inst)
                t0 = time.perf_counter()
                status, _, _, _ = solve(program, cfg.solver)
                per_model[kind].append(time.perf_counter() - t0)
                iters[kind].append(status.iterations)
        row = {"n": int(n)}
        for kind in cfg.models:
            row["time_%s" % kind] = math.fsum(per_model[kind]) / len(per_model[kind])
            row["iters_%s" % kind] = math.fsum(iters[kind]) / len(iters[kind])
        if "ESDR-Y" in cfg.models and "ESDR2-T" in cfg.models:
            row["ratio_2T_over_Y"] = row["time_ESDR2-T"] / row["time_ESDR-Y"]
        rows.append(row)
    return rows


def solve_model(inst, pd, kind, solver_cfg=None) -> SdrSolution:
    """Build and solve one relaxation; package the result."""
    if kind not in BUILDERS:
        raise InvalidInput("unknown model %r" % (kind,))
    program = BUILDERS[kind](pd, inst)
    status, blocks, _, objective = solve(program, solver_cfg or SolverConfig())
    xhat = extract_xhat(blocks, program)
    return SdrSolution(
        objective=objective,
        xhat=xhat,
        matrix_part=blocks,
        residuals={"primal": status.primal_res, "dual": status.dual_res,
                   "gap": status.gap},
        tight=decide_tight(xhat, inst.xstar),
        iterations=status.iterations,
        status=status.kind,
    )


def _fmt(x):
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


def write_sweep_csv(rows, cfg: ExperimentConfig, stream):
    header = ["snr_db", "trials", "failures"]
    header += ["tight_%s" % k for k in cfg.models]
    header += ["cond_%s" % c for c in cfg.conditions]
    header += ["objective_%s" % k for k in cfg.models]
    header += ["iterations_%s" % k for k in cfg.models]
    header += ["wall_time"]
    w = csv.writer(stream)
    w.writerow(header)
    for r in rows:
        cells = [r.snr_db, r.trials, r.failures]
        cells += [r.tight_freq[k] for k in cfg.models]
        cells += [r.cond_freq[c] for c in cfg.conditions]
        cells += [r.mean_objective[k] for k in cfg.models]
        cells += [r.mean_iterations[k] for k in cfg.models]
        cells += [r.wall_time]
        w.writerow([_fmt(x) for x in cells])


def write_table_csv(rows, stream):
    if not rows:
        return
    header = list(rows[0].keys())
    w = csv.writer(stream)
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r[k]) for k in header])
