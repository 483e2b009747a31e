"""Command-line front end.

Subcommands:
  simulate     Monte Carlo tightness sweep over an SNR grid -> CSV
  equiv-table  mean relative objective difference ESDR-Y vs ESDR2-T -> CSV
  timing       per-model mean solve time across an n grid -> CSV
  check        tightness certificate report for a serialized instance -> JSON
  solve        solve one relaxation of a serialized instance -> JSON
  lift         separable lift: per-group (t, T) pairs -> full (t, T) -> JSON
  restrict     full (t, T) -> per-group pairs -> JSON
  oracle       brute-force ML detection of a serialized instance -> JSON

CSV output always includes a header row; floats carry 17 significant digits.
simulate columns: snr_db, trials, failures, tight_<model>..., cond_<name>...,
objective_<model>..., iterations_<model>..., wall_time.
equiv-table columns: m, n, snr_db, trials, failures, mean_rel_diff.
timing columns: n, time_<model>..., iters_<model>..., ratio_2T_over_Y.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .equivalence import (
    DecomposedPoint,
    LiftedPoint,
    find_partition,
    lift,
    restrict,
)
from .harness import (
    ALL_CONDITIONS,
    ALL_MODELS,
    ExperimentConfig,
    run_equivalence_table,
    run_sweep,
    run_timing,
    solve_model,
    write_sweep_csv,
    write_table_csv,
)
from .model import compute_z, derive_problem, instance_from_json
from .oracle import brute_force_ml
from .solver import SolverConfig
from .tightness import evaluate_report


def _load_config(path):
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    solver = SolverConfig(**doc.pop("solver", {}))
    fields = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(doc) - fields
    if unknown:
        raise SystemExit("unknown config keys: %s" % ", ".join(sorted(unknown)))
    for key in ("snr_grid_db", "models", "conditions", "n_grid"):
        if key in doc:
            doc[key] = tuple(doc[key])
    return ExperimentConfig(solver=solver, **doc)


def _experiment_config(args):
    cfg = _load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    for name in ("m", "n", "M", "trials"):
        val = getattr(args, name, None)
        if val is not None:
            overrides["trials_per_point" if name == "trials" else name] = val
    if getattr(args, "snr", None):
        overrides["snr_grid_db"] = tuple(args.snr)
    if getattr(args, "models", None):
        overrides["models"] = tuple(args.models)
    if getattr(args, "n_grid", None):
        overrides["n_grid"] = tuple(args.n_grid)
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _out_stream(args):
    if args.out and args.out != "-":
        return open(args.out, "w", newline="")
    return sys.stdout


def _read_instance(path):
    with open(path) as fh:
        return instance_from_json(fh.read())


def _emit(args, text):
    stream = _out_stream(args)
    stream.write(text)
    if not text.endswith("\n"):
        stream.write("\n")
    if stream is not sys.stdout:
        stream.close()


def cmd_simulate(args):
    cfg = _experiment_config(args)
    rows = run_sweep(cfg)
    stream = _out_stream(args)
    write_sweep_csv(rows, cfg, stream)
    if stream is not sys.stdout:
        stream.close()


def cmd_equiv_table(args):
    cfg = _experiment_config(args)
    rows = run_equivalence_table(cfg)
    stream = _out_stream(args)
    write_table_csv(rows, stream)
    if stream is not sys.stdout:
        stream.close()


def cmd_timing(args):
    cfg = _experiment_config(args)
    rows = run_timing(cfg)
    stream = _out_stream(args)
    write_table_csv(rows, stream)
    if stream is not sys.stdout:
        stream.close()


def cmd_check(args):
    inst = _read_instance(args.instance)
    pd = derive_problem(inst)
    report = evaluate_report(pd, inst, compute_z(inst))
    _emit(args, report.to_json())


def cmd_solve(args):
    inst = _read_instance(args.instance)
    pd = derive_problem(inst)
    sol = solve_model(inst, pd, args.model, SolverConfig())
    _emit(args, sol.to_json())


def cmd_oracle(args):
    inst = _read_instance(args.instance)
    res = brute_force_ml(inst)
    _emit(args, json.dumps({
        "objective": res.objective,
        "u": res.u.tolist(),
        "x_re": res.x.real.tolist(),
        "x_im": res.x.imag.tolist(),
        "num_evaluated": res.num_evaluated,
    }))


def cmd_lift(args):
    with open(args.point) as fh:
        doc = json.load(fh)
    part = find_partition(np.array(doc["P"], dtype=float))
    dec = DecomposedPoint(
        y=np.array(doc["y"], dtype=float),
        Y=np.array(doc["Y"], dtype=float),
        group_t=tuple(np.array(t, dtype=float) for t in doc["group_t"]),
        group_T=tuple(np.array(T, dtype=float) for T in doc["group_T"]),
    )
    lifted = lift(dec, part)
    _emit(args, json.dumps({"t": lifted.t.tolist(), "T": lifted.T.tolist()}))


def cmd_restrict(args):
    with open(args.point) as fh:
        doc = json.load(fh)
    part = find_partition(np.array(doc["P"], dtype=float))
    point = LiftedPoint(
        t=np.array(doc["t"], dtype=float), T=np.array(doc["T"], dtype=float)
    )
    dec = restrict(point, part, np.array(doc["y"], dtype=float),
                   np.array(doc["Y"], dtype=float))
    _emit(args, json.dumps({
        "group_t": [t.tolist() for t in dec.group_t],
        "group_T": [T.tolist() for T in dec.group_T],
    }))


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed")
    common.add_argument("--out", default=None, help="output path ('-' = stdout)")
    common.add_argument("--config", default=None,
                        help="TOML file mirroring ExperimentConfig")
    common.add_argument("--workers", type=int, default=None,
                        help="parallel worker processes")
    parser = argparse.ArgumentParser(
        prog="psksdr",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def sweep_flags(p):
        p.add_argument("--m", type=int, default=None)
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--M", type=int, default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--snr", type=float, nargs="+", default=None,
                       help="SNR grid in dB")
        p.add_argument("--models", nargs="+", choices=ALL_MODELS, default=None)

    p = sub.add_parser("simulate", parents=[common],
                       help="Monte Carlo tightness sweep -> CSV")
    sweep_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("equiv-table", parents=[common],
                       help="ESDR-Y vs ESDR2-T objective table -> CSV")
    sweep_flags(p)
    p.set_defaults(func=cmd_equiv_table)

    p = sub.add_parser("timing", parents=[common],
                       help="per-model mean solve time vs n -> CSV")
    sweep_flags(p)
    p.add_argument("--n-grid", type=int, nargs="+", default=None)
    p.set_defaults(func=cmd_timing)

    p = sub.add_parser("check", parents=[common],
                       help="certificate report for an instance JSON")
    p.add_argument("instance")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", parents=[common],
                       help="solve one relaxation of an instance JSON")
    p.add_argument("instance")
    p.add_argument("--model", choices=ALL_MODELS, required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", parents=[common],
                       help="brute-force ML detection")
    p.add_argument("instance")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("lift", parents=[common],
                       help="per-group pairs -> full (t, T)")
    p.add_argument("point", help="JSON with P, y, Y, group_t, group_T")
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("restrict", parents=[common],
                       help="full (t, T) -> per-group pairs")
    p.add_argument("point", help="JSON with P, y, Y, t, T")
    p.set_defaults(func=cmd_restrict)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
