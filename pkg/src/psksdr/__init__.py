"""Semidefinite relaxations of M-PSK maximum-likelihood MIMO detection.

Construct, solve, and certify the conventional SDR and its enhanced
variants, map feasible points between the equivalent formulations, and run
Monte Carlo tightness experiments.
"""

from ._kernels import backend_name
from .errors import (
    GramMismatch,
    InvalidInput,
    NotPsd,
    NumericalBreakdown,
    PskSdrError,
    TooLarge,
    Unsupported,
)
from .harness import ExperimentConfig, run_equivalence_table, run_sweep, run_timing, solve_model
from .model import (
    MimoInstance,
    ProblemData,
    SymbolSet,
    compute_z,
    derive_problem,
    make_symbol_set,
    sample_instance,
)
from .sdr import BUILDERS, ConicProgram, SdrSolution, decide_tight, extract_xhat
from .solver import SolveStatus, SolverConfig, solve
from .tightness import TightnessReport, evaluate_report

__version__ = "0.1.0"

__all__ = [
    "BUILDERS",
    "ConicProgram",
    "ExperimentConfig",
    "GramMismatch",
    "InvalidInput",
    "MimoInstance",
    "NotPsd",
    "NumericalBreakdown",
    "ProblemData",
    "PskSdrError",
    "SdrSolution",
    "SolveStatus",
    "SolverConfig",
    "SymbolSet",
    "TightnessReport",
    "TooLarge",
    "Unsupported",
    "backend_name",
    "compute_z",
    "decide_tight",
    "derive_problem",
    "evaluate_report",
    "extract_xhat",
    "make_symbol_set",
    "run_equivalence_table",
    "run_sweep",
    "run_timing",
    "sample_instance",
    "solve",
    "solve_model",
]
