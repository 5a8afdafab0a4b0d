"""Robust kidney exchange with recourse against vertex withdrawals.

Solves the trilevel problem: pick an initial set of transplant cycles and
chains, an adversary withdraws up to B vertices, and a recourse solution
re-matches to save as many initially covered pairs as possible.
"""

from .core import (
    Attack,
    CompatibilityGraph,
    Exchange,
    ExchangeKind,
    ExchangePool,
    KepSolution,
    PicefArc,
    Policy,
    build_pool,
    enumerate_chains,
    enumerate_cycles,
    picef_positions,
)
from .formulations import (
    Encoding,
    add_interdiction_cut,
    build_master,
    build_recourse,
    build_subproblem,
    extend_master_with_attack,
    extract_attack,
    extract_cut_solution,
    extract_initial_solution,
)
from .io import generate_instance, parse_instance, render_instance
from .milp import MilpModel, SolveOutcome, SolveStatus
from .solvers import (
    RobustConfig,
    RobustResult,
    RobustStats,
    brute_force_attack,
    brute_force_recourse,
    brute_force_robust,
    solve_attack_subproblem_bb,
    solve_attack_subproblem_cuttingplane,
    solve_robust,
)
from .bench import (
    BenchRecord,
    aggregate,
    run_matrix,
    shifted_geometric_mean,
)

__version__ = "0.1.0"

__all__ = [
    "Attack",
    "BenchRecord",
    "CompatibilityGraph",
    "Encoding",
    "Exchange",
    "ExchangeKind",
    "ExchangePool",
    "KepSolution",
    "MilpModel",
    "PicefArc",
    "Policy",
    "RobustConfig",
    "RobustResult",
    "RobustStats",
    "SolveOutcome",
    "SolveStatus",
    "add_interdiction_cut",
    "aggregate",
    "build_master",
    "build_pool",
    "build_recourse",
    "build_subproblem",
    "brute_force_attack",
    "brute_force_recourse",
    "brute_force_robust",
    "enumerate_chains",
    "enumerate_cycles",
    "extend_master_with_attack",
    "extract_attack",
    "extract_cut_solution",
    "extract_initial_solution",
    "generate_instance",
    "parse_instance",
    "picef_positions",
    "render_instance",
    "run_matrix",
    "shifted_geometric_mean",
    "solve_attack_subproblem_bb",
    "solve_attack_subproblem_cuttingplane",
    "solve_robust",
]
