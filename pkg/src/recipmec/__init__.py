"""Computation-efficiency maximization for two-user backscatter-assisted
partial offloading with reciprocal wireless powering."""

from .channel import ChannelRealization, draw_channel, path_loss_gain
from .gap import (GapCase, GapResult, GapScenario, alpha_closed_form,
                  bits_gap, nonreciprocal_bits, reciprocal_bits)
from .harness import (ExperimentConfig, SweepRecord, emit_results,
                      load_records, parse_config, run_sweep)
from .model import (Decision, Metrics, check_constraints, compute_metrics,
                    harvested_energy)
from .optimizer import Scheme, SolveReport, SolverTolerances, alternating_solve
from .oracles import GridSpec, grid_search_solve, pg_solve_a
from .params import (ChannelGenConfig, SystemParams, UserParams,
                     default_system, default_user)
from .subproblems import (DualMultipliers, SubproblemAInput,
                          solve_subproblem_a, solve_subproblem_b)
from .transforms import dinkelbach_solve, surrogate_rate, update_y

__all__ = [
    "ChannelGenConfig", "ChannelRealization", "Decision", "DualMultipliers",
    "ExperimentConfig", "GapCase", "GapResult", "GapScenario", "GridSpec",
    "Metrics", "Scheme", "SolveReport", "SolverTolerances", "SubproblemAInput",
    "SweepRecord", "SystemParams", "UserParams", "alpha_closed_form",
    "alternating_solve", "bits_gap", "check_constraints", "compute_metrics",
    "default_system", "default_user", "dinkelbach_solve", "draw_channel",
    "emit_results", "grid_search_solve", "harvested_energy", "load_records",
    "nonreciprocal_bits", "parse_config", "path_loss_gain", "pg_solve_a",
    "reciprocal_bits", "run_sweep", "solve_subproblem_a", "solve_subproblem_b",
    "surrogate_rate", "update_y",
]
