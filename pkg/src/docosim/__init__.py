"""docosim: distributed online constrained optimization simulator.

Belief-sharing distributed online primal-dual (dopbc) and a decision-sharing
consensus baseline over configurable graphs and time-varying quadratic
problem families, with regret/violation metrics, growth-exponent fits, and a
deterministic experiment harness. Hot round loops run in a compiled extension
when available and fall back to a numpy implementation otherwise.
"""

from ._backend import HAS_COMPILED
from .baseline import coupling_diagnostic, run_baseline
from .config import ExperimentConfig, load_config, parse_config, serialize_config
from .dopbc import AgentState, AlgoParams, RoundOutput, consensus_step, dual_update, \
    initial_states, primal_update, pseudo_gradient, run, run_round
from .geometry import Ball, Box, ProductSet, project, project_block, project_dual
from .harness import run_experiment
from .metrics import RunTrace, SlopeFit, ccv, consensus_error_sum, \
    consensus_recursion_check, dual_telescoping_check, fit_growth_exponent, static_regret
from .netgraph import Graph, MixingMatrix, build_graph, build_mixing, spectral_sigma
from .problems import Comparator, hindsight_comparator, make_coupled_quadratic, \
    make_separable_quadratic, validate_gradients

__version__ = "0.1.0"

__all__ = [
    "AgentState", "AlgoParams", "Ball", "Box", "Comparator", "ExperimentConfig",
    "Graph", "HAS_COMPILED", "MixingMatrix", "ProductSet", "RoundOutput", "RunTrace",
    "SlopeFit", "build_graph", "build_mixing", "ccv", "consensus_error_sum",
    "consensus_recursion_check", "consensus_step", "coupling_diagnostic",
    "dual_telescoping_check", "dual_update", "fit_growth_exponent",
    "hindsight_comparator", "initial_states", "load_config", "make_coupled_quadratic",
    "make_separable_quadratic", "parse_config", "primal_update", "project",
    "project_block", "project_dual", "pseudo_gradient", "run", "run_baseline",
    "run_experiment", "run_round", "serialize_config", "spectral_sigma",
    "static_regret", "validate_gradients",
]
