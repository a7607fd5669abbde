"""Simple GP hill climbers with the HVL-Mutate' operator on ORDER and MAJORITY."""
from .engine import Acceptance, ConfigError, OpCount, RunConfig, RunResult, Status, run
from .harness import ExperimentConfig, ScalingFit, SummaryRow, TrialRow, fit_scaling_exponent, preset, run_experiment, summarize
from .initializers import init_adversarial_majority, init_t_lopt, init_unity_expectation, make_initial
from .problems import DeficitProfile, ProblemKind, is_stuck_gpstar_single_majority, majority_fitness, order_fitness
from .tree import GpTree, MutationRecord, Terminal, TreeParseError, hvl_prime_step, parse_tree, serialize

__version__ = "0.1.0"

__all__ = [
    "Acceptance", "ConfigError", "OpCount", "RunConfig", "RunResult", "Status", "run",
    "ExperimentConfig", "ScalingFit", "SummaryRow", "TrialRow", "fit_scaling_exponent", "preset",
    "run_experiment", "summarize",
    "init_adversarial_majority", "init_t_lopt", "init_unity_expectation", "make_initial",
    "DeficitProfile", "ProblemKind", "is_stuck_gpstar_single_majority", "majority_fitness", "order_fitness",
    "GpTree", "MutationRecord", "Terminal", "TreeParseError", "hvl_prime_step", "parse_tree", "serialize",
]
