"""Experiment sweeps: configuration, execution, persistence and reporting."""

from .config import CostRule, ExperimentConfig, apply_seed_env, config_from_dict, fast_profile, load_config
from .results import Failure, ResultRecord, aggregate, read_results, write_failures, write_results
from .runner import ExperimentRun, run_cell, run_experiment

__all__ = [
    "CostRule",
    "ExperimentConfig",
    "ExperimentRun",
    "Failure",
    "ResultRecord",
    "aggregate",
    "apply_seed_env",
    "config_from_dict",
    "fast_profile",
    "load_config",
    "read_results",
    "run_cell",
    "run_experiment",
    "write_failures",
    "write_results",
]
