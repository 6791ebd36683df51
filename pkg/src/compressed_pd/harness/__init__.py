"""Experiment harness: configuration, data generation, runs and the CLI."""

from .config import TUNED_COMBOS, ConfigError, ExperimentConfig, combo_config, load_config, parse_config
from .data import build_problem, generate_dataset, load_dataset, save_dataset
from .runner import RunResult, run_experiment, run_suite

__all__ = [
    "TUNED_COMBOS",
    "ConfigError",
    "ExperimentConfig",
    "combo_config",
    "load_config",
    "parse_config",
    "build_problem",
    "generate_dataset",
    "load_dataset",
    "save_dataset",
    "RunResult",
    "run_experiment",
    "run_suite",
]
