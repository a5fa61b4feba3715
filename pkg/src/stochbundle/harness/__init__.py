"""Experiment harness: configs, seeded streams, method comparison and reports."""

from .config import ExperimentConfig, MethodSpec, load_config, parse_pairs, with_overrides
from .estimate import EvaluationSample, estimate_objective
from .runner import CSV_COLUMNS, SUMMARY_COLUMNS, run_comparison

__all__ = [
    "CSV_COLUMNS",
    "SUMMARY_COLUMNS",
    "EvaluationSample",
    "ExperimentConfig",
    "MethodSpec",
    "estimate_objective",
    "load_config",
    "parse_pairs",
    "run_comparison",
    "with_overrides",
]
