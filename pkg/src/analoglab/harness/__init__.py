"""Command-line harness: registry, configuration, deterministic runs and reports."""

from .config import ConfigInvalid, ExperimentConfig, load_config
from .experiments import UnknownExperiment, list_experiments
from .report import ClaimVerdict, IncompleteSweep, IoFailure, RunReport, run, verify_claim, write_report

__all__ = [
    "ClaimVerdict",
    "ConfigInvalid",
    "ExperimentConfig",
    "IncompleteSweep",
    "IoFailure",
    "RunReport",
    "UnknownExperiment",
    "list_experiments",
    "load_config",
    "run",
    "verify_claim",
    "write_report",
]
