"""Experiment suite, reports and command-line interface."""

from .experiments import SCENARIOS, Experiment, ExperimentResult, experiment_from_dict, load_experiment, run_experiment
from .io import ErrorTable, read_field_dump, write_field_dump

__all__ = [
    "SCENARIOS", "Experiment", "ExperimentResult", "experiment_from_dict", "load_experiment",
    "run_experiment", "ErrorTable", "read_field_dump", "write_field_dump",
]
