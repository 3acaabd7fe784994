"""Experiment harness: config parsing, experiment drivers, CSV output and CLI."""

from __future__ import annotations

from cotcache.harness.config import ConfigError, ExperimentConfig, parse_config
from cotcache.harness.experiments import ExperimentResult, run_experiment

__all__ = ["ConfigError", "ExperimentConfig", "ExperimentResult", "parse_config", "run_experiment"]
