"""Experiment orchestration: config, zoo training, crafting, evaluation, reports."""

from .config import Config, ConfigError, derive_seed, load_config, parse_config
from .pipeline import PipelineError, craft_suite, gen_data, run_all, train_zoo, transfer_eval
from .report import render_report, write_report

__all__ = [
    "Config", "ConfigError", "PipelineError", "craft_suite", "derive_seed", "gen_data",
    "load_config", "parse_config", "render_report", "run_all", "train_zoo", "transfer_eval",
    "write_report",
]
