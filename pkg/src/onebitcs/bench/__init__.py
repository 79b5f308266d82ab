"""Experiment harness: configs, sweeps, CSV summaries and the command line."""
from .config import ConfigError, ExperimentConfig, PropsConfig, load_config, load_props_config, parse_config
from .runner import (
    HEADER,
    CSVFormatError,
    TrialRecord,
    emit_plotdata,
    read_records,
    run_experiment,
    run_props,
    summarize,
    write_records,
)
