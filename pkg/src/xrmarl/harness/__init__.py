from .config import (ALGORITHMS, KNOWN_KEYS, ConfigError, ExperimentConfig, dump_config,
                     load_config, parse_ring, parse_seeds, ring_label)
from .experiment import (InvariantViolation, RunRecord, evaluate_checkpoint, run_aps,
                         run_experiment, run_learner, run_single, window_metrics)
from .outputs import AGGREGATE_METRICS, RUN_HEADER, aggregate, emit_outputs, run_directory
from .stats import mean_ci, success_rate

__all__ = [
    "ALGORITHMS", "KNOWN_KEYS", "ConfigError", "ExperimentConfig", "dump_config", "load_config",
    "parse_ring", "parse_seeds", "ring_label",
    "InvariantViolation", "RunRecord", "evaluate_checkpoint", "run_aps", "run_experiment",
    "run_learner", "run_single", "window_metrics",
    "AGGREGATE_METRICS", "RUN_HEADER", "aggregate", "emit_outputs", "run_directory",
    "mean_ci", "success_rate",
]
