from .config import ABLATIONS, ExperimentConfig, load_config, save_config
from .metrics import (
    EpisodeSummary,
    MetricsReport,
    build_report,
    format_csv,
    format_table,
    process_reward,
    recount_trace,
    stage_scores,
    summarize,
)
from .suite import build_components, run_ablations, run_suite, suite_instances

__all__ = [
    "ABLATIONS",
    "EpisodeSummary",
    "ExperimentConfig",
    "MetricsReport",
    "build_components",
    "build_report",
    "format_csv",
    "format_table",
    "load_config",
    "process_reward",
    "recount_trace",
    "run_ablations",
    "run_suite",
    "save_config",
    "stage_scores",
    "suite_instances",
    "summarize",
]
