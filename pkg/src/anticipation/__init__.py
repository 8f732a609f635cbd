"""Recursive subgoal anticipation over goal-conditioned discrete environments."""

from .anticipator import (
    AnticipationConfig,
    FixedPlanAnticipator,
    OracleAnticipator,
    TwoStageAnticipator,
    atomic_plan,
    describe_transition,
    oracle_refine,
    self_discriminative_check,
    two_stage_refine,
)
from .executor import (
    EpisodeEvent,
    EpisodeResult,
    ExecutorConfig,
    GoalStack,
    backtrack,
    check_trace_invariants,
    pop_on_achievement,
    read_trace,
    run_episode,
    write_trace,
)
from .gmdp import Goal, path_return, reward
from .values import (
    OracleValueModel,
    ProgressLabel,
    ProgressThresholds,
    ValueTable,
    bellman_residual,
    classify_progress,
    classify_values,
    compute_values,
    load_table,
    save_table,
)

__version__ = "0.1.0"

__all__ = [
    "AnticipationConfig",
    "EpisodeEvent",
    "EpisodeResult",
    "ExecutorConfig",
    "FixedPlanAnticipator",
    "Goal",
    "GoalStack",
    "OracleAnticipator",
    "OracleValueModel",
    "ProgressLabel",
    "ProgressThresholds",
    "TwoStageAnticipator",
    "ValueTable",
    "atomic_plan",
    "backtrack",
    "bellman_residual",
    "check_trace_invariants",
    "classify_progress",
    "classify_values",
    "compute_values",
    "describe_transition",
    "load_table",
    "oracle_refine",
    "path_return",
    "pop_on_achievement",
    "read_trace",
    "reward",
    "run_episode",
    "save_table",
    "self_discriminative_check",
    "two_stage_refine",
    "write_trace",
]
