"""Run episode batches over a seeded instance suite.

Seed splitting: instance ``i`` is generated from ``default_rng([suite_seed, i])``
and episode ``e`` on it runs with ``default_rng([seed, i, e])``.  Episodes are
reduced in (instance, episode) order, so results never depend on scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..anticipator import FixedPlanAnticipator, OracleAnticipator, TwoStageAnticipator, atomic_plan
from ..envs import BlankingPolicy, CompetencePolicy, FrozenPolicy, generate_suite, make_env
from ..executor import EpisodeResult, run_episode
from ..values import OracleValueModel
from .config import ABLATIONS, ExperimentConfig
from .metrics import MetricsReport, build_report, summarize


def suite_instances(cfg: ExperimentConfig) -> list:
    if cfg.family == "chain":
        return [cfg.size] * cfg.count
    return generate_suite(cfg.family, cfg.count, cfg.suite_seed, size=cfg.size, plates=cfg.plates,
                          distractors=cfg.distractors)


@dataclass
class Components:
    env: object
    values: OracleValueModel
    policy: object
    anticipator: object
    goal: object


def build_components(cfg: ExperimentConfig, instance, cache: Optional[dict] = None, key=None) -> Components:
    """``cache`` lets runs over the same suite share environments and value tables."""
    th = cfg.executor_config().thresholds
    hit = None if cache is None else cache.get((key, th))
    if hit is None:
        env = instance if hasattr(instance, "step") else make_env(instance)
        hit = (env, OracleValueModel(env, th))
        if cache is not None:
            cache[(key, th)] = hit
    env, values = hit
    if cfg.policy == "frozen":
        policy = FrozenPolicy(env)
    else:
        policy = CompetencePolicy(env, values, cfg.policy_config())
    if cfg.no_target_state or cfg.no_descriptor:
        policy = BlankingPolicy(policy, drop_target=cfg.no_target_state, drop_instruction=cfg.no_descriptor)
    goal = env.task_goal
    if cfg.no_recursive:
        anticipator = FixedPlanAnticipator(env, atomic_plan(env, values, goal))
    elif cfg.anticipator == "two_stage":
        anticipator = TwoStageAnticipator(env, values, cfg.anticipation_config())
    else:
        anticipator = OracleAnticipator(env, values, cfg.anticipation_config())
    return Components(env, values, policy, anticipator, goal)


def run_instance(cfg: ExperimentConfig, index: int, instance, cache: Optional[dict] = None) -> List[EpisodeResult]:
    comp = build_components(cfg, instance, cache, index)
    ex = cfg.executor_config()
    out = []
    for e in range(cfg.episodes):
        rng = np.random.default_rng([cfg.seed, index, e])
        out.append(run_episode(comp.env, comp.policy, comp.values, comp.anticipator, comp.goal, ex, rng))
    return out


def run_suite(cfg: ExperimentConfig, instances: Optional[Sequence] = None,
              cache: Optional[dict] = None) -> Tuple[MetricsReport, List[EpisodeResult]]:
    """All configuration conflicts are raised before the first episode runs.

    Pass the same ``cache`` dict only with the same ``instances``.
    """
    cfg.validate()
    instances = suite_instances(cfg) if instances is None else list(instances)
    results: List[EpisodeResult] = []
    for i, inst in enumerate(instances):
        results.extend(run_instance(cfg, i, inst, cache))
    report = build_report(cfg.label, [summarize(r) for r in results], cfg.to_dict())
    return report, results


def run_ablations(cfg: ExperimentConfig, names: Sequence[str] = tuple(ABLATIONS),
                  instances: Optional[Sequence] = None) -> List[Tuple[MetricsReport, List[EpisodeResult]]]:
    instances = suite_instances(cfg) if instances is None else list(instances)
    cache: dict = {}
    return [run_suite(cfg.with_(**ABLATIONS[name]), instances, cache) for name in names]
