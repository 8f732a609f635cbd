"""Subgoal generation: exact optimal decomposition plus the descriptor-then-grounding pipeline."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .envs.base import DiscreteEnv, normalize_descriptor
from .errors import (
    AlreadyAchievedError,
    AmbiguousSkillError,
    ConfigError,
    DegenerateGraphError,
    NoDecompositionError,
    NoSkillError,
    VerificationExhaustedError,
)
from .gmdp import Goal, StateId
from .values import OracleValueModel, ValueTable, compute_values

SubgoalDescriptor = str
TableFn = Callable[[Goal], ValueTable]


@dataclass(frozen=True)
class AnticipationConfig:
    max_regenerations: int = 3
    split_fraction: Fraction = Fraction(1, 2)
    hallucination_rate: float = 0.0

    def __post_init__(self):
        if self.max_regenerations < 1:
            raise ValueError("max_regenerations must be >= 1")
        if not 0 < self.split_fraction < 1:
            raise ValueError("split_fraction must lie strictly between 0 and 1")
        if not 0.0 <= self.hallucination_rate <= 1.0:
            raise ValueError("hallucination_rate must lie in [0, 1]")


def describe_transition(env: DiscreteEnv, src: StateId, dst: StateId) -> SubgoalDescriptor:
    """Exact inverse dynamics; raises NoSkillError / AmbiguousSkillError."""
    return env.describe_transition(src, dst)


def self_discriminative_check(env: DiscreteEnv, curr: StateId, candidate_state: StateId,
                              descriptor: SubgoalDescriptor) -> bool:
    """Invert the candidate back to an instruction and compare normalized forms."""
    try:
        inferred = env.describe_transition(curr, candidate_state)
    except (NoSkillError, AmbiguousSkillError):
        return False
    return normalize_descriptor(inferred) == normalize_descriptor(descriptor)


def _table_fn(env: DiscreteEnv, tables) -> TableFn:
    if tables is None:
        return lambda goal: compute_values(env, goal)
    if isinstance(tables, OracleValueModel):
        return tables.table
    return tables


def _split_candidates(env: DiscreteEnv, path: Sequence[StateId], actions: Sequence[int], g: Goal,
                      cfg: AnticipationConfig) -> List[Tuple[int, Optional[str]]]:
    """Path indices to try as the subgoal, in preference order, with a fallback descriptor."""
    v = len(path) - 1
    if v == 1:
        return [(1, None)]
    out: List[Tuple[int, Optional[str]]] = []
    try:
        pending = [b for b in env.hierarchy_boundaries(g) if not b.predicate(path[0])]
    except NoDecompositionError:
        pending = []
    if pending:
        for k in range(1, v):
            hit = next((b for b in pending if b.predicate(path[k])), None)
            if hit is not None:
                out.append((k, hit.descriptor))
                break
    for k in range(1, v):
        if env.is_skill_action(actions[k - 1]):
            out.append((k, None))
            break
    out.append((max(1, math.floor(cfg.split_fraction * v)), None))
    return out


def _descriptor_for(env: DiscreteEnv, curr: StateId, target: StateId, fallback: Optional[str]) -> str:
    try:
        return env.describe_transition(curr, target)
    except (NoSkillError, AmbiguousSkillError):
        return fallback if fallback is not None else env.waypoint_descriptor(curr, target)


def oracle_refine(env: DiscreteEnv, values_g: ValueTable, curr: StateId, g: Goal,
                  cfg: AnticipationConfig = AnticipationConfig(), tables=None) -> Goal:
    """A subgoal on an optimal path with V(s,g) = V(s,g') + V(s',g), checked exactly.

    ``tables`` supplies value tables for candidate subgoals (an OracleValueModel,
    a callable, or None to recompute).
    """
    if env.num_states < 2:
        raise DegenerateGraphError("a single-state graph has no waypoint")
    v = values_g[curr]
    if v == 0:
        raise AlreadyAchievedError(f"{g.describe()!r} already holds")
    table_for = _table_fn(env, tables)
    path, actions = values_g.optimal_path(curr)
    for k, fallback in _split_candidates(env, path, actions, g, cfg):
        target = path[k]
        sub = g.refined(_descriptor_for(env, curr, target, fallback), target)
        if not env.satisfied(target, sub):
            continue
        sub_values = table_for(sub)
        if sub_values.get(curr) == k and v == k + values_g[target]:
            return sub
    # an exact-state waypoint always decomposes; reaching here means the env grammar is inconsistent
    k = max(1, math.floor(cfg.split_fraction * v))
    raise NoDecompositionError(f"no verified subgoal at {k} of {v} steps")


def _stage_one(env: DiscreteEnv, values_g: ValueTable, curr: StateId, g: Goal, cfg, tables) -> str:
    return oracle_refine(env, values_g, curr, g, cfg, tables).instruction


def two_stage_refine(env: DiscreteEnv, values_g: ValueTable, curr: StateId, g: Goal,
                     cfg: AnticipationConfig = AnticipationConfig(),
                     rng: Optional[np.random.Generator] = None, tables=None) -> Goal:
    """Stage 1 names the subgoal, stage 2 grounds it by simulating the named skill.

    With ``hallucination_rate`` > 0 the grounding is corrupted at that rate;
    the self-check rejects corrupted candidates and the grounding is re-rolled.
    """
    rng = np.random.default_rng() if rng is None else rng
    descriptor = _stage_one(env, values_g, curr, g, cfg, tables)
    grounded, _ = env.ground(curr, descriptor)
    for _ in range(cfg.max_regenerations):
        candidate = grounded
        if cfg.hallucination_rate and rng.random() < cfg.hallucination_rate:
            candidate = env.corrupt(grounded, rng)
        if self_discriminative_check(env, curr, candidate, descriptor):
            return g.refined(descriptor, candidate)
    raise VerificationExhaustedError(f"{cfg.max_regenerations} candidates for {descriptor!r} rejected")


class OracleAnticipator:
    """Exact decomposition; deterministic, so every subgoal has probability 1."""

    def __init__(self, env: DiscreteEnv, values: OracleValueModel,
                 cfg: AnticipationConfig = AnticipationConfig()):
        self.env = env
        self.values = values
        self.cfg = cfg

    def refine_with_probability(self, curr: StateId, goal: Goal, rng=None) -> Tuple[Goal, float]:
        return oracle_refine(self.env, self.values.table(goal), curr, goal, self.cfg, self.values), 1.0

    def refine(self, curr: StateId, goal: Goal, rng=None) -> Goal:
        return self.refine_with_probability(curr, goal, rng)[0]


class TwoStageAnticipator(OracleAnticipator):
    """Descriptor then grounding, optionally with injected hallucinations."""

    def refine_with_probability(self, curr: StateId, goal: Goal, rng=None) -> Tuple[Goal, float]:
        sub = two_stage_refine(self.env, self.values.table(goal), curr, goal, self.cfg, rng, self.values)
        return sub, 1.0


def _nearest(env: DiscreteEnv, start: StateId, predicate) -> StateId:
    """First state satisfying ``predicate`` found by forward breadth-first search in action order."""
    seen, queue = {start}, deque([start])
    while queue:
        s = queue.popleft()
        if predicate(s):
            return s
        for a in env.actions:
            t = env.step(s, a)
            if t not in seen:
                seen.add(t)
                queue.append(t)
    raise NoDecompositionError("boundary unreachable from the current state")


def atomic_plan(env: DiscreteEnv, values: OracleValueModel, goal: Goal) -> List[Goal]:
    """Decompose ``goal`` once from the initial state down to atomic skills, in order.

    Boundaries are taken in canonical order, each reached on its own optimal
    path from where the previous one left off; that endpoint becomes the
    boundary's target, so the whole plan is fixed before acting.
    """
    plan: List[Goal] = []

    def expand(state: StateId, g: Goal) -> StateId:
        try:
            boundaries = env.hierarchy_boundaries(g)
        except NoDecompositionError:
            plan.append(g)
            path, _ = values.table(g).optimal_path(state)
            return path[-1]
        for b in boundaries:
            if b.predicate(state):
                continue
            state = expand(state, g.refined(b.descriptor, _nearest(env, state, b.predicate)))
        return state

    expand(env.initial, goal)
    return plan


class FixedPlanAnticipator:
    """Ablation without recursion: hands out a precomputed atomic plan one item at a time.

    The next item is the one after the last plan target whose configuration
    matches the current state; refinement below the plan is refused.
    """

    def __init__(self, env: DiscreteEnv, plan: Sequence[Goal]):
        if not plan:
            raise ConfigError("empty fixed plan")
        self.env = env
        self.plan = list(plan)

    def refine_with_probability(self, curr: StateId, goal: Goal, rng=None) -> Tuple[Goal, float]:
        if goal.level > 0:
            raise NoDecompositionError("refinement is disabled below the fixed plan")
        nxt = 0
        for i, item in enumerate(self.plan):
            if self.env.satisfied(curr, item.without_instruction()):
                nxt = i + 1
        nxt = min(nxt, len(self.plan) - 1)
        return self.plan[nxt].at_level(goal.level + 1), 1.0

    def refine(self, curr: StateId, goal: Goal, rng=None) -> Goal:
        return self.refine_with_probability(curr, goal, rng)[0]
