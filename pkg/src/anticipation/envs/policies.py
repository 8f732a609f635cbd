"""Scripted low-level policies with injectable faults."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..gmdp import ActionId, Goal, StateId
from ..values import OracleValueModel
from .base import DiscreteEnv


@dataclass(frozen=True)
class FaultPolicyConfig:
    """``competence_radius``: act optimally only while V*(s, goal) is at most this.

    ``slip_probability``: chance per step of a uniformly random action instead.
    """

    competence_radius: float = math.inf
    slip_probability: float = 0.0

    def __post_init__(self):
        if not self.competence_radius >= 1:
            raise ValueError("competence_radius must be >= 1")
        if not 0.0 <= self.slip_probability <= 1.0:
            raise ValueError("slip_probability must lie in [0, 1]")


class CompetencePolicy:
    """Greedy on exact values inside the competence radius, no-op outside it."""

    def __init__(self, env: DiscreteEnv, values: OracleValueModel, config: FaultPolicyConfig = FaultPolicyConfig()):
        self.env = env
        self.values = values
        self.config = config

    def act(self, state: StateId, goal: Goal, rng: np.random.Generator) -> ActionId:
        # one draw per step keeps the random stream aligned across configurations
        slip = rng.random() < self.config.slip_probability
        if slip:
            return self.env.actions[int(rng.integers(len(self.env.actions)))]
        table = self.values.table(goal)
        v = table.get(state)
        if v is None or v > self.config.competence_radius:
            return self.env.noop
        return table.greedy_action(state)


class FrozenPolicy:
    """Never moves; makes every planning check report a stall."""

    def __init__(self, env: DiscreteEnv):
        self.env = env

    def act(self, state: StateId, goal: Goal, rng: np.random.Generator) -> ActionId:
        return self.env.noop


class BlankingPolicy:
    """Hides one goal component from the wrapped policy (ablations)."""

    def __init__(self, inner, drop_target: bool = False, drop_instruction: bool = False):
        self.inner = inner
        self.drop_target = drop_target
        self.drop_instruction = drop_instruction

    def act(self, state: StateId, goal: Goal, rng: np.random.Generator) -> ActionId:
        if goal.level > 0:
            if self.drop_target:
                goal = goal.without_target()
            if self.drop_instruction:
                goal = goal.without_instruction()
        return self.inner.act(state, goal, rng)
