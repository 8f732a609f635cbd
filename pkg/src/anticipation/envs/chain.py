"""Line-graph world: the smallest environment with a long optimal path."""

from __future__ import annotations

import re
from typing import List

import numpy as np

from ..errors import InstructionParseError
from ..gmdp import Goal
from .base import DiscreteEnv, Skill, normalize_descriptor

LEFT, RIGHT, NOOP = 0, 1, 2
_GO = re.compile(r"^go to state (\d+)$")


class ChainEnv(DiscreteEnv):
    """States ``0..length-1`` on a line; ``left``/``right`` move by one, clamped at the ends.

    Goals name a state either by target or by the instruction ``"go to state <k>"``.
    There is no task hierarchy, so every refinement is a path split.
    """

    name = "chain"
    actions = (LEFT, RIGHT, NOOP)
    action_names = ("left", "right", "noop")
    noop = NOOP

    def __init__(self, length: int = 10, start: int | None = None):
        if length < 1:
            raise ValueError("chain length must be positive")
        self.length = length
        self.initial = length - 1 if start is None else start
        if not 0 <= self.initial < length:
            raise ValueError("start lies outside the chain")
        self.task_goal = Goal(None, 0)

    def step(self, state: int, action: int) -> int:
        if action == LEFT:
            return max(state - 1, 0)
        if action == RIGHT:
            return min(state + 1, self.length - 1)
        return state

    def enumerate_states(self, cap=None) -> List[int]:
        # every cell is reachable from any start; keep natural order for readable tables
        super().enumerate_states(cap)
        return list(range(self.length))

    def parse_instruction(self, instruction: str) -> int:
        m = _GO.match(normalize_descriptor(instruction))
        if not m or int(m.group(1)) >= self.length:
            raise InstructionParseError(instruction)
        return int(m.group(1))

    def satisfied(self, state: int, goal: Goal) -> bool:
        if goal.target_state is not None and state != goal.target_state:
            return False
        if goal.instruction is not None and state != self.parse_instruction(goal.instruction):
            return False
        return True

    def satisfied_mask(self, goal: Goal) -> np.ndarray:
        mask = np.ones(self.length, dtype=bool)
        idx = np.arange(self.length)
        if goal.target_state is not None:
            mask &= idx == goal.target_state
        if goal.instruction is not None:
            mask &= idx == self.parse_instruction(goal.instruction)
        return mask

    def skills_at(self, state: int) -> List[Skill]:
        out = []
        for k in range(self.length):
            if k != state:
                macro = (LEFT,) * (state - k) if k < state else (RIGHT,) * (k - state)
                out.append(Skill(f"go to state {k}", macro))
        return out

    def waypoint_descriptor(self, src: int, dst: int) -> str:
        return f"go to state {dst}"

    def corrupt(self, candidate: int, rng: np.random.Generator) -> int:
        others = [k for k in range(self.length) if k != candidate]
        return int(rng.choice(others)) if others else candidate

    def decode_state(self, data) -> int:
        return int(data)
