"""Goal-conditioned MDP primitives: goals, model interfaces and the reward."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Hashable, Iterable, Optional, Protocol, Sequence, runtime_checkable

import numpy as np

from .errors import UnknownStateError, VacuousGoalError

if TYPE_CHECKING:
    from .values import ProgressLabel, ValueTable

StateId = Hashable
ActionId = int


def goal_is_vacuous(instruction: Optional[str], target_state: Optional[StateId]) -> bool:
    """True iff both goal components are absent."""
    return instruction is None and target_state is None


@dataclass(frozen=True)
class Goal:
    """An (instruction, target state) pair; at least one side is present.

    ``level`` is the hierarchy index: 0 for the task itself, one more for
    every refinement step.
    """

    instruction: Optional[str] = None
    target_state: Optional[StateId] = None
    level: int = 0

    def __post_init__(self) -> None:
        if goal_is_vacuous(self.instruction, self.target_state):
            raise VacuousGoalError("a goal needs an instruction, a target state, or both")
        if self.level < 0:
            raise ValueError(f"goal level must be non-negative, got {self.level}")

    @property
    def key(self) -> tuple:
        """Identity of the goal for value purposes (the level does not change V*)."""
        return (self.instruction, self.target_state)

    def refined(self, instruction: Optional[str], target_state: Optional[StateId]) -> "Goal":
        """A child goal one level below this one."""
        return Goal(instruction, target_state, self.level + 1)

    def at_level(self, level: int) -> "Goal":
        return replace(self, level=level)

    def without_target(self) -> "Goal":
        """Drop the target state; keeps the goal when it would become vacuous."""
        if self.instruction is None:
            return self
        return replace(self, target_state=None)

    def without_instruction(self) -> "Goal":
        """Drop the instruction; keeps the goal when it would become vacuous."""
        if self.target_state is None:
            return self
        return replace(self, instruction=None)

    def describe(self) -> str:
        if self.instruction is not None:
            return self.instruction
        return f"<target {self.target_state!r}>"


@runtime_checkable
class EnvironmentModel(Protocol):
    """Deterministic, fully observable discrete environment."""

    initial: StateId
    actions: Sequence[ActionId]

    def states(self) -> Sequence[StateId]: ...

    def step(self, state: StateId, action: ActionId) -> StateId: ...

    def satisfied(self, state: StateId, goal: Goal) -> bool: ...


class PolicyModel(Protocol):
    def act(self, state: StateId, goal: Goal, rng: np.random.Generator) -> ActionId: ...


class ValueModel(Protocol):
    def classify(self, prev: StateId, curr: StateId, goal: Goal) -> "ProgressLabel": ...


class AnticipationModel(Protocol):
    def refine(self, curr: StateId, goal: Goal, rng: np.random.Generator) -> Goal: ...


def reward(s: StateId, s_next: StateId, g: Goal, values: "ValueTable") -> int:
    """One-step improvement toward ``g``: V*(s, g) - V*(s_next, g)."""
    for state in (s, s_next):
        if state not in values:
            raise UnknownStateError(state)
    return values[s] - values[s_next]


def path_return(path: Iterable[StateId], g: Goal, values: "ValueTable") -> int:
    """Sum of per-step rewards along a state path."""
    path = list(path)
    return sum(reward(a, b, g, values) for a, b in zip(path, path[1:]))
