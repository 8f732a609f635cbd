"""Shared machinery for the bundled discrete environments."""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import (
    AmbiguousSkillError,
    CapacityError,
    GroundingError,
    NoDecompositionError,
    NoSkillError,
    UnknownStateError,
)
from ..gmdp import ActionId, Goal, StateId

DEFAULT_STATE_CAP = 100_000

_WS = re.compile(r"\s+")
_PLACEHOLDER = re.compile(r"<\s*([^>]*?)\s*>")


def normalize_descriptor(text: str) -> str:
    """Grammar-level normal form: case-folded, whitespace collapsed, ``<x>`` canonical."""
    text = _WS.sub(" ", text.strip()).casefold().rstrip(".")
    return _PLACEHOLDER.sub(lambda m: f"<{m.group(1)}>", text)


@dataclass(frozen=True)
class Skill:
    """A scripted skill instantiated at a state: its descriptor and action macro."""

    descriptor: str
    macro: Tuple[ActionId, ...]


@dataclass(frozen=True)
class Boundary:
    """One subgoal of a canonical decomposition."""

    descriptor: str
    predicate: Callable[[StateId], bool]


class DiscreteEnv:
    """Deterministic environment with an enumerable reachable state set.

    Subclasses provide ``initial``, ``actions``, ``action_names``, ``noop``,
    ``step`` and the goal grammar; everything index-based is derived here
    and cached on first use.
    """

    name = "discrete"
    initial: StateId
    actions: Tuple[ActionId, ...]
    action_names: Tuple[str, ...]
    noop: ActionId
    state_cap: int = DEFAULT_STATE_CAP

    # -- dynamics ---------------------------------------------------------------------------
    def step(self, state: StateId, action: ActionId) -> StateId:
        raise NotImplementedError

    def reset(self) -> StateId:
        return self.initial

    def is_skill_action(self, action: ActionId) -> bool:
        """Whether ``action`` completes an atomic skill (as opposed to moving)."""
        return False

    # -- enumeration ------------------------------------------------------------------------
    def states(self) -> List[StateId]:
        cached = getattr(self, "_states", None)
        if cached is None:
            cached = self.enumerate_states()
            self._states = cached
            self._index = {s: i for i, s in enumerate(cached)}
        return cached

    def enumerate_states(self, cap: Optional[int] = None) -> List[StateId]:
        """Reachable states from ``initial`` in breadth-first, action-ordered discovery order."""
        cap = self.state_cap if cap is None else cap
        seen = {self.initial}
        order = [self.initial]
        frontier = deque(order)
        while frontier:
            s = frontier.popleft()
            for a in self.actions:
                nxt = self.step(s, a)
                if nxt not in seen:
                    if len(order) >= cap:
                        raise CapacityError(f"{self.name}: more than {cap} reachable states")
                    seen.add(nxt)
                    order.append(nxt)
                    frontier.append(nxt)
        return order

    @property
    def num_states(self) -> int:
        return len(self.states())

    def index(self, state: StateId) -> int:
        self.states()
        try:
            return self._index[state]
        except KeyError:
            raise UnknownStateError(state) from None

    def has_state(self, state: StateId) -> bool:
        self.states()
        return state in self._index

    def successor_table(self) -> np.ndarray:
        """``table[i, j]`` is the index of ``step(states[i], actions[j])``."""
        table = getattr(self, "_succ", None)
        if table is None:
            states = self.states()
            table = np.empty((len(states), len(self.actions)), dtype=np.int64)
            for i, s in enumerate(states):
                for j, a in enumerate(self.actions):
                    table[i, j] = self._index[self.step(s, a)]
            self._succ = table
        return table

    # -- goals ------------------------------------------------------------------------------
    def satisfied(self, state: StateId, goal: Goal) -> bool:
        raise NotImplementedError

    def satisfied_mask(self, goal: Goal) -> np.ndarray:
        """Boolean mask over ``states()``; subclasses override with vectorized versions."""
        return np.fromiter((self.satisfied(s, goal) for s in self.states()), dtype=bool,
                           count=self.num_states)

    def parse_instruction(self, instruction: str):
        raise NotImplementedError

    def hierarchy_boundaries(self, goal: Goal) -> List[Boundary]:
        raise NoDecompositionError(f"{self.name} has no decomposition for {goal.describe()!r}")

    def stage_boundaries(self, goal: Goal) -> List[Boundary]:
        """Level-1 stages of a task goal; empty when the goal has no decomposition."""
        try:
            return self.hierarchy_boundaries(goal)
        except NoDecompositionError:
            return []

    # -- skills -----------------------------------------------------------------------------
    def skills_at(self, state: StateId) -> List[Skill]:
        """Every scripted skill applicable at ``state``."""
        raise NotImplementedError

    def run_macro(self, state: StateId, macro: Sequence[ActionId]) -> StateId:
        for a in macro:
            state = self.step(state, a)
        return state

    def ground(self, state: StateId, descriptor: str) -> Tuple[StateId, Skill]:
        """Simulate the skill named by ``descriptor`` from ``state``."""
        wanted = normalize_descriptor(descriptor)
        for skill in self.skills_at(state):
            if normalize_descriptor(skill.descriptor) == wanted:
                return self.run_macro(state, skill.macro), skill
        raise GroundingError(f"skill {descriptor!r} is not applicable here")

    def connecting_skills(self, src: StateId, dst: StateId) -> List[Skill]:
        if src == dst:
            return []
        return [k for k in self.skills_at(src) if self.run_macro(src, k.macro) == dst]

    def describe_transition(self, src: StateId, dst: StateId) -> str:
        """Exact inverse dynamics: the unique skill descriptor mapping ``src`` to ``dst``."""
        found = self.connecting_skills(src, dst)
        if not found:
            raise NoSkillError("no single skill connects the two states")
        if len(found) > 1:
            raise AmbiguousSkillError(", ".join(k.descriptor for k in found))
        return found[0].descriptor

    def waypoint_descriptor(self, src: StateId, dst: StateId) -> str:
        """Descriptor used for path-split waypoints that no task boundary names."""
        raise NotImplementedError

    def corrupt(self, candidate: StateId, rng: np.random.Generator) -> StateId:
        """Fault injection: a plausible-looking but wrong grounding of ``candidate``."""
        raise NotImplementedError

    # -- serialization ----------------------------------------------------------------------
    def encode_state(self, state: StateId):
        """JSON-friendly form of a state."""
        return _to_lists(state)

    def decode_state(self, data) -> StateId:
        raise NotImplementedError

    def describe_action(self, action: ActionId) -> str:
        return self.action_names[action]


def _to_lists(obj):
    if isinstance(obj, tuple):
        return [_to_lists(x) for x in obj]
    return obj

