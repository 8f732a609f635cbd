"""Rearrange-Objects analog: move fruits and utensils between plates to match a goal image.

Plates stand on a line and the gripper hovers over one plate at a time.
The task goal is image-only (a target state with no instruction); subgoals use

=====  ===========================================================
level  instruction
=====  ===========================================================
1      ``move the <object> to the <color> <shape> plate``
2      ``pick up <object> in <color> <shape> plate``
2      ``place it in <color> <shape> plate``
any    ``move the gripper to the <color> <shape> plate`` (waypoint)
=====  ===========================================================
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from ..errors import InstructionParseError, NoDecompositionError
from ..gmdp import Goal
from .base import Boundary, DiscreteEnv, Skill, normalize_descriptor

LEFT, RIGHT, PLACE, NOOP = range(4)
FIRST_PICK = 4

FRUITS = ("apple", "pepper", "carrot", "lemon")
UTENSILS = ("fork", "knife", "spoon", "chopstick")
COLORS = ("pink", "brown", "blue", "green")
SHAPES = ("circle", "squared")


class RearrangeState(NamedTuple):
    gripper: int  # plate index under the gripper
    held: int  # object index, -1 when empty
    plates: Tuple[int, ...]  # plate index per object, -1 while held


@dataclass(frozen=True)
class RearrangeInstance:
    plates: Tuple[Tuple[str, str], ...]  # (color, shape), left to right
    objects: Tuple[Tuple[str, str], ...]  # (name, kind), kind in {fruit, utensil}
    initial: Tuple[int, ...]
    goal: Tuple[int, ...]
    gripper: int = 0

    def __post_init__(self):
        names = [o[0] for o in self.objects]
        if len(set(names)) != len(names):
            raise ValueError("object names must be unique")
        if len(set(self.plates)) != len(self.plates) or not self.plates:
            raise ValueError("plates must be distinct and non-empty")
        for name, kind in self.objects:
            if kind not in ("fruit", "utensil"):
                raise ValueError(f"unknown object kind {kind!r} for {name!r}")
        n = len(self.plates)
        if len(self.initial) != len(self.objects) or len(self.goal) != len(self.objects):
            raise ValueError("initial and goal assignments must cover every object")
        if any(not 0 <= p < n for p in (*self.initial, *self.goal)) or not 0 <= self.gripper < n:
            raise ValueError("goal assignment references a missing plate")

    def plate_name(self, p: int) -> str:
        color, shape = self.plates[p]
        return f"{color} {shape} plate"

    def canonical_order(self) -> List[int]:
        """Objects that must move: fruits before utensils, then by name."""
        movers = [i for i in range(len(self.objects)) if self.initial[i] != self.goal[i]]
        return sorted(movers, key=lambda i: (self.objects[i][1] != "fruit", self.objects[i][0]))

    def to_dict(self) -> dict:
        return {
            "family": "rearrange",
            "plates": [list(p) for p in self.plates],
            "objects": [list(o) for o in self.objects],
            "initial": list(self.initial),
            "goal": list(self.goal),
            "gripper": self.gripper,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RearrangeInstance":
        return cls(
            plates=tuple((str(c), str(s)) for c, s in data["plates"]),
            objects=tuple((str(n), str(k)) for n, k in data["objects"]),
            initial=tuple(int(p) for p in data["initial"]),
            goal=tuple(int(p) for p in data["goal"]),
            gripper=int(data.get("gripper", 0)),
        )


def generate_rearrange(n_objects: int, n_plates: int, rng: np.random.Generator) -> RearrangeInstance:
    """Random instance in which every object has to change plate."""
    if n_plates < 2 and n_objects:
        raise ValueError("need at least two plates to move anything")
    pool = [(n, "fruit") for n in FRUITS] + [(n, "utensil") for n in UTENSILS]
    objects = tuple(pool[i] for i in rng.choice(len(pool), size=n_objects, replace=False))
    combos = [(c, s) for c in COLORS for s in SHAPES]
    plates = tuple(combos[i] for i in rng.choice(len(combos), size=n_plates, replace=False))
    initial = tuple(int(x) for x in rng.integers(n_plates, size=n_objects))
    goal = tuple(int((p + 1 + rng.integers(n_plates - 1)) % n_plates) for p in initial)
    return RearrangeInstance(plates, objects, initial, goal, int(rng.integers(n_plates)))


class RearrangeEnv(DiscreteEnv):
    """Pick-and-place over a row of plates; actions are left, right, place, noop, pick-<object>."""

    name = "rearrange"
    noop = NOOP

    def __init__(self, instance: RearrangeInstance, state_cap: Optional[int] = None):
        self.instance = instance
        if state_cap is not None:
            self.state_cap = state_cap
        m = len(instance.objects)
        self.actions = tuple(range(FIRST_PICK + m))
        self.action_names = ("left", "right", "place", "noop") + tuple(f"pick {o[0]}" for o in instance.objects)
        self.names = tuple(o[0] for o in instance.objects)
        self.plate_names = tuple(instance.plate_name(p) for p in range(len(instance.plates)))
        self.initial = RearrangeState(instance.gripper, -1, tuple(instance.initial))
        self.goal_state = RearrangeState(0, -1, tuple(instance.goal))
        self.task_goal = Goal(None, self.goal_state)

    def step(self, s: RearrangeState, a: int) -> RearrangeState:
        if a == LEFT:
            return s._replace(gripper=max(s.gripper - 1, 0))
        if a == RIGHT:
            return s._replace(gripper=min(s.gripper + 1, len(self.plate_names) - 1))
        if a == PLACE and s.held >= 0:
            plates = list(s.plates)
            plates[s.held] = s.gripper
            return RearrangeState(s.gripper, -1, tuple(plates))
        if a >= FIRST_PICK and s.held < 0:
            i = a - FIRST_PICK
            if s.plates[i] == s.gripper:
                plates = list(s.plates)
                plates[i] = -1
                return RearrangeState(s.gripper, i, tuple(plates))
        return s

    def is_skill_action(self, action: int) -> bool:
        return action == PLACE or action >= FIRST_PICK

    # -- grammar ----------------------------------------------------------------------------
    def _object(self, name: str, text: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InstructionParseError(f"unknown object {name!r} in {text!r}") from None

    def _plate(self, name: str, text: str) -> int:
        try:
            return self.plate_names.index(name)
        except ValueError:
            raise InstructionParseError(f"unknown plate {name!r} in {text!r}") from None

    def parse_instruction(self, instruction: str) -> tuple:
        """Parse to ``(kind, *args)``; kinds: on, held, place, gripper."""
        text = normalize_descriptor(instruction)
        m = re.match(r"^move the gripper to the (.+ plate)$", text)
        if m:
            return ("gripper", self._plate(m.group(1), text))
        m = re.match(r"^move the (\w+) to the (.+ plate)$", text)
        if m:
            return ("on", self._object(m.group(1), text), self._plate(m.group(2), text))
        m = re.match(r"^pick up (\w+) in (.+ plate)$", text)
        if m:
            self._plate(m.group(2), text)
            return ("held", self._object(m.group(1), text))
        m = re.match(r"^place it in (.+ plate)$", text)
        if m:
            return ("place", self._plate(m.group(1), text))
        raise InstructionParseError(instruction)

    def _holds(self, s: RearrangeState, parsed: tuple) -> bool:
        kind = parsed[0]
        if kind == "on":
            return s.plates[parsed[1]] == parsed[2]
        if kind == "held":
            return s.held == parsed[1]
        if kind == "place":
            return s.held < 0 and parsed[1] in s.plates
        if kind == "gripper":
            return s.gripper == parsed[1]
        raise AssertionError(kind)

    def satisfied(self, s: RearrangeState, goal: Goal) -> bool:
        if goal.target_state is not None:
            t = goal.target_state
            if s.held != t.held or s.plates != t.plates:
                return False
        if goal.instruction is not None:
            return self._holds(s, self.parse_instruction(goal.instruction))
        return True

    def _features(self):
        feats = getattr(self, "_feats", None)
        if feats is None:
            states = self.states()
            grip = np.fromiter((s.gripper for s in states), dtype=np.int64, count=len(states))
            held = np.fromiter((s.held for s in states), dtype=np.int64, count=len(states))
            plates = np.array([s.plates for s in states], dtype=np.int64).reshape(len(states), -1)
            feats = self._feats = (grip, held, plates)
        return feats

    def satisfied_mask(self, goal: Goal) -> np.ndarray:
        grip, held, plates = self._features()
        mask = np.ones(len(grip), dtype=bool)
        if goal.target_state is not None:
            t = goal.target_state
            mask &= (held == t.held) & (plates == np.asarray(t.plates, dtype=np.int64)).all(axis=1)
        if goal.instruction is None:
            return mask
        parsed = self.parse_instruction(goal.instruction)
        if parsed[0] == "on":
            mask &= plates[:, parsed[1]] == parsed[2]
        elif parsed[0] == "held":
            mask &= held == parsed[1]
        elif parsed[0] == "place":
            mask &= (held < 0) & (plates == parsed[1]).any(axis=1)
        elif parsed[0] == "gripper":
            mask &= grip == parsed[1]
        return mask

    def _move_descriptor(self, obj: int, plate: int) -> str:
        return f"move the {self.names[obj]} to the {self.plate_names[plate]}"

    def hierarchy_boundaries(self, goal: Goal) -> List[Boundary]:
        if goal.instruction is None:
            target = goal.target_state
            if target.held >= 0:
                raise NoDecompositionError("target holds an object")
            inst = self.instance
            # objects whose target differs from their start, in canonical order
            movers = sorted(
                (i for i in range(len(self.names)) if inst.initial[i] != target.plates[i]),
                key=lambda i: (inst.objects[i][1] != "fruit", inst.objects[i][0]),
            )
            return [
                Boundary(self._move_descriptor(i, target.plates[i]),
                         lambda s, i=i, p=target.plates[i]: s.plates[i] == p)
                for i in movers
            ]
        parsed = self.parse_instruction(goal.instruction)
        if parsed[0] == "on":
            _, obj, plate = parsed
            src = self.instance.initial[obj]
            return [
                Boundary(f"pick up {self.names[obj]} in {self.plate_names[src]}", lambda s, o=obj: s.held == o),
                Boundary(f"place it in {self.plate_names[plate]}", lambda s, o=obj, p=plate: s.plates[o] == p),
            ]
        raise NoDecompositionError(f"{goal.instruction!r} is atomic")

    # -- skills -----------------------------------------------------------------------------
    def route(self, src: int, dst: int) -> Tuple[int, ...]:
        return (LEFT,) * (src - dst) if dst < src else (RIGHT,) * (dst - src)

    def skills_at(self, s: RearrangeState) -> List[Skill]:
        out: List[Skill] = []
        if s.held < 0:
            for i, p in enumerate(s.plates):
                pick = self.route(s.gripper, p) + (FIRST_PICK + i,)
                out.append(Skill(f"pick up {self.names[i]} in {self.plate_names[p]}", pick))
                for q in range(len(self.plate_names)):
                    if q != p:
                        out.append(Skill(self._move_descriptor(i, q), pick + self.route(p, q) + (PLACE,)))
        else:
            for q in range(len(self.plate_names)):
                out.append(Skill(f"place it in {self.plate_names[q]}", self.route(s.gripper, q) + (PLACE,)))
        for q in range(len(self.plate_names)):
            if q != s.gripper:
                out.append(Skill(f"move the gripper to the {self.plate_names[q]}", self.route(s.gripper, q)))
        return out

    def waypoint_descriptor(self, src: RearrangeState, dst: RearrangeState) -> str:
        return f"move the gripper to the {self.plate_names[dst.gripper]}"

    def corrupt(self, candidate: RearrangeState, rng: np.random.Generator) -> RearrangeState:
        """Object swap: the grounded object trades places with another object."""
        m = len(candidate.plates)
        if m < 2:
            return candidate
        i = candidate.held if candidate.held >= 0 else int(rng.integers(m))
        others = [j for j in range(m) if j != i and candidate.plates[j] != candidate.plates[i]]
        if not others:
            return candidate
        j = int(rng.choice(others))
        plates = list(candidate.plates)
        plates[i], plates[j] = plates[j], plates[i]
        held = {i: j, j: i}.get(candidate.held, candidate.held)
        return RearrangeState(candidate.gripper, held, tuple(plates))

    def decode_state(self, data) -> RearrangeState:
        g, h, plates = data
        return RearrangeState(int(g), int(h), tuple(int(p) for p in plates))
