"""Exact optimal values in distance form, and the three-way progress classifier.

V*(s, g) is the number of primitive steps on a shortest path from ``s`` to
the nearest state satisfying ``g``.  Smaller is better; 0 means achieved.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .envs.base import DiscreteEnv
from .errors import CapacityError, FormatError, UnknownStateError, UnsatisfiableGoalError
from .gmdp import ActionId, Goal, StateId


class ProgressLabel(IntEnum):
    """Serialized as the integers 0, 1, 2."""

    NO_PROGRESS = 0
    PROGRESS = 1
    ACHIEVED = 2

    @property
    def display(self) -> str:
        return {0: "NoProgress", 1: "Progress", 2: "Achieved"}[int(self)]


@dataclass(frozen=True)
class ProgressThresholds:
    delta_goal: float = 0
    delta_prog: float = 0

    def __post_init__(self):
        for name in ("delta_goal", "delta_prog"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {v}")


class ValueTable:
    """Read-only V*(., g) over an environment's enumerated states.

    Unreachable states (no path to the goal) are absent.
    """

    def __init__(self, env: DiscreteEnv, goal: Goal, dist: np.ndarray):
        self.env = env
        self.goal = goal
        dist = np.array(dist, dtype=np.int64)
        dist.setflags(write=False)
        self._dist = dist

    @property
    def distances(self) -> np.ndarray:
        """Per-state-index distances, -1 where the goal is unreachable."""
        return self._dist

    def _idx(self, state: StateId) -> int:
        i = self.env.index(state)
        if self._dist[i] < 0:
            raise UnknownStateError(state)
        return i

    def __getitem__(self, state: StateId) -> int:
        return int(self._dist[self._idx(state)])

    def __contains__(self, state) -> bool:
        return self.env.has_state(state) and self._dist[self.env.index(state)] >= 0

    def __len__(self) -> int:
        return int((self._dist >= 0).sum())

    def get(self, state: StateId, default=None):
        return self[state] if state in self else default

    def items(self) -> Iterator[Tuple[StateId, int]]:
        states = self.env.states()
        for i in np.nonzero(self._dist >= 0)[0]:
            yield states[i], int(self._dist[i])

    def as_dict(self) -> Dict[StateId, int]:
        return dict(self.items())

    def with_entry(self, state: StateId, value: int) -> "ValueTable":
        """Copy with one entry overwritten (used to test the residual)."""
        dist = self._dist.copy()
        dist[self.env.index(state)] = value
        return ValueTable(self.env, self.goal, dist)

    def greedy_action(self, state: StateId) -> ActionId:
        """Least-index action that moves one step closer; the no-op once achieved."""
        i = self._idx(state)
        v = self._dist[i]
        if v == 0:
            return self.env.noop
        succ = self.env.successor_table()[i]
        for j, nxt in enumerate(succ):
            if self._dist[nxt] == v - 1:
                return self.env.actions[j]
        raise AssertionError("table violates the Bellman recurrence")

    def optimal_path(self, state: StateId) -> Tuple[List[StateId], List[ActionId]]:
        """Lexicographically least optimal action sequence from ``state`` to the goal."""
        states, actions = [state], []
        i = self._idx(state)
        succ = self.env.successor_table()
        all_states = self.env.states()
        while self._dist[i] > 0:
            v = self._dist[i]
            j = next(j for j, nxt in enumerate(succ[i]) if self._dist[nxt] == v - 1)
            i = succ[i, j]
            actions.append(self.env.actions[j])
            states.append(all_states[i])
        return states, actions


def _reverse_graph(env: DiscreteEnv) -> Tuple[np.ndarray, np.ndarray]:
    cached = getattr(env, "_reverse", None)
    if cached is None:
        succ = env.successor_table()
        n, a = succ.shape
        src = np.repeat(np.arange(n, dtype=np.int64), a)
        dst = succ.ravel()
        order = np.argsort(dst, kind="stable")
        preds = src[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(dst, minlength=n), out=indptr[1:])
        cached = env._reverse = (indptr, preds)
    return cached


def compute_values(env: DiscreteEnv, goal: Goal, max_states: Optional[int] = None) -> ValueTable:
    """Backward breadth-first search from every goal-satisfying state."""
    n = env.num_states
    if max_states is not None and n > max_states:
        raise CapacityError(f"{n} states exceed the limit of {max_states}")
    mask = env.satisfied_mask(goal)
    frontier = np.nonzero(mask)[0]
    if frontier.size == 0:
        raise UnsatisfiableGoalError(f"no state satisfies {goal.describe()!r}")
    indptr, preds = _reverse_graph(env)
    dist = np.full(n, -1, dtype=np.int64)
    dist[frontier] = 0
    depth = 0
    while frontier.size:
        starts = indptr[frontier]
        counts = indptr[frontier + 1] - starts
        total = int(counts.sum())
        if total == 0:
            break
        offsets = np.repeat(starts - (np.cumsum(counts) - counts), counts)
        cand = preds[offsets + np.arange(total)]
        cand = np.unique(cand[dist[cand] < 0])
        depth += 1
        dist[cand] = depth
        frontier = cand
    return ValueTable(env, goal, dist)


def bellman_residual(env: DiscreteEnv, values: ValueTable) -> float:
    """Largest violation of V(s) = 1 + min_a V(step(s, a)) (or V(s) = 0 at the goal)."""
    dist = values.distances
    reach = dist >= 0
    if not reach.any():
        return 0.0
    v = np.where(reach, dist, np.inf).astype(float)
    best = v[env.successor_table()].min(axis=1)
    sat = env.satisfied_mask(values.goal)
    resid = np.where(sat, np.abs(v), np.abs(v - (1 + best)))
    return float(resid[reach].max())


def classify_values(v_prev: float, v_curr: float, th: ProgressThresholds, v_goal: float = 0) -> ProgressLabel:
    """Achievement is tested first, then stall, mirroring the executor's branch order."""
    if abs(v_curr - v_goal) <= th.delta_goal:
        return ProgressLabel.ACHIEVED
    if abs(v_curr - v_prev) <= th.delta_prog:
        return ProgressLabel.NO_PROGRESS
    return ProgressLabel.PROGRESS


def classify_progress(values: ValueTable, prev: StateId, curr: StateId,
                      th: ProgressThresholds = ProgressThresholds()) -> ProgressLabel:
    return classify_values(values[prev], values[curr], th)


class OracleValueModel:
    """ValueModel backed by exact tables, memoized per goal.

    Not thread-safe; give each concurrent episode runner its own instance or
    pre-warm the cache.
    """

    def __init__(self, env: DiscreteEnv, thresholds: ProgressThresholds = ProgressThresholds(),
                 max_states: Optional[int] = None):
        self.env = env
        self.thresholds = thresholds
        self.max_states = max_states
        self._cache: Dict[tuple, ValueTable] = {}

    def table(self, goal: Goal) -> ValueTable:
        t = self._cache.get(goal.key)
        if t is None:
            t = self._cache[goal.key] = compute_values(self.env, goal, self.max_states)
        return t

    def value(self, state: StateId, goal: Goal) -> Optional[int]:
        return self.table(goal).get(state)

    def classify(self, prev: StateId, curr: StateId, goal: Goal) -> ProgressLabel:
        return classify_progress(self.table(goal), prev, curr, self.thresholds)


# -- persistence ------------------------------------------------------------------------------
_MAGIC = b"AVT1"
_FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sH32sI")
_PAIR = struct.Struct("<II")


def goal_digest(env: DiscreteEnv, goal: Goal) -> bytes:
    target = None if goal.target_state is None else env.encode_state(goal.target_state)
    blob = json.dumps([env.name, goal.instruction, target], separators=(",", ":"))
    return hashlib.sha256(blob.encode()).digest()


def save_table(path, table: ValueTable) -> None:
    """Little-endian: header (magic, version, goal digest, state count), then (index, value) pairs."""
    dist = table.distances
    rows = np.nonzero(dist >= 0)[0]
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _FORMAT_VERSION, goal_digest(table.env, table.goal), len(dist)))
        pairs = np.empty((rows.size, 2), dtype="<u4")
        pairs[:, 0] = rows
        pairs[:, 1] = dist[rows]
        fh.write(pairs.tobytes())


def load_table(path, env: DiscreteEnv, goal: Goal) -> ValueTable:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError("truncated value table")
    magic, version, digest, count = _HEADER.unpack_from(data)
    if magic != _MAGIC or version != _FORMAT_VERSION:
        raise FormatError(f"not a version-{_FORMAT_VERSION} value table")
    if digest != goal_digest(env, goal):
        raise FormatError("value table was computed for a different goal")
    if count != env.num_states:
        raise FormatError(f"table covers {count} states, environment has {env.num_states}")
    body = data[_HEADER.size:]
    if len(body) % _PAIR.size:
        raise FormatError("trailing bytes in value table")
    pairs = np.frombuffer(body, dtype="<u4").reshape(-1, 2)
    dist = np.full(count, -1, dtype=np.int64)
    if pairs.size and pairs[:, 0].max() >= count:
        raise FormatError("state index out of range")
    dist[pairs[:, 0]] = pairs[:, 1]
    return ValueTable(env, goal, dist)
