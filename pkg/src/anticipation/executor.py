"""Goal-stack executor: act, check every K steps, then pop, push a refinement, or backtrack."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .errors import ConfigError, EmptyStackError, PlannerError, ResetUnsupportedError
from .gmdp import Goal, StateId
from .values import ProgressLabel, ProgressThresholds

ACT, POP, PUSH, BACKTRACK, NO_CHANGE, ERROR = "Act", "Pop", "Push", "Backtrack", "CheckNoChange", "Error"
TRANSITIONS = (POP, PUSH, BACKTRACK)
TRACE_VERSION = 1


class GoalStack:
    """Bounded LIFO of goals; ``items[0]`` is the final goal."""

    def __init__(self, max_depth: int, items: Iterable[Goal] = ()):
        if max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        self.max_depth = max_depth
        self.items: List[Goal] = []
        for g in items:
            self.push(g)

    def __len__(self) -> int:
        return len(self.items)

    @property
    def full(self) -> bool:
        return len(self.items) >= self.max_depth

    def top(self) -> Goal:
        if not self.items:
            raise EmptyStackError("peek on an empty goal stack")
        return self.items[-1]

    def push(self, goal: Goal) -> None:
        if self.full:
            raise OverflowError(f"goal stack is at its maximum depth {self.max_depth}")
        if self.items and goal.level != self.items[-1].level + 1:
            raise ValueError("a pushed goal must sit one level below the current top")
        self.items.append(goal)

    def pop(self) -> Goal:
        if not self.items:
            raise EmptyStackError("pop on an empty goal stack")
        return self.items.pop()


@dataclass(frozen=True)
class ExecutorConfig:
    check_interval: int = 1
    thresholds: ProgressThresholds = ProgressThresholds()
    max_depth: int = 4
    max_steps: int = 200
    max_backtracks: int = 3

    def __post_init__(self):
        if self.check_interval < 1:
            raise ConfigError("check_interval must be >= 1")
        if self.max_depth < 1:
            raise ConfigError("max_depth must be >= 1")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1")
        if self.max_backtracks < 0:
            raise ConfigError("max_backtracks must be >= 0")


@dataclass(frozen=True)
class EpisodeEvent:
    step: int
    kind: str
    goal_level: Optional[int] = None
    goal_text: Optional[str] = None
    v_curr: Optional[int] = None
    v_prev: Optional[int] = None
    label: Optional[int] = None
    depth: int = 0  # stack size after the event
    stages: int = 0  # level-1 stages satisfied in the state after the event
    detail: Optional[str] = None

    def to_record(self, episode: Optional[int] = None) -> dict:
        rec = asdict(self)
        if episode is not None:
            rec["episode"] = episode
        return rec


@dataclass
class EpisodeResult:
    success: bool
    steps_used: int
    events: List[EpisodeEvent]
    stack_depth_max: int
    backtrack_count: int
    stage_completions: List[bool]
    error: Optional[str] = None
    final_state: StateId = None
    start_stages: int = 0
    final_satisfied: bool = False

    def count(self, kind: str) -> int:
        return sum(1 for e in self.events if e.kind == kind)


def pop_on_achievement(stack: GoalStack, label: ProgressLabel) -> GoalStack:
    if label != ProgressLabel.ACHIEVED:
        raise ValueError("pop requires an Achieved label")
    stack.pop()
    return stack


def backtrack(stack: GoalStack, env, g_final: Goal) -> StateId:
    """Clear the stack down to the final goal and return the environment's initial state."""
    reset = getattr(env, "reset", None)
    if reset is None:
        raise ResetUnsupportedError(f"{type(env).__name__} cannot reset")
    stack.items.clear()
    stack.push(g_final)
    return reset()


def _value(value_model, state, goal) -> Optional[int]:
    fn = getattr(value_model, "value", None)
    return None if fn is None else fn(state, goal)


def run_episode(env, policy, value, anticipator, g_final: Goal, cfg: ExecutorConfig,
                seed=0, stages: Optional[Sequence] = None) -> EpisodeResult:
    """One episode of the goal-stack loop.

    ``seed`` may be an int, a sequence of ints, or a numpy Generator.
    ``stages`` are the level-1 boundaries used for stage credit (defaults to
    the environment's own decomposition of ``g_final``).
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if stages is None:
        stages = env.stage_boundaries(g_final) if hasattr(env, "stage_boundaries") else []
    stages = list(stages)

    def n_stages(s) -> int:
        return sum(1 for b in stages if b.predicate(s))

    stack = GoalStack(cfg.max_depth, [g_final])
    state = env.reset()
    s_prev = state
    events: List[EpisodeEvent] = []
    t = 0
    depth_max = 1
    backtracks = 0
    error = None
    best_stage = start_stages = n_stages(state)

    def emit(kind, goal=None, v_curr=None, v_prev=None, label=None, detail=None):
        events.append(EpisodeEvent(t, kind, None if goal is None else goal.level,
                                   None if goal is None else goal.describe(), v_curr, v_prev,
                                   None if label is None else int(label), len(stack), n_stages(state), detail))

    while t < cfg.max_steps and stack.items:
        goal = stack.top()
        try:
            action = policy.act(state, goal, rng)
        except PlannerError as exc:
            error = f"{type(exc).__name__}: {exc}"
            emit(ERROR, goal, detail=error)
            break
        state = env.step(state, action)
        t += 1
        best_stage = max(best_stage, n_stages(state))
        emit(ACT, goal, detail=env.describe_action(action) if hasattr(env, "describe_action") else str(action))
        if t % cfg.check_interval:
            continue
        try:
            label = value.classify(s_prev, state, goal)
            v_curr, v_prev = _value(value, state, goal), _value(value, s_prev, goal)
            if label == ProgressLabel.ACHIEVED:
                pop_on_achievement(stack, label)
                emit(POP, goal, v_curr, v_prev, label)
            elif label == ProgressLabel.NO_PROGRESS and not stack.full:
                sub = anticipator.refine(state, goal, rng)
                stack.push(sub)
                depth_max = max(depth_max, len(stack))
                emit(PUSH, sub, v_curr, v_prev, label)
            elif label == ProgressLabel.NO_PROGRESS and backtracks < cfg.max_backtracks:
                state = backtrack(stack, env, g_final)
                backtracks += 1
                emit(BACKTRACK, g_final, v_curr, v_prev, label)
            else:
                # progress, or a stall after the backtrack budget is spent
                emit(NO_CHANGE, goal, v_curr, v_prev, label)
        except PlannerError as exc:
            error = f"{type(exc).__name__}: {exc}"
            emit(ERROR, goal, detail=error)
            break
        s_prev = state

    final_satisfied = bool(env.satisfied(state, g_final))
    success = error is None and (not stack.items or final_satisfied)
    completions = [best_stage >= i + 1 for i in range(len(stages))]
    return EpisodeResult(success, t, events, depth_max, backtracks, completions, error, state,
                         start_stages, final_satisfied)


# -- traces ----------------------------------------------------------------------------------
def write_trace(path, results: Sequence[EpisodeResult], meta: Optional[dict] = None) -> None:
    """One JSON object per line; the first line is a header."""
    header = {"format": "anticipation-trace", "version": TRACE_VERSION, "episodes": len(results)}
    if meta:
        header.update(meta)
    lines = [json.dumps(header, sort_keys=True)]
    for ep, res in enumerate(results):
        for ev in res.events:
            lines.append(json.dumps(ev.to_record(ep), sort_keys=True))
        # only facts the event stream cannot carry; every metric is recounted from events
        summary = {"episode": ep, "kind": "End", "step": res.steps_used, "n_stages": len(res.stage_completions),
                   "start_stages": res.start_stages, "final_satisfied": res.final_satisfied}
        lines.append(json.dumps(summary, sort_keys=True))
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace(path) -> tuple:
    """Returns (header, {episode: [records]}) including each episode's End record."""
    from .errors import FormatError

    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise FormatError(f"{path}: empty trace")
    header = json.loads(lines[0])
    if header.get("format") != "anticipation-trace" or header.get("version") != TRACE_VERSION:
        raise FormatError(f"{path}: not a version-{TRACE_VERSION} trace")
    episodes: dict = {}
    for ln in lines[1:]:
        rec = json.loads(ln)
        episodes.setdefault(rec["episode"], []).append(rec)
    return header, episodes


def check_trace_invariants(events: Sequence, check_interval: int, max_depth: int) -> List[str]:
    """Return violations of LIFO nesting, depth bound, check alignment, one transition per check.

    Works on EpisodeEvent objects or their serialized dicts.
    """
    recs = [e.to_record() if isinstance(e, EpisodeEvent) else e for e in events]
    problems: List[str] = []
    depth = 1
    stack: List[tuple] = [("final",)]
    last_step = -1
    per_step: dict = {}
    for r in recs:
        kind, step = r["kind"], r["step"]
        if kind == "End":
            continue
        if step < last_step:
            problems.append(f"step {step}: events out of order")
        last_step = step
        if kind in TRANSITIONS:
            if step % check_interval:
                problems.append(f"step {step}: {kind} off the check grid")
            per_step[step] = per_step.get(step, 0) + 1
            if per_step[step] > 1:
                problems.append(f"step {step}: more than one stack transition")
        if kind == PUSH:
            if not stack:
                problems.append(f"step {step}: push onto an empty stack")
            stack.append((r["goal_level"], r["goal_text"], step))
            if len(stack) > max_depth:
                problems.append(f"step {step}: depth {len(stack)} exceeds {max_depth}")
            if len(stack) >= 2 and len(stack[-2]) == 3 and r["goal_level"] != stack[-2][0] + 1:
                problems.append(f"step {step}: pushed level does not nest")
        elif kind == POP:
            if not stack:
                problems.append(f"step {step}: pop of an empty stack")
            else:
                top = stack.pop()
                if len(top) == 3 and (top[0], top[1]) != (r["goal_level"], r["goal_text"]):
                    problems.append(f"step {step}: popped goal is not the most recent push")
                if len(top) == 3 and top[2] >= step:
                    problems.append(f"step {step}: pop does not follow its push")
        elif kind == BACKTRACK:
            stack = [("final",)]
        depth = r.get("depth", len(stack))
        if depth != len(stack):
            problems.append(f"step {step}: recorded depth {depth} disagrees with replay {len(stack)}")
        if depth > max_depth:
            problems.append(f"step {step}: recorded depth {depth} exceeds {max_depth}")
    return problems
