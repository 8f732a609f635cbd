"""Hierarchical annotation of expert trajectories and the five supervised dataset families.

Sampling windows: a subgoal ``g`` achieved at frame ``G`` owns the frames
``[P, G)`` where ``P`` is the achieved-at frame of the previous subgoal at
the same level (0 for the first).  Every family samples from that window.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .anticipator import atomic_plan
from .envs.base import DiscreteEnv, normalize_descriptor
from .errors import AmbiguousSkillError, BoundaryNotReachedError, EmptyWindowError, NoDecompositionError, NoSkillError
from .gmdp import ActionId, Goal, StateId
from .values import OracleValueModel, ProgressLabel

DATASET_FORMAT = "anticipation-dataset"
DATASET_VERSION = 1
FAMILIES = ("anticipation", "value", "policy", "dynamics", "inverse")


@dataclass
class Frame:
    index: int
    state: StateId
    action: Optional[ActionId]  # action taken from this frame; None on the last
    descriptor: Optional[str] = None


@dataclass
class Trajectory:
    frames: List[Frame]
    goal: Goal
    success: bool

    def __len__(self) -> int:
        return len(self.frames)

    def state(self, i: int) -> StateId:
        return self.frames[i].state

    def validate(self, env: DiscreteEnv) -> None:
        for i, (a, b) in enumerate(zip(self.frames, self.frames[1:])):
            if a.index != i or env.step(a.state, a.action) != b.state:
                raise ValueError(f"frame {i} does not follow the environment dynamics")


def expert_trajectory(env: DiscreteEnv, goal: Goal, values: Optional[OracleValueModel] = None) -> Trajectory:
    """Scripted expert: executes the canonical atomic skills one after another, each optimally."""
    values = OracleValueModel(env) if values is None else values
    state = env.initial
    frames: List[Frame] = []
    if not env.satisfied(state, goal):
        for item in atomic_plan(env, values, goal):
            path, actions = values.table(item).optimal_path(state)
            for s, a in zip(path, actions):
                frames.append(Frame(len(frames), s, a, item.instruction))
            state = path[-1]
    frames.append(Frame(len(frames), state, None, None))
    return Trajectory(frames, goal, env.satisfied(state, goal))


@dataclass
class SubgoalNode:
    id: int
    level: int
    descriptor: Optional[str]
    frame: int  # achieved-at
    parent: Optional[int]
    goal: Goal
    children: List[int] = field(default_factory=list)


@dataclass
class SubgoalTree:
    nodes: List[SubgoalNode]

    @property
    def root(self) -> SubgoalNode:
        return self.nodes[0]

    def non_root(self) -> List[SubgoalNode]:
        return self.nodes[1:]

    def at_level(self, level: int) -> List[SubgoalNode]:
        return sorted((n for n in self.nodes if n.level == level), key=lambda n: (n.frame, n.id))

    def window(self, node: SubgoalNode) -> Tuple[int, int]:
        """Half-open frame interval owned by ``node``."""
        prev = 0
        for other in self.at_level(node.level):
            if other.id == node.id:
                break
            prev = other.frame
        return prev, node.frame

    def is_atomic(self, node: SubgoalNode) -> bool:
        return not node.children and node.parent is not None


def annotate(trajectory: Trajectory, env: DiscreteEnv, goal: Goal) -> SubgoalTree:
    """Top-down annotation: children are the canonical boundaries, timed by first satisfaction."""
    frames = trajectory.frames
    root_frame = next((f.index for f in frames if env.satisfied(f.state, goal)), None)
    if root_frame is None:
        raise BoundaryNotReachedError("the trajectory never reaches its goal")
    nodes = [SubgoalNode(0, 0, goal.instruction, root_frame, None, goal)]

    def expand(node: SubgoalNode, start: int) -> None:
        if node.frame <= start and node.parent is None:
            return
        try:
            boundaries = env.hierarchy_boundaries(node.goal)
        except NoDecompositionError:
            return
        cursor = start
        for b in boundaries:
            hit = next((i for i in range(cursor, node.frame + 1) if b.predicate(frames[i].state)), None)
            if hit is None:
                raise BoundaryNotReachedError(f"{b.descriptor!r} never holds before frame {node.frame}")
            child = SubgoalNode(len(nodes), node.level + 1, b.descriptor, hit, node.id,
                                node.goal.refined(b.descriptor, frames[hit].state))
            nodes.append(child)
            node.children.append(child.id)
            expand(child, cursor)
            cursor = hit

    expand(nodes[0], 0)
    return SubgoalTree(nodes)


# -- labeling --------------------------------------------------------------------------------
@dataclass(frozen=True)
class LabelingConfig:
    """``None`` thresholds take per-segment defaults (see ``resolve``)."""

    beta: Optional[int] = None
    gamma: Optional[int] = None
    delta_lo: Optional[int] = None
    epsilon_hi: Optional[int] = None
    samples_per_subgoal: int = 4
    near_weight: float = 2.0
    seed: int = 0

    def __post_init__(self):
        for name in ("beta", "gamma"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.samples_per_subgoal < 1:
            raise ValueError("samples_per_subgoal must be >= 1")
        if self.near_weight <= 0:
            raise ValueError("near_weight must be positive")

    def resolve(self, segment: int) -> Tuple[int, int, int, int]:
        """(beta, gamma, delta_lo, epsilon_hi) for a subgoal segment of the given length."""
        beta = math.ceil(0.1 * segment) if self.beta is None else self.beta
        gamma = 1 if self.gamma is None else self.gamma
        delta = 1 if self.delta_lo is None else self.delta_lo
        eps = math.ceil(0.2 * segment) if self.epsilon_hi is None else self.epsilon_hi
        return beta, gamma, delta, eps


def value_label(f1: int, f2: int, g_frame: int, beta: int, gamma: int) -> ProgressLabel:
    """Interval rule on frame indices; achievement wins where the intervals overlap."""
    if f2 >= g_frame - gamma:
        return ProgressLabel.ACHIEVED
    if f2 < f1 + beta:
        return ProgressLabel.NO_PROGRESS
    return ProgressLabel.PROGRESS


# -- records ---------------------------------------------------------------------------------
@dataclass
class AnticipationRecord:
    frame: int
    state: StateId
    subgoal_descriptor: str
    subgoal_state: StateId
    goal: Goal


@dataclass
class ValueRecord:
    f1: int
    f2: int
    g_frame: int
    s1: StateId
    s2: StateId
    goal: Goal
    y: int


@dataclass
class PolicyRecord:
    frame: int
    state: StateId
    target: object  # descriptor string, or a primitive action id
    goal: Goal
    kind: str  # "descriptor" or "action"


@dataclass
class DynamicsRecord:
    frame: int
    s_init: StateId
    s_curr: StateId
    descriptor: str
    s_target: StateId


@dataclass
class InverseRecord:
    frame: int
    s_curr: StateId
    s_next: StateId
    descriptor: str


def _sample_frames(lo: int, hi: int, g_frame: int, n: int, cfg: LabelingConfig,
                   rng: np.random.Generator, allowed=None) -> List[int]:
    frames = [f for f in range(lo, hi) if allowed is None or allowed(f)]
    if not frames:
        raise EmptyWindowError(f"no frames in [{lo}, {hi})")
    near = max(1, math.ceil(0.1 * (g_frame - lo)))
    w = np.array([cfg.near_weight if g_frame - f <= near else 1.0 for f in frames])
    picks = rng.choice(len(frames), size=n, p=w / w.sum())
    return [frames[i] for i in picks]


class _Skips:
    def __init__(self):
        self.count = 0


def _rng(cfg: LabelingConfig, family: str, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, stream, FAMILIES.index(family)])


def build_anticipation_dataset(tree: SubgoalTree, trajectory: Trajectory,
                               cfg: LabelingConfig = LabelingConfig(), stream: int = 0,
                               skips: Optional[_Skips] = None) -> List[AnticipationRecord]:
    rng = _rng(cfg, "anticipation", stream)
    out = []
    for node in tree.non_root():
        lo, hi = tree.window(node)
        try:
            picks = _sample_frames(lo, hi, node.frame, cfg.samples_per_subgoal, cfg, rng)
        except EmptyWindowError:
            if skips is not None:
                skips.count += 1
            continue
        parent = tree.nodes[node.parent].goal
        for f in picks:
            out.append(AnticipationRecord(f, trajectory.state(f), node.descriptor,
                                          trajectory.state(node.frame), parent))
    return out


def build_value_dataset(tree: SubgoalTree, trajectory: Trajectory, cfg: LabelingConfig = LabelingConfig(),
                        stream: int = 0, pairs: Optional[Sequence[Tuple[int, int, int]]] = None,
                        skips: Optional[_Skips] = None) -> List[ValueRecord]:
    """Sample (f1, f2) per subgoal and label with the interval rule.

    ``pairs`` replaces sampling by explicit ``(node id, f1, f2)`` triples.
    """
    rng = _rng(cfg, "value", stream)
    last = len(trajectory) - 1
    out = []

    def record(node, f1, f2):
        lo, _ = tree.window(node)
        beta, gamma, _, _ = cfg.resolve(node.frame - lo)
        y = value_label(f1, f2, node.frame, beta, gamma)
        return ValueRecord(f1, f2, node.frame, trajectory.state(f1), trajectory.state(f2), node.goal, int(y))

    if pairs is not None:
        return [record(tree.nodes[nid], f1, f2) for nid, f1, f2 in pairs]
    for node in tree.non_root():
        lo, hi = tree.window(node)
        _, _, delta, eps = cfg.resolve(node.frame - lo)
        try:
            f1s = _sample_frames(lo, hi, node.frame, cfg.samples_per_subgoal, cfg, rng)
        except EmptyWindowError:
            if skips is not None:
                skips.count += 1
            continue
        for f1 in f1s:
            # open interval (f1 + delta, G + eps), clipped to the trajectory
            a, b = f1 + delta + 1, min(node.frame + eps - 1, last)
            if a > b:
                if skips is not None:
                    skips.count += 1
                continue
            out.append(record(node, f1, int(rng.integers(a, b + 1))))
    return out


def build_policy_dataset(tree: SubgoalTree, trajectory: Trajectory, cfg: LabelingConfig = LabelingConfig(),
                         stream: int = 0, skips: Optional[_Skips] = None) -> List[PolicyRecord]:
    """Descriptor records for every subgoal (goal = its parent), action records for atomic ones."""
    rng = _rng(cfg, "policy", stream)
    out = []
    for node in tree.non_root():
        lo, hi = tree.window(node)
        try:
            picks = _sample_frames(lo, hi, node.frame, cfg.samples_per_subgoal, cfg, rng)
        except EmptyWindowError:
            if skips is not None:
                skips.count += 1
            continue
        parent = tree.nodes[node.parent].goal
        for f in picks:
            out.append(PolicyRecord(f, trajectory.state(f), node.descriptor, parent, "descriptor"))
            if tree.is_atomic(node):
                out.append(PolicyRecord(f, trajectory.state(f), int(trajectory.frames[f].action), node.goal, "action"))
    return out


def build_dynamics_dataset(tree: SubgoalTree, trajectory: Trajectory, cfg: LabelingConfig = LabelingConfig(),
                           stream: int = 0, skips: Optional[_Skips] = None) -> List[DynamicsRecord]:
    rng = _rng(cfg, "dynamics", stream)
    out = []
    for node in tree.non_root():
        lo, hi = tree.window(node)
        try:
            picks = _sample_frames(lo, hi, node.frame, cfg.samples_per_subgoal, cfg, rng)
        except EmptyWindowError:
            if skips is not None:
                skips.count += 1
            continue
        for f in picks:
            out.append(DynamicsRecord(f, trajectory.state(lo), trajectory.state(f), node.descriptor,
                                      trajectory.state(node.frame)))
    return out


def build_inverse_dataset(tree: SubgoalTree, trajectory: Trajectory, env: DiscreteEnv,
                          cfg: LabelingConfig = LabelingConfig(), stream: int = 0,
                          skips: Optional[_Skips] = None) -> List[InverseRecord]:
    """Only frames from which the subgoal's own skill leads to the subgoal state are eligible."""
    rng = _rng(cfg, "inverse", stream)
    out = []
    for node in tree.non_root():
        lo, hi = tree.window(node)
        target = trajectory.state(node.frame)
        want = normalize_descriptor(node.descriptor)

        def eligible(f, target=target, want=want):
            try:
                return normalize_descriptor(env.describe_transition(trajectory.state(f), target)) == want
            except (NoSkillError, AmbiguousSkillError):
                return False

        try:
            picks = _sample_frames(lo, hi, node.frame, cfg.samples_per_subgoal, cfg, rng, eligible)
        except EmptyWindowError:
            if skips is not None:
                skips.count += 1
            continue
        for f in picks:
            out.append(InverseRecord(f, trajectory.state(f), target, node.descriptor))
    return out


# -- serialization ---------------------------------------------------------------------------
def _encode(env: DiscreteEnv, value):
    if isinstance(value, Goal):
        return {"instruction": value.instruction, "level": value.level,
                "target_state": None if value.target_state is None else env.encode_state(value.target_state)}
    if isinstance(value, tuple):
        return env.encode_state(value)
    return value


def _decode_goal(env: DiscreteEnv, data: dict) -> Goal:
    target = data["target_state"]
    return Goal(data["instruction"], None if target is None else env.decode_state(target), data["level"])


_STATE_FIELDS = {"state", "subgoal_state", "s1", "s2", "s_init", "s_curr", "s_target", "s_next"}
_RECORD_TYPES = {"anticipation": AnticipationRecord, "value": ValueRecord, "policy": PolicyRecord,
                 "dynamics": DynamicsRecord, "inverse": InverseRecord}


def record_to_dict(env: DiscreteEnv, rec) -> dict:
    out = {}
    for f in fields(rec):
        k, v = f.name, getattr(rec, f.name)
        out[k] = env.encode_state(v) if k in _STATE_FIELDS else _encode(env, v)
    return out


def record_from_dict(env: DiscreteEnv, family: str, data: dict):
    kw = {}
    for k, v in data.items():
        if k in _STATE_FIELDS:
            kw[k] = env.decode_state(v)
        elif k == "goal":
            kw[k] = _decode_goal(env, v)
        else:
            kw[k] = v
    return _RECORD_TYPES[family](**kw)


def dump_dataset(env: DiscreteEnv, family: str, records: Sequence) -> str:
    header = {"format": DATASET_FORMAT, "version": DATASET_VERSION, "family": family,
              "env": env.name, "count": len(records)}
    lines = [json.dumps(header, sort_keys=True)]
    lines += [json.dumps(record_to_dict(env, r), sort_keys=True) for r in records]
    return "\n".join(lines) + "\n"


def load_dataset(env: DiscreteEnv, path) -> Tuple[str, list]:
    from .errors import FormatError

    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    header = json.loads(lines[0]) if lines else {}
    if header.get("format") != DATASET_FORMAT or header.get("version") != DATASET_VERSION:
        raise FormatError(f"{path}: not a version-{DATASET_VERSION} dataset file")
    family = header["family"]
    records = [record_from_dict(env, family, json.loads(ln)) for ln in lines[1:]]
    if len(records) != header["count"]:
        raise FormatError(f"{path}: header promises {header['count']} records, found {len(records)}")
    return family, records


def build_all(env: DiscreteEnv, trajectory: Trajectory, tree: SubgoalTree,
              cfg: LabelingConfig = LabelingConfig(), stream: int = 0) -> Tuple[Dict[str, list], int]:
    """Every family for one trajectory, plus the number of skipped empty windows."""
    skips = _Skips()
    data = {
        "anticipation": build_anticipation_dataset(tree, trajectory, cfg, stream, skips),
        "value": build_value_dataset(tree, trajectory, cfg, stream, skips=skips),
        "policy": build_policy_dataset(tree, trajectory, cfg, stream, skips),
        "dynamics": build_dynamics_dataset(tree, trajectory, cfg, stream, skips),
        "inverse": build_inverse_dataset(tree, trajectory, env, cfg, stream, skips),
    }
    return data, skips.count


def write_datasets(out_dir, env_records: Sequence[Tuple[DiscreteEnv, Dict[str, list]]],
                   cfg: LabelingConfig, skipped: int = 0, extra: Optional[dict] = None) -> dict:
    """One file per family (records from all environments concatenated) and a manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    counts = {}
    for family in FAMILIES:
        chunks = []
        total = 0
        for i, (env, data) in enumerate(env_records):
            recs = data[family]
            total += len(recs)
            chunks += [json.dumps({"env_index": i, **record_to_dict(env, r)}, sort_keys=True) for r in recs]
        header = {"format": DATASET_FORMAT, "version": DATASET_VERSION, "family": family, "count": total}
        (out / f"{family}.jsonl").write_text("\n".join([json.dumps(header, sort_keys=True)] + chunks) + "\n")
        counts[family] = total
    manifest = {"format": DATASET_FORMAT + "-manifest", "version": DATASET_VERSION, "counts": counts,
                "skipped_windows": skipped, "config": asdict(cfg), **(extra or {})}
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return manifest
