"""Experiment configuration and its plain-text (JSON) file form.

Documented keys (all optional, defaults in parentheses):

family ("blockwords"), count (20), suite_seed (0), size (4), plates (4),
distractors (0), episodes (5), seed (0), check_interval (2), max_depth (4),
max_steps (400), max_backtracks (3), delta_goal (0), delta_prog (0),
competence_radius (3), slip_probability (0.0), policy ("competence"),
anticipator ("oracle"), hallucination_rate (0.0), max_regenerations (3),
split_fraction (0.5), no_target_state (false), no_descriptor (false),
no_recursive (false).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from ..anticipator import AnticipationConfig
from ..envs.policies import FaultPolicyConfig
from ..errors import ConfigError
from ..executor import ExecutorConfig
from ..values import ProgressThresholds

FAMILIES = ("blockwords", "rearrange", "chain")
POLICIES = ("competence", "frozen")
ANTICIPATORS = ("oracle", "two_stage")


@dataclass(frozen=True)
class ExperimentConfig:
    family: str = "blockwords"
    count: int = 20
    suite_seed: int = 0
    size: int = 4
    plates: int = 4
    distractors: int = 0
    episodes: int = 5
    seed: int = 0
    check_interval: int = 2
    max_depth: int = 4
    max_steps: int = 400
    max_backtracks: int = 3
    delta_goal: float = 0
    delta_prog: float = 0
    competence_radius: float = 3
    slip_probability: float = 0.0
    policy: str = "competence"
    anticipator: str = "oracle"
    hallucination_rate: float = 0.0
    max_regenerations: int = 3
    split_fraction: float = 0.5
    no_target_state: bool = False
    no_descriptor: bool = False
    no_recursive: bool = False

    def validate(self) -> "ExperimentConfig":
        if self.family not in FAMILIES:
            raise ConfigError(f"family must be one of {FAMILIES}")
        if self.policy not in POLICIES:
            raise ConfigError(f"policy must be one of {POLICIES}")
        if self.anticipator not in ANTICIPATORS:
            raise ConfigError(f"anticipator must be one of {ANTICIPATORS}")
        if self.count < 1 or self.episodes < 1:
            raise ConfigError("count and episodes must be positive")
        if self.no_recursive and self.max_depth < 2:
            raise ConfigError("no_recursive needs max_depth >= 2 to hold the fixed plan item")
        if self.no_target_state and self.no_descriptor:
            raise ConfigError("blanking both goal fields would leave subgoals vacuous")
        try:
            self.executor_config()
            self.policy_config()
            self.anticipation_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def executor_config(self) -> ExecutorConfig:
        return ExecutorConfig(self.check_interval, ProgressThresholds(self.delta_goal, self.delta_prog),
                              self.max_depth, self.max_steps, self.max_backtracks)

    def policy_config(self) -> FaultPolicyConfig:
        return FaultPolicyConfig(self.competence_radius, self.slip_probability)

    def anticipation_config(self) -> AnticipationConfig:
        return AnticipationConfig(self.max_regenerations, self.split_fraction, self.hallucination_rate)

    @property
    def label(self) -> str:
        flags = [n for n in ("no_target_state", "no_descriptor", "no_recursive") if getattr(self, n)]
        if self.max_depth == 1 and not flags:
            flags = ["flat"]
        return "+".join(flags) or "full"

    def to_dict(self) -> dict:
        d = asdict(self)
        if math.isinf(d["competence_radius"]):
            d["competence_radius"] = "inf"
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(data)
        if kw.get("competence_radius") in ("inf", "infinity", None):
            kw["competence_radius"] = math.inf
        return cls(**kw)

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)


def load_config(path) -> ExperimentConfig:
    return ExperimentConfig.from_dict(json.loads(Path(path).read_text()))


def save_config(path, cfg: ExperimentConfig) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), sort_keys=True, indent=2) + "\n")


ABLATIONS = {
    "full": {},
    "no_target_state": {"no_target_state": True},
    "no_descriptor": {"no_descriptor": True},
    "no_recursive": {"no_recursive": True, "max_depth": 2},
    "flat": {"max_depth": 1},
}
