"""Success rate, stage-wise scores and process reward, from results or from trace files."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

from ..errors import MisalignedStagesError
from ..executor import BACKTRACK, ERROR, POP, PUSH, EpisodeResult, read_trace


@dataclass(frozen=True)
class EpisodeSummary:
    """The per-episode facts every metric is computed from."""

    success: bool
    steps: int
    stage_completions: tuple
    pushes: int
    pops: int
    backtracks: int
    depth_max: int


def summarize(result: EpisodeResult) -> EpisodeSummary:
    return EpisodeSummary(result.success, result.steps_used, tuple(result.stage_completions),
                          result.count(PUSH), result.count(POP), result.backtrack_count, result.stack_depth_max)


def recount_episode(records: Sequence[dict]) -> EpisodeSummary:
    """Rebuild an episode summary from its serialized event records alone."""
    end = next(r for r in records if r["kind"] == "End")
    events = [r for r in records if r["kind"] != "End"]
    transitions = [r for r in events if r["kind"] in (POP, PUSH, BACKTRACK)]
    emptied = bool(transitions) and transitions[-1]["kind"] == POP and transitions[-1]["depth"] == 0
    errored = any(r["kind"] == ERROR for r in events)
    success = not errored and (emptied or end["final_satisfied"])
    best = max([end["start_stages"]] + [r["stages"] for r in events])
    depth_max = max([1] + [r["depth"] for r in events])
    return EpisodeSummary(
        success, end["step"], tuple(best >= i + 1 for i in range(end["n_stages"])),
        sum(r["kind"] == PUSH for r in events), sum(r["kind"] == POP for r in events),
        sum(r["kind"] == BACKTRACK for r in events), depth_max,
    )


def recount_trace(path) -> List[EpisodeSummary]:
    _, episodes = read_trace(path)
    return [recount_episode(episodes[k]) for k in sorted(episodes)]


def stage_scores(completions: Sequence[Sequence[bool]]) -> List[Optional[float]]:
    """Component i: completed stage i / attempted stage i; None when nobody attempted it."""
    completions = [list(c) for c in completions]
    if not completions:
        return []
    n = len(completions[0])
    if any(len(c) != n for c in completions):
        raise MisalignedStagesError("episodes disagree on the number of stages")
    out: List[Optional[float]] = []
    for i in range(n):
        attempted = [c for c in completions if i == 0 or c[i - 1]]
        out.append(sum(c[i] for c in attempted) / len(attempted) if attempted else None)
    return out


def process_reward(completions: Sequence[Sequence[bool]]) -> Optional[float]:
    """Mean fraction of stages credited per episode; None for stage-less tasks."""
    fractions = [sum(c) / len(c) for c in completions if len(c)]
    return sum(fractions) / len(fractions) if fractions else None


@dataclass
class MetricsReport:
    label: str
    episodes: int
    success_rate: float
    stage_scores: List[Optional[float]]
    process_reward: Optional[float]
    mean_steps: float
    mean_pushes: float
    mean_pops: float
    mean_backtracks: float
    mean_depth_max: float
    config: Dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"


def build_report(label: str, summaries: Sequence[EpisodeSummary], config: Optional[dict] = None) -> MetricsReport:
    n = len(summaries)
    if n == 0:
        raise ValueError("no episodes to report on")
    comps = [s.stage_completions for s in summaries]

    def mean(xs):
        return sum(xs) / n

    return MetricsReport(
        label=label,
        episodes=n,
        success_rate=sum(s.success for s in summaries) / n,
        stage_scores=stage_scores(comps),
        process_reward=process_reward(comps),
        mean_steps=mean([s.steps for s in summaries]),
        mean_pushes=mean([s.pushes for s in summaries]),
        mean_pops=mean([s.pops for s in summaries]),
        mean_backtracks=mean([s.backtracks for s in summaries]),
        mean_depth_max=mean([s.depth_max for s in summaries]),
        config=dict(config or {}),
    )


def _fmt(x) -> str:
    if x is None:
        return "n/a"
    if isinstance(x, float):
        return f"{x:.3f}"
    return str(x)


def _rows(reports: Sequence[MetricsReport]) -> tuple:
    width = max((len(r.stage_scores) for r in reports), default=0)
    header = ["config", "episodes", "success", "process", *[f"stage{i + 1}" for i in range(width)],
              "steps", "pushes", "pops", "backtracks", "depth"]
    rows = []
    for r in reports:
        stages = list(r.stage_scores) + [None] * (width - len(r.stage_scores))
        rows.append([r.label, r.episodes, r.success_rate, r.process_reward, *stages, r.mean_steps,
                     r.mean_pushes, r.mean_pops, r.mean_backtracks, r.mean_depth_max])
    return header, rows


def format_table(reports: Sequence[MetricsReport]) -> str:
    """Aligned-column text table, one row per report."""
    header, rows = _rows(reports)
    cells = [header] + [[_fmt(x) for x in row] for row in rows]
    widths = [max(len(row[j]) for row in cells) for j in range(len(header))]
    lines = ["  ".join(c.ljust(w) if j == 0 else c.rjust(w) for j, (c, w) in enumerate(zip(row, widths)))
             for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def format_csv(reports: Sequence[MetricsReport]) -> str:
    header, rows = _rows(reports)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if x is None else x for x in row])
    return buf.getvalue()
