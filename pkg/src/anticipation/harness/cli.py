"""Command-line entry point: ``anticipation <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import fields
from pathlib import Path

from ..datasetgen import LabelingConfig, annotate, build_all, expert_trajectory, write_datasets
from ..envs import load_instances, make_env, save_instances
from ..errors import PlannerError
from ..executor import check_trace_invariants, read_trace, write_trace
from ..values import OracleValueModel
from .config import ABLATIONS, ExperimentConfig, load_config
from .metrics import build_report, format_csv, format_table, recount_trace
from .suite import run_ablations, run_suite, suite_instances


def _parse_bool(text: str) -> bool:
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _radius(text: str) -> float:
    return math.inf if text.lower() in ("inf", "infinity") else float(text)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON config file; flags override its values")
    types = {"competence_radius": _radius}
    for f in fields(ExperimentConfig):
        kind = types.get(f.name) or {bool: _parse_bool, int: int, float: float, str: str}.get(
            type(f.default), str)
        p.add_argument("--" + f.name.replace("_", "-"), dest=f.name, type=kind, default=None,
                       help=f"(default {f.default})")


def _config_from(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    changes = {f.name: getattr(args, f.name) for f in fields(ExperimentConfig)
               if getattr(args, f.name, None) is not None}
    return cfg.with_(**changes).validate()


def _instances(args, cfg):
    return load_instances(args.instances) if getattr(args, "instances", None) else suite_instances(cfg)


def _emit(reports, args) -> None:
    sys.stdout.write(format_table(reports))
    if args.csv:
        Path(args.csv).write_text(format_csv(reports))
    if args.json:
        Path(args.json).write_text(json.dumps([json.loads(r.to_json()) for r in reports], sort_keys=True,
                                              indent=2) + "\n")


def cmd_generate_suite(args) -> int:
    cfg = _config_from(args)
    if cfg.family == "chain":
        raise SystemExit("chain suites need no instance file")
    save_instances(args.out, suite_instances(cfg), seed=cfg.suite_seed)
    print(f"wrote {cfg.count} {cfg.family} instances to {args.out}")
    return 0


def cmd_run(args) -> int:
    cfg = _config_from(args)
    report, results = run_suite(cfg, _instances(args, cfg))
    if args.trace:
        write_trace(args.trace, results, {"config": cfg.to_dict()})
    _emit([report], args)
    return 0


def cmd_ablate(args) -> int:
    cfg = _config_from(args)
    names = args.only or list(ABLATIONS)
    runs = run_ablations(cfg, names, _instances(args, cfg))
    _emit([r for r, _ in runs], args)
    return 0


def cmd_datasetgen(args) -> int:
    cfg = LabelingConfig(beta=args.beta, gamma=args.gamma, delta_lo=args.delta_lo, epsilon_hi=args.epsilon_hi,
                         samples_per_subgoal=args.samples, seed=args.seed)
    pairs, skipped = [], 0
    for i, inst in enumerate(load_instances(args.instances)):
        env = make_env(inst)
        traj = expert_trajectory(env, env.task_goal, OracleValueModel(env))
        data, skips = build_all(env, traj, annotate(traj, env, env.task_goal), cfg, stream=i)
        pairs.append((env, data))
        skipped += skips
    manifest = write_datasets(args.out, pairs, cfg, skipped, {"instances": str(args.instances)})
    for family, n in manifest["counts"].items():
        print(f"{family:<13} {n}")
    return 0


def cmd_replay_trace(args) -> int:
    header, episodes = read_trace(args.trace)
    summaries = recount_trace(args.trace)
    cfg = header.get("config", {})
    bad = 0
    for ep, s in zip(sorted(episodes), summaries):
        problems = check_trace_invariants(episodes[ep], cfg.get("check_interval", 1), cfg.get("max_depth", 10**9))
        bad += bool(problems)
        status = "ok" if not problems else "; ".join(problems)
        print(f"episode {ep:>4}  success={int(s.success)}  steps={s.steps:>4}  pushes={s.pushes:>3}  "
              f"pops={s.pops:>3}  backtracks={s.backtracks}  invariants={status}")
    return 1 if bad else 0


def cmd_report(args) -> int:
    reports = []
    for path in args.traces:
        header, _ = read_trace(path)
        cfg = header.get("config", {})
        label = ExperimentConfig.from_dict(cfg).label if cfg else Path(path).stem
        reports.append(build_report(label, recount_trace(path), cfg))
    _emit(reports, args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anticipation", description="Goal-stack subgoal anticipation experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-suite", help="write a seeded instance suite")
    _add_config_flags(p)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_generate_suite)

    for name, func, text in (("run", cmd_run, "run one configuration"),
                             ("ablate", cmd_ablate, "run the full system and its ablations")):
        p = sub.add_parser(name, help=text)
        _add_config_flags(p)
        p.add_argument("--instances", type=Path, help="instance file (default: generate from the config)")
        p.add_argument("--csv", type=Path, help="also write the table as CSV")
        p.add_argument("--json", type=Path, help="also write the reports as JSON")
        if name == "run":
            p.add_argument("--trace", type=Path, help="write the event trace (JSON lines)")
        else:
            p.add_argument("--only", nargs="+", choices=list(ABLATIONS))
        p.set_defaults(func=func)

    p = sub.add_parser("datasetgen", help="annotate expert trajectories and emit datasets")
    p.add_argument("--instances", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--beta", type=int)
    p.add_argument("--gamma", type=int)
    p.add_argument("--delta-lo", type=int)
    p.add_argument("--epsilon-hi", type=int)
    p.add_argument("--samples", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_datasetgen)

    p = sub.add_parser("replay-trace", help="recount a trace and check its invariants")
    p.add_argument("trace", type=Path)
    p.set_defaults(func=cmd_replay_trace)

    p = sub.add_parser("report", help="metrics tables recounted from trace files")
    p.add_argument("traces", type=Path, nargs="+")
    p.add_argument("--csv", type=Path)
    p.add_argument("--json", type=Path)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PlannerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
