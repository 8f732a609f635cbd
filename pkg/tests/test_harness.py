import json

import pytest
from hypothesis import given, strategies as st

from anticipation.errors import ConfigError, MisalignedStagesError
from anticipation.executor import write_trace
from anticipation.harness import cli
from anticipation.harness.config import ExperimentConfig, load_config, save_config
from anticipation.harness.metrics import (
    EpisodeSummary,
    build_report,
    format_csv,
    format_table,
    process_reward,
    recount_trace,
    stage_scores,
    summarize,
)
from anticipation.harness.suite import run_ablations, run_suite

SMALL = ExperimentConfig(count=3, episodes=2, size=3, max_steps=200)


def test_stage_scores_examples():
    runs = [[True, True, False, False]] * 10
    assert stage_scores(runs) == [1.0, 1.0, 0.0, None]


def test_stage_scores_mixed_by_hand():
    runs = [[True, False, False], [True, True, False], [False, False, False], [True, True, True]]
    # stage 2 attempted by the three that cleared stage 1, stage 3 by the two that cleared stage 2
    assert stage_scores(runs) == [0.75, 2 / 3, 0.5]


def test_stage_scores_misaligned():
    with pytest.raises(MisalignedStagesError):
        stage_scores([[True], [True, False]])


@given(st.lists(st.lists(st.booleans(), min_size=4, max_size=4), min_size=1, max_size=20))
def test_stage_scores_bounded(runs):
    for x in stage_scores(runs):
        assert x is None or 0.0 <= x <= 1.0


def test_process_reward_half():
    assert process_reward([[True, True, False, False]] * 7) == 0.5
    assert process_reward([[], []]) is None


def test_oracle_unbounded_radius_solves_everything():
    for family, size in (("blockwords", 3), ("rearrange", 3), ("chain", 12)):
        cfg = SMALL.with_(family=family, size=size, competence_radius=float("inf"))
        report, _ = run_suite(cfg)
        assert report.success_rate == 1.0


def test_config_conflicts_caught_before_running():
    with pytest.raises(ConfigError):
        run_suite(SMALL.with_(no_recursive=True, max_depth=1))
    with pytest.raises(ConfigError):
        run_suite(SMALL.with_(no_target_state=True, no_descriptor=True))
    with pytest.raises(ConfigError):
        SMALL.with_(check_interval=0).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"colour": "red"})


def test_config_file_roundtrip(tmp_path):
    cfg = SMALL.with_(competence_radius=float("inf"), family="rearrange")
    save_config(tmp_path / "c.json", cfg)
    assert load_config(tmp_path / "c.json") == cfg


def test_recount_matches_direct_summaries(tmp_path):
    cfg = SMALL.with_(slip_probability=0.1, episodes=4)
    report, results = run_suite(cfg)
    write_trace(tmp_path / "t.jsonl", results, {"config": cfg.to_dict()})
    recounted = recount_trace(tmp_path / "t.jsonl")
    assert recounted == [summarize(r) for r in results]
    assert build_report(cfg.label, recounted, cfg.to_dict()) == report


def test_ablation_ordering():
    runs = run_ablations(SMALL.with_(count=4, size=4, episodes=2))
    rates = {r.label: r.success_rate for r, _ in runs}
    assert set(rates) == {"full", "no_target_state", "no_descriptor", "no_recursive", "flat"}
    assert all(rates["full"] >= v for v in rates.values())


def test_reports_are_reproducible():
    a, _ = run_suite(SMALL.with_(slip_probability=0.05))
    b, _ = run_suite(SMALL.with_(slip_probability=0.05))
    assert a.to_json() == b.to_json()


def test_table_and_csv_layout():
    s = EpisodeSummary(True, 10, (True, False, False), 2, 3, 0, 3)
    r = build_report("full", [s, s])
    table = format_table([r])
    assert table.splitlines()[0].split()[:4] == ["config", "episodes", "success", "process"]
    assert "n/a" in table  # nobody cleared stage 2, so stage 3 was never attempted
    rows = format_csv([r]).splitlines()
    assert rows[1].startswith("full,2,1.0,0.3333333333333333,1.0,0.0,,")


def test_cli_end_to_end(tmp_path, capsys):
    suite = tmp_path / "suite.jsonl"
    common = ["--family", "blockwords", "--count", "2", "--size", "3", "--episodes", "2"]
    assert cli.main(["generate-suite", *common, "--out", str(suite)]) == 0
    trace = tmp_path / "run.jsonl"
    assert cli.main(["run", *common, "--instances", str(suite), "--trace", str(trace),
                     "--csv", str(tmp_path / "r.csv"), "--json", str(tmp_path / "r.json")]) == 0
    assert json.loads((tmp_path / "r.json").read_text())[0]["episodes"] == 4
    assert cli.main(["replay-trace", str(trace)]) == 0
    assert cli.main(["report", str(trace)]) == 0
    assert cli.main(["ablate", *common, "--instances", str(suite), "--only", "full", "flat"]) == 0
    out = tmp_path / "data"
    assert cli.main(["datasetgen", "--instances", str(suite), "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["counts"]) == {"anticipation", "value", "policy", "dynamics", "inverse"}
    text = capsys.readouterr().out
    assert "invariants=ok" in text and "full" in text


def test_cli_reports_config_conflict(capsys):
    assert cli.main(["run", "--no-recursive", "true", "--max-depth", "1", "--count", "1"]) == 2
    assert "no_recursive" in capsys.readouterr().err


def test_cli_config_file_with_override(tmp_path, capsys):
    save_config(tmp_path / "c.json", SMALL.with_(family="chain", size=6, competence_radius=float("inf")))
    assert cli.main(["run", "--config", str(tmp_path / "c.json"), "--episodes", "1"]) == 0
    assert "1.000" in capsys.readouterr().out
