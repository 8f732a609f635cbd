import numpy as np
import pytest
from hypothesis import given, strategies as st

from anticipation.envs import BlockWordsEnv, ChainEnv
from anticipation.errors import CapacityError, FormatError, UnknownStateError, UnsatisfiableGoalError
from anticipation.gmdp import Goal
from anticipation.values import (
    OracleValueModel,
    ProgressLabel,
    ProgressThresholds,
    bellman_residual,
    classify_progress,
    classify_values,
    compute_values,
    load_table,
    save_table,
)
from oracles import forward_table

TH0 = ProgressThresholds(0, 0)


def test_chain_distances(chain):
    v = compute_values(chain, Goal(None, 0))
    assert [v[k] for k in range(10)] == list(range(10))


def test_spelled_state_has_zero_value(cat_env):
    g = cat_env.task_goal
    v = compute_values(cat_env, g)
    spelled = [s for s in cat_env.states() if cat_env.satisfied(s, g)]
    assert spelled and all(v[s] == 0 for s in spelled)
    assert v[cat_env.initial] > 0


def test_matches_forward_bfs_on_slot_goal(cat_env):
    g = Goal("place the block with letter <C> on the table")
    table = compute_values(cat_env, g)
    expected = forward_table(cat_env, g)
    assert table.as_dict() == {s: d for s, d in expected.items() if d is not None}


@pytest.mark.parametrize("instr", [
    "spell the word: CAT using the blocks on the table",
    "pick up the block with letter: <T>",
    "place the block with letter <A> to the right of the previous block",
    "move the gripper to row 1, column 3",
])
def test_matches_forward_bfs_various_goals(cat_env, instr):
    g = Goal(instr)
    expected = {s: d for s, d in forward_table(cat_env, g).items() if d is not None}
    assert compute_values(cat_env, g).as_dict() == expected


def test_target_goal_matches_forward_bfs(fruit_env):
    g = fruit_env.task_goal
    expected = {s: d for s, d in forward_table(fruit_env, g).items() if d is not None}
    assert compute_values(fruit_env, g).as_dict() == expected


def test_unsatisfiable_goal(cat_env):
    held = cat_env.step(cat_env.initial, 1)
    # a target that holds C while C sits in a slot is not a reachable configuration
    bogus = held._replace(held=0, tiles=(4, 6, 7))
    with pytest.raises(UnsatisfiableGoalError):
        compute_values(cat_env, Goal(None, bogus))


def test_capacity_limit(cat_env):
    with pytest.raises(CapacityError):
        compute_values(cat_env, cat_env.task_goal, max_states=10)
    with pytest.raises(CapacityError):
        BlockWordsEnv(cat_env.instance, state_cap=50).states()


def test_residual_zero_and_perturbed(chain):
    v = compute_values(chain, Goal(None, 0))
    assert bellman_residual(chain, v) == 0
    assert bellman_residual(chain, v.with_entry(5, v[5] + 1)) == 1


def test_residual_single_state():
    env = ChainEnv(1)
    assert bellman_residual(env, compute_values(env, Goal(None, 0))) == 0


def test_residual_zero_blockwords(cat_env):
    assert bellman_residual(cat_env, compute_values(cat_env, cat_env.task_goal)) == 0


def test_classify_examples(chain):
    v = compute_values(chain, Goal(None, 0))
    assert classify_progress(v, 7, 0, TH0) == ProgressLabel.ACHIEVED
    assert classify_progress(v, 5, 5, TH0) == ProgressLabel.NO_PROGRESS
    assert classify_progress(v, 5, 3, TH0) == ProgressLabel.PROGRESS


def test_classify_unknown_state(chain):
    v = compute_values(chain, Goal(None, 0))
    with pytest.raises(UnknownStateError):
        classify_progress(v, 5, 99, TH0)


def test_label_serialization():
    assert [int(x) for x in (ProgressLabel.ACHIEVED, ProgressLabel.PROGRESS, ProgressLabel.NO_PROGRESS)] == [2, 1, 0]
    assert len(ProgressLabel) == 3


@pytest.mark.parametrize("bad", [-1, float("inf"), float("nan")])
def test_threshold_validation(bad):
    with pytest.raises(ValueError):
        ProgressThresholds(delta_goal=bad)
    with pytest.raises(ValueError):
        ProgressThresholds(delta_prog=bad)


@given(st.integers(0, 50), st.integers(0, 50), st.integers(-20, 20), st.integers(0, 3), st.integers(0, 3))
def test_classifier_total_and_shift_invariant(vp, vc, c, dg, dp):
    th = ProgressThresholds(dg, dp)
    label = classify_values(vp, vc, th)
    assert label in set(ProgressLabel)
    # shifting every value, the goal's included, leaves the label unchanged
    assert classify_values(vp + c, vc + c, th, v_goal=c) == label


def test_greedy_rollout_never_stalls(cat_env):
    g = cat_env.task_goal
    v = compute_values(cat_env, g)
    for start in cat_env.states()[::37]:
        path, _ = v.optimal_path(start)
        for a, b in zip(path, path[1:]):
            label = classify_progress(v, a, b, TH0)
            assert label != ProgressLabel.NO_PROGRESS
            if label == ProgressLabel.ACHIEVED:
                break


def test_table_roundtrip(tmp_path, cat_env):
    g = Goal("pick up the block with letter: <A>")
    v = compute_values(cat_env, g)
    save_table(tmp_path / "t.avt", v)
    back = load_table(tmp_path / "t.avt", cat_env, g)
    assert np.array_equal(back.distances, v.distances)
    raw = (tmp_path / "t.avt").read_bytes()
    assert raw[:4] == b"AVT1"


def test_table_rejects_other_goal(tmp_path, cat_env):
    v = compute_values(cat_env, Goal("pick up the block with letter: <A>"))
    save_table(tmp_path / "t.avt", v)
    with pytest.raises(FormatError):
        load_table(tmp_path / "t.avt", cat_env, Goal("pick up the block with letter: <C>"))
    (tmp_path / "bad.avt").write_bytes(b"XXXX" + (tmp_path / "t.avt").read_bytes()[4:])
    with pytest.raises(FormatError):
        load_table(tmp_path / "bad.avt", cat_env, Goal("pick up the block with letter: <A>"))


def test_oracle_model_caches(cat_env):
    m = OracleValueModel(cat_env)
    g = cat_env.task_goal
    assert m.table(g) is m.table(g.at_level(3))
    assert m.value(cat_env.initial, g) == compute_values(cat_env, g)[cat_env.initial]
