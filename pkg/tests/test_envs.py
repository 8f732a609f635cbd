import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anticipation.envs import (
    BlockWordsEnv,
    BlockWordsInstance,
    CompetencePolicy,
    FaultPolicyConfig,
    RearrangeEnv,
    RearrangeInstance,
    generate_blockwords,
    generate_rearrange,
    generate_suite,
    load_instances,
    make_env,
    save_instances,
)
from anticipation.envs.blockwords import DOWN, LEFT, PICK, PLACE, RIGHT, UP
from anticipation.errors import FormatError, InstructionParseError, NoDecompositionError
from anticipation.gmdp import Goal
from anticipation.values import OracleValueModel, compute_values
from oracles import hand_count_blockwords_one_letter, hand_rearrange_states


def spell(env, letters):
    """Drive the gripper to place the given letters in order (test helper, not the expert)."""
    s = env.initial
    for ch in letters:
        i = env.letters.index(ch)
        for a in env.route(s.gripper, env.homes[i]) + (PICK,):
            s = env.step(s, a)
        k = env.n_placed(s)
        for a in env.route(s.gripper, env.slot_cells[k]) + (PLACE,):
            s = env.step(s, a)
    return s


def test_one_letter_state_count():
    inst = BlockWordsInstance(2, 2, "A", (("A", 1, 1),), ((0, 0),))
    assert BlockWordsEnv(inst).num_states == hand_count_blockwords_one_letter(2, 2) == 12


def test_rearrange_one_object_two_plates():
    inst = RearrangeInstance((("pink", "circle"), ("brown", "squared")), (("apple", "fruit"),), (0,), (1,))
    env = RearrangeEnv(inst)
    assert {(s.gripper, s.held, s.plates) for s in env.states()} == hand_rearrange_states(2, [0])
    assert env.num_states == 6


def test_rearrange_two_objects_hand_enumeration(fruit_env):
    got = {(s.gripper, s.held, s.plates) for s in fruit_env.states()}
    assert got == hand_rearrange_states(3, [0, 2])


def test_empty_instance_single_state():
    env = RearrangeEnv(RearrangeInstance((("pink", "circle"),), (), (), ()))
    assert env.num_states == 1


def test_enumeration_deterministic(cat_env):
    again = BlockWordsEnv(cat_env.instance)
    assert again.states() == cat_env.states()


def test_spell_predicate(cat_env):
    g = Goal("spell the word: CAT using the blocks on the table")
    assert cat_env.satisfied(spell(cat_env, "CAT"), g)
    assert not cat_env.satisfied(spell(cat_env, "ACT"), g)


def test_image_goal_ignores_gripper(cat_env):
    done = spell(cat_env, "CAT")
    moved = cat_env.step(cat_env.step(done, DOWN), RIGHT)
    assert moved.gripper != done.gripper
    assert cat_env.satisfied(moved, Goal(None, done))


def test_unparseable_instruction(cat_env):
    with pytest.raises(InstructionParseError):
        cat_env.satisfied(cat_env.initial, Goal("dance a little"))
    with pytest.raises(InstructionParseError):
        cat_env.satisfied(cat_env.initial, Goal("pick up the block with letter: <Z>"))


def test_mask_matches_scalar_predicate(cat_env, fruit_env):
    goals = [
        (cat_env, Goal("spell the word: CAT")),
        (cat_env, Goal("spell the word: CA")),
        (cat_env, Goal("place the block with letter <A> to the right of the previous block")),
        (cat_env, Goal("place the current block to the right of the previous block")),
        (cat_env, Goal("move the gripper to row 0, column 3", spell(cat_env, "C"))),
        (fruit_env, fruit_env.task_goal),
        (fruit_env, Goal("place it in brown squared plate")),
        (fruit_env, Goal("pick up fork in blue circle plate")),
        (fruit_env, Goal("move the apple to the brown squared plate")),
    ]
    for env, g in goals:
        expected = [env.satisfied(s, g) for s in env.states()]
        assert env.satisfied_mask(g).tolist() == expected


def test_boundaries_spell(cat_env):
    b = cat_env.hierarchy_boundaries(cat_env.task_goal)
    assert [x.descriptor for x in b] == [
        "place the block with letter <C> on the table",
        "place the block with letter <A> to the right of the previous block",
        "place the block with letter <T> to the right of the previous block",
    ]


def test_boundaries_level_one(cat_env):
    b = cat_env.hierarchy_boundaries(Goal("place the block with letter <C> on the table", level=1))
    assert [x.descriptor for x in b] == ["pick up the block with letter: <C>", "place the block on the table"]


def test_boundaries_atomic(cat_env):
    with pytest.raises(NoDecompositionError):
        cat_env.hierarchy_boundaries(Goal("pick up the block with letter: <C>", level=2))


def test_rearrange_canonical_order(fruit_env):
    b = fruit_env.hierarchy_boundaries(fruit_env.task_goal)
    assert [x.descriptor for x in b] == ["move the apple to the brown squared plate",
                                         "move the fork to the pink circle plate"]


def test_hierarchy_soundness(cat_env, fruit_env):
    for env in (cat_env, fruit_env):
        g = env.task_goal
        bounds = env.hierarchy_boundaries(g)
        for s in env.states():
            assert env.satisfied(s, g) == all(b.predicate(s) for b in bounds)


def _unique_inverses(env):
    for s in env.states():
        reached = {}
        for k in env.skills_at(s):
            dst = env.run_macro(s, k.macro)
            if dst == s:
                continue
            assert dst not in reached, (s, k.descriptor, reached.get(dst))
            reached[dst] = k.descriptor


def test_skill_inverse_unique_blockwords(cat_env):
    _unique_inverses(cat_env)


def test_skill_inverse_unique_rearrange(fruit_env):
    _unique_inverses(fruit_env)


def test_skill_inverse_unique_generated():
    rng = np.random.default_rng(5)
    _unique_inverses(BlockWordsEnv(generate_blockwords(3, rng, distractors=1)))
    _unique_inverses(RearrangeEnv(generate_rearrange(3, 3, rng)))


def test_scripted_policy_is_optimal(cat_env, fruit_env, rng):
    for env in (cat_env, fruit_env):
        values = OracleValueModel(env)
        policy = CompetencePolicy(env, values, FaultPolicyConfig(math.inf, 0.0))
        g = env.task_goal
        s, steps = env.initial, 0
        while not env.satisfied(s, g):
            s = env.step(s, policy.act(s, g, rng))
            steps += 1
        assert steps == values.value(env.initial, g)


def test_competence_radius_stalls(cat_env, rng):
    values = OracleValueModel(cat_env)
    policy = CompetencePolicy(cat_env, values, FaultPolicyConfig(3, 0.0))
    assert values.value(cat_env.initial, cat_env.task_goal) > 3
    assert policy.act(cat_env.initial, cat_env.task_goal, rng) == cat_env.noop


@pytest.mark.parametrize("r,p", [(0, 0.0), (1, -0.1), (1, 1.5)])
def test_fault_config_validation(r, p):
    with pytest.raises(ValueError):
        FaultPolicyConfig(r, p)


def test_instance_validation():
    with pytest.raises(ValueError):
        BlockWordsInstance(2, 2, "AB", (("A", 1, 1),), ((0, 0), (0, 1)))
    with pytest.raises(ValueError):
        RearrangeInstance((("pink", "circle"),), (("apple", "fruit"),), (0,), (3,))


def test_instance_file_roundtrip(tmp_path):
    insts = generate_suite("blockwords", 3, seed=7) + generate_suite("rearrange", 2, seed=7, size=2, plates=3)
    save_instances(tmp_path / "suite.jsonl", insts, seed=7)
    assert load_instances(tmp_path / "suite.jsonl") == insts
    head = (tmp_path / "suite.jsonl").read_text().splitlines()[0]
    assert '"version": 1' in head


def test_instance_file_rejects_bad_header(tmp_path):
    (tmp_path / "x.jsonl").write_text('{"format": "other", "version": 1}\n')
    with pytest.raises(FormatError):
        load_instances(tmp_path / "x.jsonl")


def test_suite_is_seeded():
    assert generate_suite("blockwords", 4, seed=3) == generate_suite("blockwords", 4, seed=3)
    assert generate_suite("blockwords", 4, seed=3) != generate_suite("blockwords", 4, seed=4)


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 5), st.integers(0, 2**31 - 1))
def test_generated_blockwords_valid(n, seed):
    inst = generate_blockwords(n, np.random.default_rng(seed))
    assert len(inst.word) == n and len(set(inst.word)) == n
    assert BlockWordsInstance.from_dict(inst.to_dict()) == inst


def test_make_env_dispatch(cat_env, fruit_env):
    assert isinstance(make_env(cat_env.instance), BlockWordsEnv)
    assert isinstance(make_env(fruit_env.instance), RearrangeEnv)
    with pytest.raises(TypeError):
        make_env("nope")


def test_render_marks_gripper(cat_env):
    pic = cat_env.render(cat_env.initial)
    assert "*" in pic and "A" in pic


def test_step_total_on_all_states(cat_env):
    n = cat_env.num_states
    table = cat_env.successor_table()
    assert table.shape == (n, len(cat_env.actions))
    assert table.min() >= 0 and table.max() < n
    assert compute_values(cat_env, cat_env.task_goal)[cat_env.initial] > 0
    # up from the top row is clamped
    assert cat_env.step(cat_env.initial, UP) == cat_env.initial
    assert cat_env.step(cat_env.initial, LEFT) == cat_env.initial
