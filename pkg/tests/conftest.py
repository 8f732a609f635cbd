import numpy as np
import pytest

from anticipation.envs import BlockWordsEnv, BlockWordsInstance, ChainEnv, RearrangeEnv, RearrangeInstance
from anticipation.values import OracleValueModel


def cat_instance():
    # slots on row 0, tiles scattered on row 1
    return BlockWordsInstance(2, 4, "CAT", (("C", 1, 0), ("A", 1, 2), ("T", 1, 3)), ((0, 0), (0, 1), (0, 2)))


def fruit_instance():
    return RearrangeInstance(
        plates=(("pink", "circle"), ("brown", "squared"), ("blue", "circle")),
        objects=(("apple", "fruit"), ("fork", "utensil")),
        initial=(0, 2),
        goal=(1, 0),
        gripper=2,
    )


@pytest.fixture
def chain():
    return ChainEnv(10)


@pytest.fixture
def cat_env():
    return BlockWordsEnv(cat_instance())


@pytest.fixture
def cat_values(cat_env):
    return OracleValueModel(cat_env)


@pytest.fixture
def fruit_env():
    return RearrangeEnv(fruit_instance())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
