from .base import Boundary, DiscreteEnv, Skill, normalize_descriptor
from .blockwords import BlockState, BlockWordsEnv, BlockWordsInstance, generate_blockwords
from .chain import ChainEnv
from .instances import generate_suite, load_instances, make_env, save_instances
from .policies import BlankingPolicy, CompetencePolicy, FaultPolicyConfig, FrozenPolicy
from .rearrange import RearrangeEnv, RearrangeInstance, RearrangeState, generate_rearrange

__all__ = [
    "Boundary",
    "BlankingPolicy",
    "BlockState",
    "BlockWordsEnv",
    "BlockWordsInstance",
    "ChainEnv",
    "CompetencePolicy",
    "DiscreteEnv",
    "FaultPolicyConfig",
    "FrozenPolicy",
    "RearrangeEnv",
    "RearrangeInstance",
    "RearrangeState",
    "Skill",
    "generate_blockwords",
    "generate_rearrange",
    "generate_suite",
    "load_instances",
    "make_env",
    "normalize_descriptor",
    "save_instances",
]
