"""Instance definition files and seeded suite generation.

A suite file is JSON lines.  The first line is a header::

    {"format": "anticipation-instances", "version": 1, "family": ..., "seed": ..., "count": ...}

Every following line is one instance.  BlockWords keys: ``grid`` ([rows, cols]),
``word``, ``tiles`` ([[letter, row, col], ...] home cells), ``slots``
([[row, col], ...] left to right), ``gripper``.  Rearrange keys: ``plates``
([[color, shape], ...] left to right), ``objects`` ([[name, kind], ...]),
``initial`` and ``goal`` (plate index per object), ``gripper``.

Instance ``i`` of a suite is drawn from ``numpy.random.default_rng([seed, i])``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np

from ..errors import FormatError
from .blockwords import BlockWordsEnv, BlockWordsInstance, generate_blockwords
from .chain import ChainEnv
from .rearrange import RearrangeEnv, RearrangeInstance, generate_rearrange

INSTANCE_FORMAT = "anticipation-instances"
INSTANCE_VERSION = 1

Instance = Union[BlockWordsInstance, RearrangeInstance]


def instance_from_dict(data: dict) -> Instance:
    family = data.get("family")
    if family == "blockwords":
        return BlockWordsInstance.from_dict(data)
    if family == "rearrange":
        return RearrangeInstance.from_dict(data)
    raise FormatError(f"unknown instance family {family!r}")


def make_env(instance: Instance):
    if isinstance(instance, BlockWordsInstance):
        return BlockWordsEnv(instance)
    if isinstance(instance, RearrangeInstance):
        return RearrangeEnv(instance)
    if isinstance(instance, int):
        return ChainEnv(instance)
    raise TypeError(f"no environment for {type(instance).__name__}")


def generate_suite(family: str, count: int, seed: int, size: int = 4, plates: int = 4,
                   distractors: int = 0) -> List[Instance]:
    """``size`` is the word length (blockwords) or the object count (rearrange)."""
    out: List[Instance] = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        if family == "blockwords":
            out.append(generate_blockwords(size, rng, distractors=distractors))
        elif family == "rearrange":
            out.append(generate_rearrange(size, plates, rng))
        else:
            raise ValueError(f"unknown family {family!r}")
    return out


def save_instances(path, instances: Sequence[Instance], **meta) -> None:
    families = {inst.to_dict()["family"] for inst in instances}
    header = {"format": INSTANCE_FORMAT, "version": INSTANCE_VERSION,
              "family": families.pop() if len(families) == 1 else "mixed",
              "count": len(instances), **meta}
    lines = [json.dumps(header, sort_keys=True)]
    lines += [json.dumps(inst.to_dict(), sort_keys=True) for inst in instances]
    Path(path).write_text("\n".join(lines) + "\n")


def load_instances(path) -> List[Instance]:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise FormatError(f"{path}: empty instance file")
    header = json.loads(lines[0])
    if header.get("format") != INSTANCE_FORMAT:
        raise FormatError(f"{path}: not an instance file")
    if header.get("version") != INSTANCE_VERSION:
        raise FormatError(f"{path}: unsupported version {header.get('version')}")
    return [instance_from_dict(json.loads(ln)) for ln in lines[1:]]
