"""Spell-Words analog: pick lettered tiles and lay them out left to right.

Descriptor grammar (case-insensitive, ``<X>`` is a tile letter):

=====  =====================================================================
level  instruction
=====  =====================================================================
0      ``spell the word: <WORD> using the blocks on the table``
1      ``place the block with letter <X> on the table`` (first letter)
1      ``place the block with letter <X> to the right of the previous block``
2      ``pick up the block with letter: <X>``
2      ``place the block on the table`` / ``place the current block to the right of the previous block``
any    ``move the gripper to row <r>, column <c>`` (path-split waypoint)
=====  =====================================================================

A tile can be put down only in the next free slot or back on its home cell,
and only the most recently placed tile can be picked up again, so the word
row is always a prefix of the slots.
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from ..errors import InstructionParseError, NoDecompositionError
from ..gmdp import Goal
from .base import Boundary, DiscreteEnv, Skill, normalize_descriptor

UP, DOWN, LEFT, RIGHT, PICK, PLACE, NOOP = range(7)
ACTION_NAMES = ("up", "down", "left", "right", "pick", "place", "noop")


class BlockState(NamedTuple):
    gripper: int
    held: int  # tile index, -1 when the hand is empty
    tiles: Tuple[int, ...]  # cell index per tile, -1 while held


@dataclass(frozen=True)
class BlockWordsInstance:
    rows: int
    cols: int
    word: str
    tiles: Tuple[Tuple[str, int, int], ...]  # (letter, home row, home col)
    slots: Tuple[Tuple[int, int], ...]  # left to right
    gripper: Tuple[int, int] = (0, 0)

    def __post_init__(self):
        letters = [t[0] for t in self.tiles]
        if len(set(letters)) != len(letters):
            raise ValueError("tile letters must be unique")
        if not self.word or any(ch not in letters for ch in self.word):
            raise ValueError(f"every letter of {self.word!r} needs a tile")
        if len(set(self.word)) != len(self.word):
            raise ValueError("words with repeated letters are not supported")
        if len(self.slots) != len(self.word) or len(set(self.slots)) != len(self.slots):
            raise ValueError("need one distinct slot per word letter")
        homes = [(r, c) for _, r, c in self.tiles]
        if len(set(homes)) != len(homes) or set(homes) & set(self.slots):
            raise ValueError("home cells must be distinct and disjoint from the slots")
        for r, c in homes + list(self.slots) + [tuple(self.gripper)]:
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ValueError(f"cell {(r, c)} lies outside the {self.rows}x{self.cols} grid")

    @property
    def task_instruction(self) -> str:
        return f"spell the word: {self.word} using the blocks on the table"

    def to_dict(self) -> dict:
        return {
            "family": "blockwords",
            "grid": [self.rows, self.cols],
            "word": self.word,
            "tiles": [list(t) for t in self.tiles],
            "slots": [list(s) for s in self.slots],
            "gripper": list(self.gripper),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BlockWordsInstance":
        rows, cols = data["grid"]
        return cls(
            rows=int(rows),
            cols=int(cols),
            word=str(data["word"]).upper(),
            tiles=tuple((str(l).upper(), int(r), int(c)) for l, r, c in data["tiles"]),
            slots=tuple((int(r), int(c)) for r, c in data["slots"]),
            gripper=tuple(int(x) for x in data.get("gripper", (0, 0))),
        )


def generate_blockwords(word_length: int, rng: np.random.Generator, distractors: int = 0) -> BlockWordsInstance:
    """Random instance on a 2-row grid: slots on row 0, homes scattered over the rest."""
    n_tiles = word_length + distractors
    letters = rng.choice(list(string.ascii_uppercase), size=n_tiles, replace=False)
    word = "".join(letters[:word_length])
    cols = word_length + 1 + (distractors + 1) // 2
    slots = tuple((0, c) for c in range(word_length))
    free = [(r, c) for r in range(2) for c in range(cols) if (r, c) not in slots]
    picks = rng.choice(len(free), size=n_tiles, replace=False)
    order = rng.permutation(n_tiles)
    tiles = tuple((str(letters[order[i]]), *free[picks[i]]) for i in range(n_tiles))
    g = int(rng.integers(2 * cols))
    return BlockWordsInstance(2, cols, word, tiles, slots, (g // cols, g % cols))


_SPELL = re.compile(r"^spell the word:? ([a-z0-9]+)(?: using the blocks on the table)?$")
_COMPOSITE = re.compile(r"^place the block with letter <(\w)> (on the table|to the right of the previous block)$")
_PICK = re.compile(r"^pick up the block with letter:? <(\w)>$")
_PLACE_FIRST = "place the block on the table"
_PLACE_NEXT = "place the current block to the right of the previous block"
_MOVE = re.compile(r"^move the gripper to row (\d+), column (\d+)$")


class BlockWordsEnv(DiscreteEnv):
    """Grid world with a gripper, lettered tiles and a row of word slots."""

    name = "blockwords"
    actions = (UP, DOWN, LEFT, RIGHT, PICK, PLACE, NOOP)
    action_names = ACTION_NAMES
    noop = NOOP

    def __init__(self, instance: BlockWordsInstance, state_cap: Optional[int] = None):
        self.instance = instance
        if state_cap is not None:
            self.state_cap = state_cap
        self.rows, self.cols = instance.rows, instance.cols
        self.letters = tuple(t[0] for t in instance.tiles)
        self.homes = tuple(self.cell(r, c) for _, r, c in instance.tiles)
        self.slot_cells = tuple(self.cell(r, c) for r, c in instance.slots)
        self.slot_of = {c: j for j, c in enumerate(self.slot_cells)}
        self.word_tiles = tuple(self.letters.index(ch) for ch in instance.word)
        self.initial = BlockState(self.cell(*instance.gripper), -1, self.homes)
        self.task_goal = Goal(instance.task_instruction)

    def cell(self, r: int, c: int) -> int:
        return r * self.cols + c

    def coords(self, cell: int) -> Tuple[int, int]:
        return divmod(cell, self.cols)

    # -- dynamics ---------------------------------------------------------------------------
    def placed(self, s: BlockState) -> List[int]:
        """Tile index in each slot, -1 for empty slots."""
        out = [-1] * len(self.slot_cells)
        for i, c in enumerate(s.tiles):
            j = self.slot_of.get(c)
            if j is not None:
                out[j] = i
        return out

    def n_placed(self, s: BlockState) -> int:
        return sum(1 for c in s.tiles if c in self.slot_of)

    def step(self, s: BlockState, a: int) -> BlockState:
        r, c = divmod(s.gripper, self.cols)
        if a == UP:
            return s._replace(gripper=self.cell(max(r - 1, 0), c))
        if a == DOWN:
            return s._replace(gripper=self.cell(min(r + 1, self.rows - 1), c))
        if a == LEFT:
            return s._replace(gripper=self.cell(r, max(c - 1, 0)))
        if a == RIGHT:
            return s._replace(gripper=self.cell(r, min(c + 1, self.cols - 1)))
        if a == PICK and s.held < 0:
            k = self.n_placed(s)
            for i, pos in enumerate(s.tiles):
                if pos == s.gripper and (pos == self.homes[i] or (k and pos == self.slot_cells[k - 1])):
                    tiles = list(s.tiles)
                    tiles[i] = -1
                    return BlockState(s.gripper, i, tuple(tiles))
            return s
        if a == PLACE and s.held >= 0:
            k = self.n_placed(s)
            free_slot = self.slot_cells[k] if k < len(self.slot_cells) else None
            if s.gripper == free_slot or s.gripper == self.homes[s.held]:
                tiles = list(s.tiles)
                tiles[s.held] = s.gripper
                return BlockState(s.gripper, -1, tuple(tiles))
        return s

    def is_skill_action(self, action: int) -> bool:
        return action in (PICK, PLACE)

    # -- grammar ----------------------------------------------------------------------------
    def _tile(self, letter: str, text: str) -> int:
        try:
            return self.letters.index(letter.upper())
        except ValueError:
            raise InstructionParseError(f"no tile with letter {letter!r} in {text!r}") from None

    def parse_instruction(self, instruction: str) -> tuple:
        """Parse to ``(kind, *args)``; kinds: spell, prefix, slot, held, placed, gripper."""
        text = normalize_descriptor(instruction)
        m = _SPELL.match(text)
        if m:
            word = m.group(1).upper()
            return ("spell", tuple(self._tile(ch, text) for ch in word))
        m = _COMPOSITE.match(text)
        if m:
            tile = self._tile(m.group(1), text)
            first = m.group(2) == "on the table"
            if tile in self.word_tiles:
                return ("prefix", self.word_tiles.index(tile))
            return ("slot", tile, first)
        m = _PICK.match(text)
        if m:
            return ("held", self._tile(m.group(1), text))
        if text == _PLACE_FIRST:
            return ("placed", 1)
        if text == _PLACE_NEXT:
            return ("placed", 2)
        m = _MOVE.match(text)
        if m:
            r, c = int(m.group(1)), int(m.group(2))
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise InstructionParseError(text)
            return ("gripper", self.cell(r, c))
        raise InstructionParseError(instruction)

    def _holds(self, s: BlockState, parsed: tuple) -> bool:
        kind = parsed[0]
        if kind == "spell":
            placed = self.placed(s)
            return len(parsed[1]) <= len(placed) and placed[: len(parsed[1])] == list(parsed[1]) \
                and all(x < 0 for x in placed[len(parsed[1]):])
        if kind == "prefix":
            i = parsed[1]
            return self.placed(s)[: i + 1] == list(self.word_tiles[: i + 1])
        if kind == "slot":
            j = self.slot_of.get(s.tiles[parsed[1]])
            return j is not None and (j == 0 if parsed[2] else j >= 1)
        if kind == "held":
            return s.held == parsed[1]
        if kind == "placed":
            return s.held < 0 and self.n_placed(s) >= parsed[1]
        if kind == "gripper":
            return s.gripper == parsed[1]
        raise AssertionError(kind)

    def satisfied(self, s: BlockState, goal: Goal) -> bool:
        if goal.target_state is not None:
            t = goal.target_state
            if s.held != t.held or s.tiles != t.tiles:
                return False
        if goal.instruction is not None:
            return self._holds(s, self.parse_instruction(goal.instruction))
        return True

    def _features(self):
        feats = getattr(self, "_feats", None)
        if feats is None:
            states = self.states()
            grip = np.fromiter((s.gripper for s in states), dtype=np.int64, count=len(states))
            held = np.fromiter((s.held for s in states), dtype=np.int64, count=len(states))
            tiles = np.array([s.tiles for s in states], dtype=np.int64).reshape(len(states), -1)
            lookup = np.full(self.rows * self.cols + 1, -1, dtype=np.int64)
            for c, j in self.slot_of.items():
                lookup[c] = j
            slot_idx = lookup[tiles]  # -1 cells (held) hit the sentinel at the end
            placed = np.full((len(states), len(self.slot_cells)), -1, dtype=np.int64)
            for i in range(tiles.shape[1]):
                rows = np.nonzero(slot_idx[:, i] >= 0)[0]
                placed[rows, slot_idx[rows, i]] = i
            feats = self._feats = (grip, held, tiles, slot_idx, placed)
        return feats

    def satisfied_mask(self, goal: Goal) -> np.ndarray:
        grip, held, tiles, slot_idx, placed = self._features()
        mask = np.ones(len(grip), dtype=bool)
        if goal.target_state is not None:
            t = goal.target_state
            mask &= (held == t.held) & (tiles == np.asarray(t.tiles)).all(axis=1)
        if goal.instruction is None:
            return mask
        parsed = self.parse_instruction(goal.instruction)
        kind = parsed[0]
        if kind == "spell":
            want = np.full(placed.shape[1], -1)
            if len(parsed[1]) > len(want):
                return np.zeros_like(mask)
            want[: len(parsed[1])] = parsed[1]
            mask &= (placed == want).all(axis=1)
        elif kind == "prefix":
            i = parsed[1]
            mask &= (placed[:, : i + 1] == np.asarray(self.word_tiles[: i + 1])).all(axis=1)
        elif kind == "slot":
            j = slot_idx[:, parsed[1]]
            mask &= (j == 0) if parsed[2] else (j >= 1)
        elif kind == "held":
            mask &= held == parsed[1]
        elif kind == "placed":
            mask &= (held < 0) & ((slot_idx >= 0).sum(axis=1) >= parsed[1])
        elif kind == "gripper":
            mask &= grip == parsed[1]
        return mask

    def _composite_descriptor(self, tile: int, first: bool) -> str:
        where = "on the table" if first else "to the right of the previous block"
        return f"place the block with letter <{self.letters[tile]}> {where}"

    def _pick_descriptor(self, tile: int) -> str:
        return f"pick up the block with letter: <{self.letters[tile]}>"

    def hierarchy_boundaries(self, goal: Goal) -> List[Boundary]:
        if goal.instruction is None:
            raise NoDecompositionError("image-only BlockWords goals have no canonical decomposition")
        parsed = self.parse_instruction(goal.instruction)
        if parsed[0] == "spell":
            out = []
            for j, tile in enumerate(parsed[1]):
                want = list(parsed[1][: j + 1])
                out.append(Boundary(self._composite_descriptor(tile, j == 0),
                                    lambda s, want=want: self.placed(s)[: len(want)] == want))
            return out
        if parsed[0] == "prefix":
            i = parsed[1]
            tile = self.word_tiles[i]
            want = list(self.word_tiles[: i + 1])
            return [
                Boundary(self._pick_descriptor(tile), lambda s, tile=tile: s.held == tile),
                Boundary(_PLACE_FIRST if i == 0 else _PLACE_NEXT,
                         lambda s, want=want: self.placed(s)[: len(want)] == want),
            ]
        raise NoDecompositionError(f"{goal.instruction!r} is atomic")

    # -- skills -----------------------------------------------------------------------------
    def route(self, src: int, dst: int) -> Tuple[int, ...]:
        (r1, c1), (r2, c2) = self.coords(src), self.coords(dst)
        vert = (UP,) * (r1 - r2) if r2 < r1 else (DOWN,) * (r2 - r1)
        horiz = (LEFT,) * (c1 - c2) if c2 < c1 else (RIGHT,) * (c2 - c1)
        return vert + horiz

    def skills_at(self, s: BlockState) -> List[Skill]:
        out: List[Skill] = []
        k = self.n_placed(s)
        room = k < len(self.slot_cells)
        if s.held < 0:
            for i, pos in enumerate(s.tiles):
                at_home = pos == self.homes[i]
                if at_home or (k and pos == self.slot_cells[k - 1]):
                    out.append(Skill(self._pick_descriptor(i), self.route(s.gripper, pos) + (PICK,)))
                if at_home and room:
                    macro = self.route(s.gripper, pos) + (PICK,) + self.route(pos, self.slot_cells[k]) + (PLACE,)
                    out.append(Skill(self._composite_descriptor(i, k == 0), macro))
        elif room:
            out.append(Skill(_PLACE_FIRST if k == 0 else _PLACE_NEXT,
                             self.route(s.gripper, self.slot_cells[k]) + (PLACE,)))
        for cell in range(self.rows * self.cols):
            if cell != s.gripper:
                out.append(Skill(self.waypoint_descriptor(s, s._replace(gripper=cell)),
                                 self.route(s.gripper, cell)))
        return out

    def waypoint_descriptor(self, src: BlockState, dst: BlockState) -> str:
        r, c = self.coords(dst.gripper)
        return f"move the gripper to row {r}, column {c}"

    def corrupt(self, candidate: BlockState, rng: np.random.Generator) -> BlockState:
        """Letter swap: the grounded tile trades places with another tile."""
        if len(candidate.tiles) < 2:
            return candidate
        if candidate.held >= 0:
            i = candidate.held
        else:
            placed = [t for t in self.placed(candidate) if t >= 0]
            i = placed[-1] if placed else int(rng.integers(len(candidate.tiles)))
        j = int(rng.choice([t for t in range(len(candidate.tiles)) if t != i]))
        tiles = list(candidate.tiles)
        tiles[i], tiles[j] = tiles[j], tiles[i]
        held = {i: j, j: i}.get(candidate.held, candidate.held)
        return BlockState(candidate.gripper, held, tuple(tiles))

    def decode_state(self, data) -> BlockState:
        g, h, tiles = data
        return BlockState(int(g), int(h), tuple(int(t) for t in tiles))

    def render(self, s: BlockState) -> str:
        """ASCII picture: letters on cells, ``_`` empty slots, ``*`` gripper."""
        grid = [["." for _ in range(self.cols)] for _ in range(self.rows)]
        for c in self.slot_cells:
            r, cc = self.coords(c)
            grid[r][cc] = "_"
        for i, c in enumerate(s.tiles):
            if c >= 0:
                r, cc = self.coords(c)
                grid[r][cc] = self.letters[i]
        r, cc = self.coords(s.gripper)
        held = self.letters[s.held] if s.held >= 0 else ""
        lines = [" ".join(row) for row in grid]
        lines[r] = lines[r][: 2 * cc] + "*" + lines[r][2 * cc + 1:]
        return "\n".join(lines) + (f"\nholding {held}" if held else "")
