"""Independent reference implementations used only by the tests.

Nothing here imports the package's value code: distances come from a plain
forward breadth-first search per start state over ``env.step``.
"""

from collections import deque
from itertools import product


def forward_distance(env, start, goal):
    """Shortest number of steps from ``start`` to any state satisfying ``goal`` (None if none)."""
    if env.satisfied(start, goal):
        return 0
    seen = {start}
    frontier = deque([(start, 0)])
    while frontier:
        s, d = frontier.popleft()
        for a in env.actions:
            nxt = env.step(s, a)
            if nxt in seen:
                continue
            if env.satisfied(nxt, goal):
                return d + 1
            seen.add(nxt)
            frontier.append((nxt, d + 1))
    return None


def forward_table(env, goal):
    return {s: forward_distance(env, s, goal) for s in env.states()}


def hand_count_blockwords_one_letter(rows, cols):
    """One tile, one slot, gripper anywhere: tile at home, tile in slot, or held."""
    cells = rows * cols
    return cells * 3


def hand_rearrange_states(n_plates, n_objects_plates):
    """All (gripper, held, plates) combos reachable with unconstrained pick and place."""
    m = len(n_objects_plates)
    out = set()
    for g in range(n_plates):
        for assign in product(range(n_plates), repeat=m):
            out.add((g, -1, assign))
        for h in range(m):
            for assign in product(range(n_plates), repeat=m):
                a = list(assign)
                a[h] = -1
                out.add((g, h, tuple(a)))
    return out


def forward_table_fast(env, goal):
    """Same per-state forward search as ``forward_table``, vectorized over each frontier.

    Successors are rebuilt here from ``env.step``; nothing is shared with the
    package's backward search.
    """
    import numpy as np

    states = env.states()
    where = {s: i for i, s in enumerate(states)}
    succ = np.array([[where[env.step(s, a)] for a in env.actions] for s in states], dtype=np.int64)
    hit = np.array([env.satisfied(s, goal) for s in states])
    out = {}
    for i, s in enumerate(states):
        seen = np.zeros(len(states), dtype=bool)
        seen[i] = True
        frontier = np.array([i])
        d = 0
        while frontier.size and not hit[frontier].any():
            nxt = np.unique(succ[frontier].ravel())
            nxt = nxt[~seen[nxt]]
            seen[nxt] = True
            frontier = nxt
            d += 1
        out[s] = d if frontier.size else None
    return out
