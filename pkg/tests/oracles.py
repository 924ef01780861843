"""Independent brute-force oracles for the test suite.

These deliberately avoid the package's kernel, masks and pruning: statuses are
recomputed from adjacency with plain sets, and the game value is a naive
recursive minimax with no memo, no symmetry and no move ordering. They are the
reference the fast solver is checked against.
"""

from __future__ import annotations

import itertools

from mbdgame.game import Player, Position
from mbdgame.graphs import Graph

ORACLE_INF = 10**6


def neighbours(g: Graph, v: int) -> set[int]:
    return {w for w in range(g.n) if g.adj[v] >> w & 1}


def oracle_status(pos: Position) -> str:
    g = pos.graph
    dom = {v for v in range(g.n) if pos.dom >> v & 1}
    stall = {v for v in range(g.n) if pos.stall >> v & 1}
    predom = {v for v in range(g.n) if pos.predom >> v & 1}
    for v in range(g.n):
        if v in predom:
            continue
        if v in stall and neighbours(g, v) <= stall:
            return "staller_win"
    for v in range(g.n):
        if v in dom or v in predom:
            continue
        if not neighbours(g, v) & dom:
            return "ongoing"
    return "dominator_win"


def naive_value(pos: Position, allow_skip: bool = False) -> int:
    """Claims Dominator still needs with optimal play; ORACLE_INF = Staller wins."""
    st = oracle_status(pos)
    if st == "dominator_win":
        return 0
    if st == "staller_win":
        return ORACLE_INF
    free = [v for v in range(pos.graph.n) if pos.free >> v & 1]
    if pos.to_move is Player.DOMINATOR:
        best = ORACLE_INF
        for v in free:
            child = naive_value(pos.apply_move(v), allow_skip)
            best = min(best, child + 1 if child < ORACLE_INF else ORACLE_INF)
        if allow_skip:
            best = min(best, naive_value(pos.apply_move(None, allow_skip=True), allow_skip))
        return best
    return max(naive_value(pos.apply_move(v), allow_skip) for v in free)


def oracle_min_dominating_sets(g: Graph) -> list[frozenset[int]]:
    """All minimum dominating sets by subset enumeration over frozensets."""
    for k in range(1, g.n + 1):
        found = []
        for combo in itertools.combinations(range(g.n), k):
            chosen = set(combo)
            closed = set(chosen)
            for v in chosen:
                closed |= neighbours(g, v)
            if len(closed) == g.n:
                found.append(frozenset(combo))
        if found:
            return found
    raise AssertionError("V(G) dominates")
