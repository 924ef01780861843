import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

from mbdgame.game import Player, Position
from mbdgame.gadgets import GadgetSpec, build_gadget
from mbdgame.graphs import (
    Graph,
    graph_from_edges,
    grid2xn,
    make_complete,
    make_cycle,
    make_path,
)


def small_graph_corpus() -> list[tuple[str, Graph]]:
    """Shared instance corpus; everything at most 10 vertices."""
    return [
        ("K1", make_complete(1)),
        ("K2", make_complete(2)),
        ("K4", make_complete(4)),
        ("P2", make_path(2)),
        ("P3", make_path(3)),
        ("P4", make_path(4)),
        ("P5", make_path(5)),
        ("P7", make_path(7)),
        ("C3", make_cycle(3)),
        ("C4", make_cycle(4)),
        ("C5", make_cycle(5)),
        ("C6", make_cycle(6)),
        ("2K1", graph_from_edges(2, [])),
        ("star4", graph_from_edges(5, [(0, i) for i in range(1, 5)])),
        ("grid2x2", grid2xn(2)),
        ("grid2x3", grid2xn(3)),
        ("grid2x4", grid2xn(4)),
    ]


def small_position_corpus() -> list[tuple[str, Position]]:
    """Positions (both start sides and gadget pre-claims) for solver checks."""
    out = []
    for name, g in small_graph_corpus():
        out.append((f"{name}-D", Position(graph=g, to_move=Player.DOMINATOR)))
        out.append((f"{name}-S", Position(graph=g, to_move=Player.STALLER)))
    for spec in (
        GadgetSpec("Rho", 2),
        GadgetSpec("Rho", 3),
        GadgetSpec("Y", 3),
        GadgetSpec("Z", 2),
        GadgetSpec("Z", 3),
        GadgetSpec("W", 2),
        GadgetSpec("W", 3),
        GadgetSpec("X", 3),
        GadgetSpec("X", 4),
    ):
        out.append((spec.name(), build_gadget(spec)))
    return out


@pytest.fixture(scope="session")
def graph_corpus():
    return small_graph_corpus()


@pytest.fixture(scope="session")
def position_corpus():
    return small_position_corpus()
