"""Exact solver, strategy engine and verification lab for Maker-Breaker
domination games on small graphs, with a play service for the browser board.
"""

__version__ = "0.1.0"

from .game import GameRecord, GameStatus, Player, Position, new_position
from .graphs import (
    Graph,
    cartesian_product,
    domination_number,
    enumerate_gamma_sets,
    grid2xn,
    is_dominating_set,
    make_complete,
    make_cycle,
    make_path,
)
from .solver import GameValue, SolveConfig, SolveReport, gamma_mb, gamma_mb_prime, solve

__all__ = [
    "__version__",
    "GameRecord",
    "GameStatus",
    "Player",
    "Position",
    "new_position",
    "Graph",
    "cartesian_product",
    "domination_number",
    "enumerate_gamma_sets",
    "grid2xn",
    "is_dominating_set",
    "make_complete",
    "make_cycle",
    "make_path",
    "GameValue",
    "SolveConfig",
    "SolveReport",
    "gamma_mb",
    "gamma_mb_prime",
    "solve",
]
