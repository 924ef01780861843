"""Maker-Breaker domination game positions, legality, and win detection.

Dominator wins once his claimed set dominates every vertex (pre-dominated
vertices count as covered from outside the board). Staller wins the moment
some vertex that is not pre-dominated has itself and all neighbours claimed
by her. Pre-dominated vertices stay claimable by both players; they simply
cannot be isolated and need no domination.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional

from .graphs import Graph, ids_from_mask, iter_bits, mask_from_ids


class Player(str, Enum):
    DOMINATOR = "dominator"
    STALLER = "staller"

    @property
    def opponent(self) -> "Player":
        return Player.STALLER if self is Player.DOMINATOR else Player.DOMINATOR


#: Sentinel move value for a Dominator skip (only legal when a ruleset allows it).
SKIP = None


class IllegalMove(ValueError):
    """Move rejected, with the reason in the message."""


class InvalidPosition(ValueError):
    """Position construction violating the mask invariants."""


@dataclass(frozen=True)
class GameStatus:
    """Terminal state tag plus witness; Ongoing carries no witness."""

    ONGOING = "ongoing"
    DOMINATOR_WIN = "dominator_win"
    STALLER_WIN = "staller_win"

    kind: str
    isolated_vertex: Optional[int] = None

    @property
    def is_terminal(self) -> bool:
        return self.kind != GameStatus.ONGOING


@dataclass(frozen=True)
class Position:
    """A single game state: graph plus claim masks and side to move.

    ``predom`` marks vertices dominated by Dominator claims outside the board
    (the triangle glyphs of the gadget figures). ``dominator_moves`` counts
    Dominator claims made after construction; skips do not count.
    """

    graph: Graph
    dom: int = 0
    stall: int = 0
    predom: int = 0
    to_move: Player = Player.DOMINATOR
    dominator_moves: int = 0
    initial_dom: int = field(default=0, repr=False)

    def __post_init__(self) -> None:
        full = self.graph.full_mask
        for name, m in (("dom", self.dom), ("stall", self.stall), ("predom", self.predom)):
            if m & ~full:
                raise InvalidPosition(f"{name} mask uses bits >= n")
        if self.dom & self.stall:
            raise InvalidPosition("dom and stall overlap")

    @property
    def free(self) -> int:
        return self.graph.full_mask & ~(self.dom | self.stall)

    def dominated_vertices(self) -> int:
        """Mask of vertices already covered: claimed by or adjacent to Dominator, or predominated."""
        covered = self.predom
        for v in iter_bits(self.dom):
            covered |= self.graph.closed_adj[v]
        return covered

    def status(self) -> GameStatus:
        stall_win = None
        for v in iter_bits(self.graph.full_mask & ~self.predom):
            if self.graph.closed_adj[v] & ~self.stall == 0:
                stall_win = v
                break
        dom_win = self.dominated_vertices() == self.graph.full_mask
        assert not (stall_win is not None and dom_win), "status predicates must be exclusive"
        if stall_win is not None:
            return GameStatus(GameStatus.STALLER_WIN, stall_win)
        if dom_win:
            return GameStatus(GameStatus.DOMINATOR_WIN)
        return GameStatus(GameStatus.ONGOING)

    def legal_moves(self, allow_skip: bool = False) -> list[Optional[int]]:
        """Free vertices, plus SKIP for Dominator when the ruleset allows it."""
        if self.status().is_terminal:
            raise IllegalMove("no legal moves in a terminal position")
        moves: list[Optional[int]] = list(iter_bits(self.free))
        if allow_skip and self.to_move is Player.DOMINATOR:
            moves.append(SKIP)
        return moves

    def apply_move(self, move: Optional[int], allow_skip: bool = False) -> "Position":
        if move is SKIP:
            if self.to_move is not Player.DOMINATOR:
                raise IllegalMove("only Dominator may skip")
            if not allow_skip:
                raise IllegalMove("skip is disabled in this ruleset")
            return replace(self, to_move=self.to_move.opponent)
        if not isinstance(move, int) or not (0 <= move < self.graph.n):
            raise IllegalMove(f"vertex {move!r} out of range")
        bit = 1 << move
        if not self.free & bit:
            raise IllegalMove(f"vertex {self.graph.label_of(move)} already claimed")
        if self.to_move is Player.DOMINATOR:
            return replace(
                self,
                dom=self.dom | bit,
                to_move=Player.STALLER,
                dominator_moves=self.dominator_moves + 1,
            )
        return replace(self, stall=self.stall | bit, to_move=Player.DOMINATOR)

    def to_json_dict(self) -> dict:
        return {
            "graph": self.graph.to_json_dict(),
            "dom": ids_from_mask(self.dom),
            "stall": ids_from_mask(self.stall),
            "predom": ids_from_mask(self.predom),
            "to_move": self.to_move.value,
            "dominator_moves": self.dominator_moves,
        }

    @staticmethod
    def from_json_dict(d: dict) -> "Position":
        return Position(
            graph=Graph.from_json_dict(d["graph"]),
            dom=mask_from_ids(d["dom"]),
            stall=mask_from_ids(d["stall"]),
            predom=mask_from_ids(d["predom"]),
            to_move=Player(d["to_move"]),
            dominator_moves=d.get("dominator_moves", 0),
        )


def new_position(
    graph: Graph,
    pre_staller: int = 0,
    pre_dominated: int = 0,
    to_move: Player = Player.DOMINATOR,
    pre_dominator: int = 0,
) -> Position:
    """Fresh position with optional pre-claims; dominator_moves starts at zero."""
    if pre_dominator & pre_staller:
        raise InvalidPosition("a vertex cannot be claimed by both players")
    return Position(
        graph=graph,
        dom=pre_dominator,
        stall=pre_staller,
        predom=pre_dominated,
        to_move=to_move,
        dominator_moves=0,
        initial_dom=pre_dominator,
    )


@dataclass(frozen=True)
class Move:
    player: Player
    vertex: Optional[int]  # None encodes a skip
    annotation: str = ""


@dataclass
class GameRecord:
    """Initial position plus the alternating move list with provenance notes."""

    initial: Position
    moves: list[Move] = field(default_factory=list)

    def append(self, player: Player, vertex: Optional[int], annotation: str = "") -> None:
        self.moves.append(Move(player, vertex, annotation))

    def replay(self, allow_skip: bool = True) -> Position:
        """Reapply all moves; raises IllegalMove if the record is inconsistent."""
        pos = self.initial
        for mv in self.moves:
            if pos.to_move is not mv.player:
                raise IllegalMove(f"record expects {pos.to_move}, got {mv.player}")
            pos = pos.apply_move(mv.vertex, allow_skip=allow_skip)
        return pos

    def dominator_claims(self) -> int:
        return sum(1 for m in self.moves if m.player is Player.DOMINATOR and m.vertex is not None)

    def dominator_turns(self) -> int:
        """Turns taken by Dominator including skips (the alternative move count)."""
        return sum(1 for m in self.moves if m.player is Player.DOMINATOR)

    def to_json_dict(self) -> dict:
        return {
            "initial": self.initial.to_json_dict(),
            "moves": [
                {
                    "player": m.player.value,
                    "vertex": m.vertex,
                    "label": self.initial.graph.label_of(m.vertex) if m.vertex is not None else "skip",
                    "annotation": m.annotation,
                }
                for m in self.moves
            ],
        }


def playout(
    pos: Position,
    moves: Iterable[Optional[int]],
    allow_skip: bool = False,
    annotations: Optional[Iterable[str]] = None,
) -> GameRecord:
    """Apply a move sequence from a position, recording as it goes."""
    rec = GameRecord(pos)
    notes = iter(annotations) if annotations is not None else None
    cur = pos
    for mv in moves:
        note = next(notes, "") if notes is not None else ""
        rec.append(cur.to_move, mv, note)
        cur = cur.apply_move(mv, allow_skip=allow_skip)
    return rec
