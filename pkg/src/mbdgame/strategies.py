"""Scripted strategies and the exhaustive certification harness.

A Strategy is a deterministic move function over positions with a declared
domain and explicit, hashable state. The certifier enumerates every opponent
reply against a strategy and proves a guaranteed bound on Dominator's claim
count: an upper bound for Dominator strategies, a lower bound for Staller
strategies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .game import GameRecord, GameStatus, Player, Position
from .graphs import Graph, grid_u, grid_v, ids_from_mask, iter_bits, mask_from_ids
from .kernel import INF, NodeLimitExceeded
from .solver import KernelSession, SolveConfig


class StrategyError(Exception):
    """Position outside a strategy's declared domain, or an internal script hole."""


class Strategy:
    """Deterministic move function with explicit state.

    ``respond`` is called whenever it is the strategy side's turn; it must
    return a legal claim. ``state`` objects must be hashable (they key the
    certification memo together with the claim masks).
    """

    name: str = "strategy"
    side: Player = Player.DOMINATOR

    def accepts(self, pos: Position) -> bool:
        return True

    def initial_state(self, pos: Position):
        return ()

    def respond(self, state, pos: Position, last_opp: Optional[int]):
        """-> (vertex, new_state, annotation)."""
        raise NotImplementedError


def winning_claims(pos: Position) -> list[int]:
    """Free vertices whose claim by Staller isolates some vertex immediately."""
    g = pos.graph
    out = []
    for w in iter_bits(pos.free):
        nstall = pos.stall | (1 << w)
        for z in iter_bits(g.closed_adj[w] & ~pos.predom):
            if g.closed_adj[z] & ~nstall == 0:
                out.append(w)
                break
    return out


def forced_dominator_replies(pos: Position) -> list[tuple[int, int]]:
    """(threatened vertex, unique free coverer) pairs: undominated vertices
    with exactly one free vertex left in their closed neighbourhood."""
    g = pos.graph
    covered = pos.dominated_vertices()
    out = []
    for z in iter_bits(g.full_mask & ~covered):
        pool = g.closed_adj[z] & pos.free
        if pool and pool & (pool - 1) == 0:
            out.append((z, pool.bit_length() - 1))
    return out


# --- trap detection on 2 x n grids ------------------------------------------

class TrapKind(str, Enum):
    TRIANGLE = "triangle"
    LINE = "line"


@dataclass(frozen=True)
class Trap:
    kind: TrapKind
    column: int
    row: str  # row of the threatened vertex: "u" or "v"
    threatened: int
    reply: int  # the unique saving claim


def grid_columns(graph: Graph) -> Optional[int]:
    """Number of columns when the graph carries grid2xn-style u/v labels."""
    if graph.labels is None:
        return None
    n_u = sum(1 for lab in graph.labels if lab.startswith("u"))
    n_v = sum(1 for lab in graph.labels if lab.startswith("v") and lab != "v0")
    if n_u == 0 or n_u != n_v:
        return None
    for i in range(1, n_u + 1):
        if f"u{i}" not in graph.labels or f"v{i}" not in graph.labels:
            return None
    return n_u


def detect_traps(pos: Position) -> list[Trap]:
    """All active triangle/line traps, scanned by column then row."""
    g = pos.graph
    n = grid_columns(g)
    if n is None:
        return []
    idx = {lab: i for i, lab in enumerate(g.labels)}
    stall = pos.stall
    free = pos.free

    def has(lab: str) -> bool:
        return bool(stall & (1 << idx[lab]))

    def is_free(lab: str) -> bool:
        return bool(free & (1 << idx[lab]))

    out = []
    for i in range(2, n):
        for row, other in (("v", "u"), ("u", "v")):
            # triangle: both row-neighbours and the column partner claimed,
            # the vertex itself still free; the saving claim is the vertex.
            if (
                has(f"{row}{i - 1}")
                and has(f"{row}{i + 1}")
                and has(f"{other}{i}")
                and is_free(f"{row}{i}")
            ):
                v = idx[f"{row}{i}"]
                out.append(Trap(TrapKind.TRIANGLE, i, row, v, v))
            # line: three consecutive same-row claims; the saving claim is the
            # opposite-row partner of the middle one.
            if (
                has(f"{row}{i - 1}")
                and has(f"{row}{i}")
                and has(f"{row}{i + 1}")
                and is_free(f"{other}{i}")
            ):
                out.append(
                    Trap(TrapKind.LINE, i, row, idx[f"{row}{i}"], idx[f"{other}{i}"])
                )
    return out


def detect_trap(pos: Position) -> Optional[Trap]:
    traps = detect_traps(pos)
    return traps[0] if traps else None


# --- pairing strategies ------------------------------------------------------

@dataclass(frozen=True)
class Pairing:
    """Disjoint vertex pairs plus an optional committed first move."""

    pairs: tuple[tuple[int, int], ...]
    first_move: Optional[int] = None

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for a, b in self.pairs:
            if a == b:
                raise StrategyError("pair vertices must be distinct")
            for v in (a, b):
                if v in seen:
                    raise StrategyError("pairs must be disjoint")
                seen.add(v)
        if self.first_move is not None and self.first_move in seen:
            raise StrategyError("first move cannot sit inside a pair")


def validate_pairing_cover(pos: Position, pairing: Pairing) -> None:
    """Check that one claim per pair (plus the first move) dominates every
    non-predominated vertex no matter which pair halves the opponent grabs."""
    g = pos.graph
    for v in range(g.n):
        if pos.predom & (1 << v):
            continue
        if pos.dom and g.closed_adj[v] & pos.dom:
            continue
        if pairing.first_move is not None and g.closed_adj[v] & (1 << pairing.first_move):
            continue
        if any(
            g.closed_adj[v] & (1 << a) and g.closed_adj[v] & (1 << b)
            for a, b in pairing.pairs
        ):
            continue
        raise StrategyError(f"pairing does not cover vertex {g.label_of(v)}")


class PairingStrategy(Strategy):
    """Answer inside the opponent's pair; spontaneous turns take the first
    move, then the lowest vertex of an untouched pair."""

    def __init__(self, board: Position, pairing: Pairing, name: str = "pairing"):
        validate_pairing_cover(board, pairing)
        taken = board.dom | board.stall
        for a, b in pairing.pairs:
            if taken & (1 << a) or taken & (1 << b):
                raise StrategyError("pair vertex already claimed at domain start")
        if pairing.first_move is not None and taken & (1 << pairing.first_move):
            raise StrategyError("first move already claimed at domain start")
        self.board = board
        self.pairing = pairing
        self.partner = {}
        for a, b in pairing.pairs:
            self.partner[a] = b
            self.partner[b] = a
        self.name = name
        self.side = Player.DOMINATOR

    def accepts(self, pos: Position) -> bool:
        return pos.graph == self.board.graph and pos.predom == self.board.predom

    def respond(self, state, pos: Position, last_opp: Optional[int]):
        if last_opp is not None and last_opp in self.partner:
            p = self.partner[last_opp]
            if pos.free & (1 << p):
                return p, state, f"pair reply to {pos.graph.label_of(last_opp)}"
        return self._spontaneous(state, pos)

    def _spontaneous(self, state, pos: Position):
        fm = self.pairing.first_move
        if fm is not None and pos.free & (1 << fm):
            return fm, state, "first move"
        taken = pos.dom | pos.stall
        for a, b in self.pairing.pairs:
            if not taken & (1 << a) and not taken & (1 << b):
                return min(a, b), state, "untouched pair"
        free = pos.free
        if not free:
            raise StrategyError("no free vertex for a spontaneous move")
        return (free & -free).bit_length() - 1, state, "filler"


# --- embedded sub-boards ------------------------------------------------------

@dataclass(frozen=True)
class EmbeddedBoard:
    """A sub-board of a host graph: sub vertex i maps to host vertex verts[i]."""

    verts: tuple[int, ...]
    sub_graph: Graph
    sub_predom: int

    def __post_init__(self) -> None:
        if len(self.verts) != self.sub_graph.n:
            raise StrategyError("embedding size mismatch")

    @property
    def host_mask(self) -> int:
        return mask_from_ids(self.verts)

    def pull_mask(self, host_mask: int) -> int:
        m = 0
        for i, hv in enumerate(self.verts):
            if host_mask & (1 << hv):
                m |= 1 << i
        return m

    def pull_vertex(self, host_v: int) -> Optional[int]:
        try:
            return self.verts.index(host_v)
        except ValueError:
            return None

    def push_vertex(self, sub_v: int) -> int:
        return self.verts[sub_v]

    def pull_position(self, pos: Position, to_move: Player) -> Position:
        return Position(
            graph=self.sub_graph,
            dom=self.pull_mask(pos.dom),
            stall=self.pull_mask(pos.stall),
            predom=self.sub_predom,
            to_move=to_move,
        )


class ExactResponder:
    """Optimal-move responder for an embedded sub-board, backed by a shared
    kernel session per sub-board shape."""

    _session_cache: dict = {}

    def __init__(self, embed: EmbeddedBoard):
        self.embed = embed
        key = (embed.sub_graph.n, embed.sub_graph.adj, embed.sub_predom)
        sess = ExactResponder._session_cache.get(key)
        if sess is None:
            sess = KernelSession(embed.sub_graph, embed.sub_predom)
            ExactResponder._session_cache[key] = sess
        self.session = sess

    def sub_status(self, pos: Position) -> GameStatus:
        return self.embed.pull_position(pos, Player.DOMINATOR).status()

    def move(self, pos: Position) -> Optional[int]:
        sub = self.embed.pull_position(pos, Player.DOMINATOR)
        if sub.status().is_terminal:
            return None
        return self.embed.push_vertex(self.session.best_move(sub))


# --- the generic composite Dominator engine -----------------------------------

@dataclass(frozen=True)
class OneOf:
    """Claim one free coverer of `target` before its pool runs dry."""

    target: int
    members: tuple[int, ...]


class CompositeDominator(Strategy):
    """Dominator strategy assembled from independent parts: sub-board regions
    (scripted machines or exact responders), pairing sets, one-of completion
    sets, and a committed first move. Opponent moves are routed to the part
    they touch; spontaneous turns resolve pending work without ever claiming
    an unassigned vertex unless nothing else remains."""

    def __init__(
        self,
        board: Position,
        regions: Sequence[tuple[EmbeddedBoard, object]] = (),
        pairs: Sequence[tuple[int, int]] = (),
        oneofs: Sequence[OneOf] = (),
        first_move: Optional[int] = None,
        name: str = "composite",
        universe: Optional[int] = None,
    ):
        self.board = board
        self.regions = [
            (embed, responder if responder is not None else ExactResponder(embed))
            for embed, responder in regions
        ]
        self.pairs = tuple(pairs)
        self.partner = {}
        for a, b in self.pairs:
            self.partner[a] = b
            self.partner[b] = a
        self.oneofs = tuple(oneofs)
        self.first_move = first_move
        self.name = name
        self.side = Player.DOMINATOR
        # spontaneous fillers stay inside this mask while it has free cells
        self.universe = universe if universe is not None else board.graph.full_mask

    def accepts(self, pos: Position) -> bool:
        return pos.graph == self.board.graph and pos.predom == self.board.predom

    def initial_state(self, pos: Position):
        return tuple(
            resp.machine_initial_state() if hasattr(resp, "machine_initial_state") else None
            for _, resp in self.regions
        )

    def respond(self, state, pos: Position, last_opp: Optional[int]):
        if last_opp is None:
            if self.first_move is not None and pos.free & (1 << self.first_move):
                return self.first_move, state, "opening move"
            return self._spontaneous(state, pos)
        for ri, (embed, resp) in enumerate(self.regions):
            if embed.pull_vertex(last_opp) is not None:
                mv, state = self._region_move(state, ri, pos, last_opp)
                if mv is not None:
                    return mv, state, f"region {ri} reply"
                return self._spontaneous(state, pos)
        if last_opp in self.partner:
            p = self.partner[last_opp]
            if pos.free & (1 << p):
                return p, state, f"pair reply to {pos.graph.label_of(last_opp)}"
            return self._spontaneous(state, pos)
        oneof = self._pending_oneof_for(pos, last_opp)
        if oneof is not None:
            mv = self._resolve_oneof(pos, oneof)
            if mv is not None:
                return mv, state, f"completion for {pos.graph.label_of(oneof.target)}"
        return self._spontaneous(state, pos)

    # -- helpers --------------------------------------------------------

    def _region_move(self, state, ri: int, pos: Position, last_opp: Optional[int]):
        embed, resp = self.regions[ri]
        if hasattr(resp, "machine_respond"):
            substate = state[ri]
            mv_sub, substate = resp.machine_respond(
                substate, embed.pull_position(pos, Player.DOMINATOR),
                embed.pull_vertex(last_opp) if last_opp is not None else None,
            )
            state = state[:ri] + (substate,) + state[ri + 1:]
            return (embed.push_vertex(mv_sub) if mv_sub is not None else None), state
        return resp.move(pos), state

    def _pending_oneof_for(self, pos: Position, v: int) -> Optional[OneOf]:
        for oneof in self.oneofs:
            if v in oneof.members and self._target_undominated(pos, oneof.target):
                return oneof
        return None

    def _target_undominated(self, pos: Position, target: int) -> bool:
        return not pos.dominated_vertices() & (1 << target)

    def _resolve_oneof(self, pos: Position, oneof: OneOf) -> Optional[int]:
        for m in oneof.members:
            if pos.free & (1 << m):
                return m
        pool = pos.graph.closed_adj[oneof.target] & pos.free
        if pool:
            return (pool & -pool).bit_length() - 1
        return None

    def _spontaneous(self, state, pos: Position):
        for oneof in self.oneofs:
            if self._target_undominated(pos, oneof.target):
                mv = self._resolve_oneof(pos, oneof)
                if mv is not None:
                    return mv, state, f"completion for {pos.graph.label_of(oneof.target)}"
        taken = pos.dom | pos.stall
        for a, b in self.pairs:
            if not taken & (1 << a) and not taken & (1 << b):
                return min(a, b), state, "untouched pair"
        for ri, (embed, resp) in enumerate(self.regions):
            if hasattr(resp, "machine_respond"):
                continue  # scripted regions are never entered proactively
            if not resp.sub_status(pos).is_terminal:
                mv, state = self._region_move(state, ri, pos, None)
                if mv is not None:
                    return mv, state, f"region {ri} proactive"
        free = pos.free & self.universe
        if not free:
            free = pos.free
        if not free:
            raise StrategyError("no free vertex for a spontaneous move")
        return (free & -free).bit_length() - 1, state, "filler"


# --- product dispatch ----------------------------------------------------------

class ProductDispatchStrategy(Strategy):
    """Dominator opens in a designated copy, then always answers in the copy
    the opponent just played, first-player strategy if he opened it, else the
    second-player strategy."""

    def __init__(
        self,
        board: Position,
        copies: Sequence[EmbeddedBoard],
        opener_index: int = 0,
        name: str = "product-dispatch",
    ):
        covered = 0
        for c in copies:
            if covered & c.host_mask:
                raise StrategyError("copies must partition the vertex set")
            covered |= c.host_mask
        if covered != board.graph.full_mask:
            raise StrategyError("copies must cover the whole board")
        self.board = board
        self.copies = list(copies)
        self.responders = [ExactResponder(c) for c in copies]
        self.opener_index = opener_index
        self.name = name
        self.side = Player.DOMINATOR

    def accepts(self, pos: Position) -> bool:
        return pos.graph == self.board.graph and pos.predom == self.board.predom

    def respond(self, state, pos: Position, last_opp: Optional[int]):
        if last_opp is not None:
            for ci, c in enumerate(self.copies):
                if c.pull_vertex(last_opp) is not None:
                    mv = self.responders[ci].move(pos)
                    if mv is not None:
                        return mv, state, f"reply in copy {ci}"
                    break
        mv = self.responders[self.opener_index].move(pos)
        if mv is not None:
            return mv, state, "opener copy"
        for ci, resp in enumerate(self.responders):
            mv = resp.move(pos)
            if mv is not None:
                return mv, state, f"pending copy {ci}"
        free = pos.free
        if not free:
            raise StrategyError("no free vertex for product dispatch")
        return (free & -free).bit_length() - 1, state, "filler"


# --- certification --------------------------------------------------------------

@dataclass
class CertificateReport:
    """Outcome of exhaustively playing a strategy against all opponent lines.

    direction "upper": every line ends in a Dominator win using at most
    ``worst_case`` claims. direction "lower": every Dominator line either
    loses or spends at least ``worst_case`` claims.
    """

    strategy: str
    direction: str
    budget: int
    certified: Optional[bool]  # None = inconclusive (node limit)
    worst_case: Optional[int]
    witness: Optional[GameRecord]
    nodes: int
    note: str = ""

    def to_json_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "direction": self.direction,
            "budget": self.budget,
            "certified": self.certified,
            "worst_case": None if self.worst_case is None else (
                "loss" if self.worst_case >= INF else self.worst_case
            ),
            "witness": self.witness.to_json_dict() if self.witness else None,
            "nodes": self.nodes,
            "note": self.note,
        }


def certify_strategy(
    start: Position,
    strategy: Strategy,
    budget: int,
    adversary_skip: bool = False,
    node_limit: int = 0,
) -> CertificateReport:
    """Enumerate all opponent lines against the strategy.

    Dominator strategies: certifies claims <= budget on every line, all lines
    won. Staller strategies: certifies that every Dominator line loses or
    costs >= budget claims (losses count as +infinity).
    """
    if not strategy.accepts(start):
        raise StrategyError(f"{strategy.name} does not accept the start position")
    upper = strategy.side is Player.DOMINATOR
    memo: dict = {}
    best_moves: dict = {}
    nodes = 0

    def leaf_metric(pos: Position) -> int:
        st = pos.status()
        assert st.is_terminal
        return 0 if st.kind == GameStatus.DOMINATOR_WIN else INF

    def strategy_turn(pos: Position, state, last_opp):
        """Apply the strategy's move; returns (next position, state, claims delta)."""
        mv, state2, _note = strategy.respond(state, pos, last_opp)
        nxt = pos.apply_move(mv)
        return nxt, state2, (1 if upper else 0)

    def adversary_node(pos: Position, state) -> int:
        nonlocal nodes
        key = (pos.dom, pos.stall, state)
        if key in memo:
            return memo[key]
        nodes += 1
        if node_limit and nodes > node_limit:
            raise NodeLimitExceeded()
        adv_is_dominator = not upper
        results: list[tuple[int, Optional[int]]] = []
        moves: list[Optional[int]] = list(iter_bits(pos.free))
        if adv_is_dominator and adversary_skip:
            moves.append(None)
        for mv in moves:
            delta = 1 if (adv_is_dominator and mv is not None) else 0
            child = pos.apply_move(mv, allow_skip=True)
            st = child.status()
            if st.is_terminal:
                metric = min(delta + leaf_metric(child), INF)
            else:
                nxt, state2, d2 = strategy_turn(child, state, mv)
                st2 = nxt.status()
                if st2.is_terminal:
                    metric = min(delta + d2 + leaf_metric(nxt), INF)
                else:
                    metric = min(delta + d2 + adversary_node(nxt, state2), INF)
            results.append((metric, mv))
        best_metric, best_mv = results[0]
        for metric, mv in results[1:]:
            if (metric > best_metric) if upper else (metric < best_metric):
                best_metric, best_mv = metric, mv
        memo[key] = best_metric
        best_moves[key] = best_mv
        return best_metric

    state = strategy.initial_state(start)
    prefix_claims = 0
    pos = start
    try:
        if pos.to_move is strategy.side:
            pos, state, d = strategy_turn(pos, state, None)
            prefix_claims += d
        if pos.status().is_terminal:
            worst = prefix_claims + leaf_metric(pos)
        else:
            worst = min(prefix_claims + adversary_node(pos, state), INF)
    except NodeLimitExceeded:
        return CertificateReport(
            strategy.name,
            "upper" if upper else "lower",
            budget,
            None,
            None,
            None,
            nodes,
            "node limit exhausted; inconclusive",
        )

    certified = (worst <= budget) if upper else (worst >= budget)
    witness = _reconstruct_witness(start, strategy, best_moves, upper)
    return CertificateReport(
        strategy.name,
        "upper" if upper else "lower",
        budget,
        certified,
        worst,
        witness,
        nodes,
    )


def _reconstruct_witness(
    start: Position, strategy: Strategy, best_moves: dict, upper: bool
) -> Optional[GameRecord]:
    """Replay the extreme line recorded by the certifier."""
    rec = GameRecord(start)
    pos = start
    state = strategy.initial_state(start)
    last_opp: Optional[int] = None
    guard = 0
    while not pos.status().is_terminal:
        guard += 1
        if guard > 4 * pos.graph.n + 8:
            return None
        if pos.to_move is strategy.side:
            mv, state, note = strategy.respond(state, pos, last_opp)
            rec.append(pos.to_move, mv, note)
            pos = pos.apply_move(mv)
        else:
            key = (pos.dom, pos.stall, state)
            if key not in best_moves:
                return None
            mv = best_moves[key]
            rec.append(pos.to_move, mv, "worst adversary line")
            pos = pos.apply_move(mv, allow_skip=True)
            last_opp = mv
    return rec
