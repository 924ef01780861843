"""Exact minimax evaluation of MBD positions.

Dominator minimizes his number of future claims, Staller maximizes (an
isolation win being her best outcome). The search itself lives in the
kernel backends (compiled or pure Python); this module owns configuration,
symmetry validation, report assembly, principal-variation derivation,
parallel root splitting and the skip-futility verifier.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .game import GameRecord, GameStatus, Player, Position
from .graphs import Graph, iter_bits
from .kernel import (
    BACKEND,
    DOMINATOR,
    INF,
    STALLER,
    NodeLimitExceeded,
    apply_perm,
    kernel_class_for,
)


@dataclass(frozen=True, order=True)
class GameValue:
    """Either StallerWin or DominatorWinIn(k future Dominator claims).

    The sort order is Dominator's preference reversed: smaller ``rank`` is
    better for Dominator, with StallerWin worst (rank INF).
    """

    rank: int

    STALLER_WIN_RANK = INF

    @staticmethod
    def dominator_win(k: int) -> "GameValue":
        if not 0 <= k < INF:
            raise ValueError(f"bad claim count {k}")
        return GameValue(k)

    @staticmethod
    def staller_win() -> "GameValue":
        return GameValue(INF)

    @staticmethod
    def from_rank(rank: int) -> "GameValue":
        return GameValue(rank)

    @property
    def is_dominator_win(self) -> bool:
        return self.rank < INF

    @property
    def claims(self) -> int:
        if not self.is_dominator_win:
            raise ValueError("StallerWin carries no claim count")
        return self.rank

    def better_for_dominator_than(self, other: "GameValue") -> bool:
        return self.rank < other.rank

    def to_json_dict(self) -> dict:
        if self.is_dominator_win:
            return {"kind": "dominator_win", "k": self.rank}
        return {"kind": "staller_win"}

    @staticmethod
    def from_json_dict(d: dict) -> "GameValue":
        if d["kind"] == "staller_win":
            return GameValue.staller_win()
        return GameValue.dominator_win(d["k"])

    def __str__(self) -> str:
        return f"DominatorWinIn({self.rank})" if self.is_dominator_win else "StallerWin"


class SymmetryError(ValueError):
    """Supplied permutation is not a predom-stabilizing graph automorphism."""


def validate_automorphisms(
    graph: Graph, predom: int, perms: Sequence[Sequence[int]]
) -> tuple[tuple[int, ...], ...]:
    """Check each permutation is a graph automorphism stabilizing predom setwise."""
    out = []
    for perm in perms:
        p = tuple(perm)
        if sorted(p) != list(range(graph.n)):
            raise SymmetryError("not a permutation of the vertex set")
        for u in range(graph.n):
            if apply_perm(graph.adj[u], p) != graph.adj[p[u]]:
                raise SymmetryError("not a graph automorphism")
        if apply_perm(predom, p) != predom:
            raise SymmetryError("does not stabilize the predominated set")
        out.append(p)
    return tuple(out)


def grid_symmetries(graph: Graph, predom: int) -> tuple[tuple[int, ...], ...]:
    """Valid symmetries of a grid2xn-labeled board: row swap, column reversal,
    and their composition, filtered to those stabilizing predom."""
    if graph.labels is None or graph.n % 2 or not graph.labels[0].startswith("u"):
        return ()
    n = graph.n // 2
    if tuple(graph.labels) != tuple(
        lab for i in range(1, n + 1) for lab in (f"u{i}", f"v{i}")
    ):
        return ()
    idx = {lab: i for i, lab in enumerate(graph.labels)}
    cands = []
    row_swap = [0] * graph.n
    col_rev = [0] * graph.n
    both = [0] * graph.n
    for i in range(1, n + 1):
        u, v = idx[f"u{i}"], idx[f"v{i}"]
        ru, rv = idx[f"u{n + 1 - i}"], idx[f"v{n + 1 - i}"]
        row_swap[u], row_swap[v] = v, u
        col_rev[u], col_rev[v] = ru, rv
        both[u], both[v] = rv, ru
    for p in (row_swap, col_rev, both):
        try:
            cands.extend(validate_automorphisms(graph, predom, [p]))
        except SymmetryError:
            continue
    return tuple(cands)


@dataclass
class SolveConfig:
    allow_skip: bool = False
    use_symmetry: bool = True
    automorphisms: Optional[Sequence[Sequence[int]]] = None
    node_limit: int = 0
    memo_capacity: int = 0
    move_ordering: str = "threat-first"  # or "natural"
    workers: int = 1
    upper_hint: Optional[int] = None  # must be a PROVEN upper bound (e.g. a certified pairing)
    force_python_kernel: bool = False


@dataclass
class SolveReport:
    value: Optional[GameValue]
    pv: Optional[GameRecord]
    nodes: int
    memo_hits: int
    exhausted: bool
    bound_direction: Optional[str] = None  # "upper" | "lower" when exhausted/bounded

    def to_json_dict(self) -> dict:
        d: dict = {
            "value": self.value.to_json_dict() if self.value is not None else None,
            "pv": self.pv.to_json_dict()["moves"] if self.pv is not None else None,
            "nodes": self.nodes,
            "memo_hits": self.memo_hits,
            "exhausted": self.exhausted,
        }
        if self.bound_direction is not None:
            d["bound_direction"] = self.bound_direction
        return d


def _symmetries_for(pos: Position, cfg: SolveConfig) -> tuple[tuple[int, ...], ...]:
    if not cfg.use_symmetry:
        return ()
    if cfg.automorphisms is not None:
        return validate_automorphisms(pos.graph, pos.predom, cfg.automorphisms)
    return grid_symmetries(pos.graph, pos.predom)


def _make_kernel(pos: Position, cfg: SolveConfig):
    cls = kernel_class_for(pos.graph.n, cfg.force_python_kernel)
    return cls(
        pos.graph.n,
        pos.graph.closed_adj,
        pos.predom,
        allow_skip=cfg.allow_skip,
        syms=_symmetries_for(pos, cfg),
        node_limit=cfg.node_limit,
        threat_order=(cfg.move_ordering != "natural"),
    )


class KernelSession:
    """A reusable solver bound to one (graph, predom, ruleset) triple.

    Values and best moves for many positions of the same board share one
    transposition table. Strategies and the play service use this as their
    exact engine.
    """

    def __init__(self, graph: Graph, predom: int, cfg: Optional[SolveConfig] = None):
        self.graph = graph
        self.predom = predom
        self.cfg = cfg or SolveConfig()
        ref = Position(graph=graph, predom=predom)
        self.kernel = _make_kernel(ref, self.cfg)

    def _check(self, pos: Position) -> None:
        if pos.graph is not self.graph and pos.graph != self.graph:
            raise ValueError("position's graph differs from the session graph")
        if pos.predom != self.predom:
            raise ValueError("position's predom differs from the session predom")

    def rank_of(self, pos: Position) -> int:
        """Exact value rank (claims or INF) of any position of this board."""
        self._check(pos)
        st = pos.status()
        if st.kind == GameStatus.DOMINATOR_WIN:
            return 0
        if st.kind == GameStatus.STALLER_WIN:
            return INF
        side = DOMINATOR if pos.to_move is Player.DOMINATOR else STALLER
        return self.kernel.value(
            pos.dom, pos.stall, pos.dominated_vertices(), side, -1, INF + 1
        )

    def value_of(self, pos: Position) -> GameValue:
        return GameValue.from_rank(self.rank_of(pos))

    def best_move(self, pos: Position) -> int:
        """Optimal claim for the side to move; lowest vertex index on ties."""
        self._check(pos)
        if pos.status().is_terminal:
            raise ValueError("terminal position has no best move")
        minimizing = pos.to_move is Player.DOMINATOR
        best_v = None
        best_rank = None
        for v in iter_bits(pos.free):
            child = pos.apply_move(v)
            r = self.rank_of(child)
            if minimizing and r < INF:
                r += 1
            if best_rank is None or (r < best_rank if minimizing else r > best_rank):
                best_rank, best_v = r, v
        assert best_v is not None
        return best_v


def _derive_pv(session_kernel, pos: Position, allow_skip: bool) -> GameRecord:
    """Greedy optimal playout using the (hot) kernel for exact child values."""
    rec = GameRecord(pos)
    cur = pos
    while not cur.status().is_terminal:
        minimizing = cur.to_move is Player.DOMINATOR
        candidates: list[tuple[int, int, Optional[int]]] = []  # (rank, order, move)
        order = 0
        for v in iter_bits(cur.free):
            child = cur.apply_move(v)
            st = child.status()
            if st.kind == GameStatus.DOMINATOR_WIN:
                r = 0
            elif st.kind == GameStatus.STALLER_WIN:
                r = INF
            else:
                side = DOMINATOR if child.to_move is Player.DOMINATOR else STALLER
                r = session_kernel.value(
                    child.dom, child.stall, child.dominated_vertices(), side, -1, INF + 1
                )
            if minimizing and r < INF:
                r += 1
            candidates.append((r, order, v))
            order += 1
        if allow_skip and minimizing:
            child = cur.apply_move(None, allow_skip=True)
            side = STALLER
            st = child.status()
            r = INF if st.kind == GameStatus.STALLER_WIN else (
                0 if st.kind == GameStatus.DOMINATOR_WIN else session_kernel.value(
                    child.dom, child.stall, child.dominated_vertices(), side, -1, INF + 1
                )
            )
            candidates.append((r, order, None))
        if minimizing:
            rank, _, move = min(candidates)
        else:
            rank, _, move = max(c for c in candidates)
        rec.append(cur.to_move, move, "pv")
        cur = cur.apply_move(move, allow_skip=allow_skip)
    return rec


def solve(pos: Position, cfg: Optional[SolveConfig] = None, want_pv: bool = True) -> SolveReport:
    """Exact minimax value of a position, with PV and search statistics.

    With a node limit the result may be ``exhausted``: the report then carries
    the best proven bound and its direction (upper at Dominator roots, lower
    at Staller roots) instead of an exact value.
    """
    cfg = cfg or SolveConfig()
    st = pos.status()
    if st.kind == GameStatus.DOMINATOR_WIN:
        return SolveReport(GameValue.dominator_win(0), GameRecord(pos), 0, 0, False)
    if st.kind == GameStatus.STALLER_WIN:
        return SolveReport(GameValue.staller_win(), GameRecord(pos), 0, 0, False)

    kern = _make_kernel(pos, cfg)
    side = DOMINATOR if pos.to_move is Player.DOMINATOR else STALLER
    covered = pos.dominated_vertices()
    beta = INF + 1 if cfg.upper_hint is None else cfg.upper_hint + 1

    try:
        if cfg.workers <= 1:
            rank = kern.value(pos.dom, pos.stall, covered, side, -1, beta)
        else:
            rank = _parallel_root(kern, pos, side, covered, cfg)
    except NodeLimitExceeded:
        return _exhausted_report(kern, pos, side)

    bound_direction = None
    value = GameValue.from_rank(rank)
    if cfg.upper_hint is not None and rank >= beta:
        # The hint was not actually an upper bound; all we proved is value >= rank.
        bound_direction = "lower"
    pv = None
    if want_pv and bound_direction is None:
        pv = _derive_pv(kern, pos, cfg.allow_skip)
        claims = pv.dominator_claims()
        final = pv.replay(allow_skip=True).status()
        if value.is_dominator_win:
            assert final.kind == GameStatus.DOMINATOR_WIN and claims == value.rank, (
                f"PV inconsistent: {final.kind}, {claims} claims vs value {value}"
            )
        else:
            assert final.kind == GameStatus.STALLER_WIN, "PV must end in isolation"
    return SolveReport(value, pv, kern.nodes, kern.hits, False, bound_direction)


def _parallel_root(kern, pos: Position, side: int, covered: int, cfg: SolveConfig) -> int:
    """Split root moves across threads sharing the memo table.

    Each child is searched with a full window so per-child results are exact;
    the combined value is therefore identical to the single-threaded one.
    """
    children = []
    for v in iter_bits(pos.free):
        child = pos.apply_move(v, allow_skip=cfg.allow_skip)
        children.append((v, child))
    if cfg.allow_skip and pos.to_move is Player.DOMINATOR:
        children.append((None, pos.apply_move(None, allow_skip=True)))

    results: dict[int, int] = {}
    errors: list[BaseException] = []
    lock = threading.Lock()

    def work(chunk: list[tuple[int, Optional[int], Position]]) -> None:
        try:
            for idx, mv, child in chunk:
                st = child.status()
                if st.kind == GameStatus.DOMINATOR_WIN:
                    r = 0
                elif st.kind == GameStatus.STALLER_WIN:
                    r = INF
                else:
                    cside = DOMINATOR if child.to_move is Player.DOMINATOR else STALLER
                    r = kern.value(
                        child.dom, child.stall, child.dominated_vertices(), cside, -1, INF + 1
                    )
                if side == DOMINATOR and mv is not None and r < INF:
                    r += 1
                with lock:
                    results[idx] = r
        except BaseException as exc:  # propagate NodeLimitExceeded etc.
            errors.append(exc)

    chunks: list[list] = [[] for _ in range(min(cfg.workers, len(children)))]
    for i, (mv, child) in enumerate(children):
        chunks[i % len(chunks)].append((i, mv, child))
    threads = [threading.Thread(target=work, args=(c,)) for c in chunks]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if errors:
        raise errors[0]
    ranks = list(results.values())
    return min(ranks) if side == DOMINATOR else max(ranks)


def _exhausted_report(kern, pos: Position, side: int) -> SolveReport:
    key = kern._key(pos.dom, pos.stall, side) if hasattr(kern, "_key") else None
    value = None
    direction = None
    entry = kern.memo.get(key) if key is not None else None
    if entry is not None:
        if isinstance(entry, tuple):
            lo, hi = entry
        else:  # compiled kernel packs (lo << 29) | hi
            lo, hi = entry >> 29, entry & ((1 << 29) - 1)
        if side == DOMINATOR and hi < INF:
            value, direction = GameValue.from_rank(hi), "upper"
        elif lo > 0:
            value, direction = GameValue.from_rank(lo), "lower"
    return SolveReport(value, None, kern.nodes, kern.hits, True, direction)


def gamma_mb(graph: Graph, cfg: Optional[SolveConfig] = None) -> GameValue:
    """Value of the D-game on an empty board."""
    rep = solve(Position(graph=graph, to_move=Player.DOMINATOR), cfg, want_pv=False)
    if rep.exhausted:
        raise NodeLimitExceeded("gamma_mb: node limit exhausted")
    return rep.value


def gamma_mb_prime(graph: Graph, cfg: Optional[SolveConfig] = None) -> GameValue:
    """Value of the S-game on an empty board."""
    rep = solve(Position(graph=graph, to_move=Player.STALLER), cfg, want_pv=False)
    if rep.exhausted:
        raise NodeLimitExceeded("gamma_mb_prime: node limit exhausted")
    return rep.value


def canonical_form(pos: Position, automorphisms: Sequence[Sequence[int]]) -> Position:
    """Lexicographically least (dom, stall, predom) image under the group."""
    perms = validate_automorphisms(pos.graph, pos.predom, automorphisms)
    best = (pos.dom, pos.stall, pos.predom)
    for p in perms:
        cand = (apply_perm(pos.dom, p), apply_perm(pos.stall, p), apply_perm(pos.predom, p))
        if cand < best:
            best = cand
    from dataclasses import replace

    return replace(pos, dom=best[0], stall=best[1], predom=best[2])


def reachable_positions(start: Position) -> list[Position]:
    """All positions reachable by arbitrary legal claim sequences (no skips)."""
    seen: set[tuple[int, int, Player]] = set()
    out: list[Position] = []
    stack = [start]
    while stack:
        cur = stack.pop()
        sig = (cur.dom, cur.stall, cur.to_move)
        if sig in seen:
            continue
        seen.add(sig)
        out.append(cur)
        if cur.status().is_terminal:
            continue
        for v in iter_bits(cur.free):
            stack.append(cur.apply_move(v))
    return out


def verify_skip_futility_position(start: Position, cfg: Optional[SolveConfig] = None) -> bool:
    """True iff at every reachable Dominator-to-move position that is winning
    without skips, skipping loses outright."""
    cfg = cfg or SolveConfig()
    session = KernelSession(start.graph, start.predom, SolveConfig(
        allow_skip=False,
        use_symmetry=cfg.use_symmetry,
        automorphisms=cfg.automorphisms,
        node_limit=cfg.node_limit,
        move_ordering=cfg.move_ordering,
        force_python_kernel=cfg.force_python_kernel,
    ))
    from dataclasses import replace

    for pos in reachable_positions(start):
        if pos.to_move is not Player.DOMINATOR or pos.status().is_terminal:
            continue
        if session.rank_of(pos) >= INF:
            continue
        skipped = replace(pos, to_move=Player.STALLER)
        if session.rank_of(skipped) < INF:
            return False
    return True


def verify_skip_futility(spec, cfg: Optional[SolveConfig] = None) -> bool:
    """Gadget-spec convenience wrapper over verify_skip_futility_position."""
    from .gadgets import build_gadget

    return verify_skip_futility_position(build_gadget(spec), cfg)
