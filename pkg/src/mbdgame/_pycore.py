"""Pure-Python minimax kernel for MBD positions.

This is the fallback twin of the compiled kernel in ``_core.pyx``; both expose
the same ``Kernel`` interface and must produce identical values. The solver
front-end picks one at import time (see ``kernel.py``).

Value convention: an integer k means "Dominator wins and needs k more claims
from here with optimal play"; INF means Staller wins. Dominator minimizes,
Staller maximizes. The transposition table stores sound value intervals
(lo, hi); lo == hi marks an exact entry.
"""

from __future__ import annotations

INF = 1 << 28

DOMINATOR = 0
STALLER = 1


class NodeLimitExceeded(Exception):
    """Raised when the search touches more nodes than the configured cap."""


def apply_perm(mask: int, perm: tuple[int, ...]) -> int:
    out = 0
    while mask:
        low = mask & -mask
        out |= 1 << perm[low.bit_length() - 1]
        mask ^= low
    return out


def make_ball2(closed_adj: tuple[int, ...]) -> tuple[int, ...]:
    """Distance-2 closed balls: union of closed neighbourhoods over N[v]."""
    out = []
    for m in closed_adj:
        ball = 0
        mm = m
        while mm:
            low = mm & -mm
            ball |= closed_adj[low.bit_length() - 1]
            mm ^= low
        out.append(ball)
    return tuple(out)


class Kernel:
    """Single-session search state: graph constants, TT, node counters.

    The graph, predominated mask and ruleset are fixed per kernel; positions
    vary only in (dom, stall, side), which is the memo key (canonicalized
    under the supplied symmetry permutations). Callers must only evaluate
    non-terminal positions.
    """

    def __init__(
        self,
        n: int,
        closed_adj: tuple[int, ...],
        predom: int,
        allow_skip: bool = False,
        syms: tuple[tuple[int, ...], ...] = (),
        node_limit: int = 0,
        threat_order: bool = True,
    ) -> None:
        self.n = n
        self.closed_adj = tuple(closed_adj)
        self.predom = predom
        self.full = (1 << n) - 1
        self.ball2 = make_ball2(self.closed_adj)
        self.allow_skip = allow_skip
        self.syms = tuple(tuple(p) for p in syms)
        self.node_limit = node_limit
        self.threat_order = threat_order
        self.memo: dict[int, tuple[int, int]] = {}
        self.nodes = 0
        self.hits = 0

    # -- keys -----------------------------------------------------------

    def _canon(self, dom: int, stall: int) -> tuple[int, int]:
        best = (dom, stall)
        for p in self.syms:
            cand = (apply_perm(dom, p), apply_perm(stall, p))
            if cand < best:
                best = cand
        return best

    def _key(self, dom: int, stall: int, side: int) -> int:
        if self.syms:
            dom, stall = self._canon(dom, stall)
        return (((dom << self.n) | stall) << 1) | side

    # -- terminal helpers -------------------------------------------------

    def staller_wins_now(self, stall: int) -> bool:
        """Full isolation scan (root entry guard; the hot loop is incremental)."""
        inv = ~stall
        live = self.full & ~self.predom
        while live:
            low = live & -live
            if self.closed_adj[low.bit_length() - 1] & inv == 0:
                return True
            live ^= low
        return False

    def _claim_isolates(self, v: int, nstall: int) -> bool:
        inv = ~nstall
        m = self.closed_adj[v] & ~self.predom
        while m:
            low = m & -m
            if self.closed_adj[low.bit_length() - 1] & inv == 0:
                return True
            m ^= low
        return False

    # -- search -----------------------------------------------------------

    def value(self, dom: int, stall: int, covered: int, side: int, alpha: int, beta: int) -> int:
        """Game value of a non-terminal position, fail-soft within (alpha, beta).

        Guarantees on the returned r: r <= alpha implies true <= r; r >= beta
        implies true >= r; otherwise r is exact.
        """
        self.nodes += 1
        if self.node_limit and self.nodes > self.node_limit:
            raise NodeLimitExceeded()

        key = self._key(dom, stall, side)
        entry = self.memo.get(key)
        if entry is not None:
            lo, hi = entry
            if lo == hi or lo >= beta:
                self.hits += 1
                return lo
            if hi <= alpha:
                self.hits += 1
                return hi
            if lo > alpha:
                alpha = lo
            if hi < beta:
                beta = hi
        else:
            lo, hi = 0, INF

        free = self.full & ~(dom | stall)
        unc = self.full & ~covered

        # One scan over uncovered vertices: admissible lower bound h (greedy
        # disjoint closed balls) and forced coverers (singleton claim pools).
        h = 0
        ball_excl = 0
        forced = 0
        dead = False
        m = unc
        while m:
            low = m & -m
            z = low.bit_length() - 1
            pool = self.closed_adj[z] & free
            if pool == 0:
                dead = True
                break
            if pool & (pool - 1) == 0:
                forced |= pool
            if not (low & ball_excl):
                h += 1
                ball_excl |= self.ball2[z]
            m ^= low

        if dead or (side == STALLER and forced):
            # An unsavable vertex exists now, or Staller can create one by
            # claiming the single remaining coverer.
            self.memo[key] = (INF, INF)
            return INF
        if side == DOMINATOR and forced & (forced - 1):
            # Two disjoint single-coverer threats: Dominator saves at most one.
            self.memo[key] = (INF, INF)
            return INF
        if h >= beta:
            lo = max(lo, h)
            self.memo[key] = (lo, hi)
            return h

        orig_alpha, orig_beta = alpha, beta

        if side == DOMINATOR:
            # Minimizing node. fail_min collects lower bounds from children
            # that failed high so an all-fail-high scan still returns a sound
            # lower bound instead of a fake StallerWin.
            if forced:
                moves = [forced.bit_length() - 1]
            else:
                moves = self._ordered_moves(free, unc)
            best = INF
            fail_min = INF
            for v in moves:
                bit = 1 << v
                ncov = covered | self.closed_adj[v]
                if ncov == self.full:
                    best = 1
                    break
                cut = beta if beta < best else best
                if cut <= alpha:
                    break
                cv = self.value(dom | bit, stall, ncov, STALLER, alpha - 1, cut - 1)
                cost = cv + 1 if cv < INF else INF
                if cv >= cut - 1:
                    if cost < fail_min:
                        fail_min = cost
                elif cost < best:
                    best = cost
                if best <= alpha:
                    break
            if self.allow_skip and not forced:
                cut = beta if beta < best else best
                if cut > alpha:
                    cv = self.value(dom, stall, covered, STALLER, alpha, cut)
                    if cv >= cut:
                        if cv < fail_min:
                            fail_min = cv
                    elif cv < best:
                        best = cv
            result = best if best < fail_min else fail_min
        else:
            # Maximizing node. Fail-low children feed best directly: their
            # upper bounds only ever surface in the fail-low region.
            moves = self._ordered_moves(free, unc)
            best = -1
            for v in moves:
                bit = 1 << v
                nstall = stall | bit
                if self._claim_isolates(v, nstall):
                    best = INF
                    break
                cut = alpha if alpha > best else best
                if cut >= beta:
                    break
                cv = self.value(dom, nstall, covered, DOMINATOR, cut, beta)
                if cv > best:
                    best = cv
                if best >= beta:
                    break
            assert best >= 0, "non-terminal Staller node must have moves"
            result = best

        if result <= orig_alpha:
            if result < hi:
                hi = result
        elif result >= orig_beta:
            if result > lo:
                lo = result
        else:
            lo = hi = result
        self.memo[key] = (lo, hi)
        return result

    def _ordered_moves(self, free: int, unc: int) -> list[int]:
        if not self.threat_order:
            out = []
            m = free
            while m:
                low = m & -m
                out.append(low.bit_length() - 1)
                m ^= low
            return out
        scored = []
        m = free
        while m:
            low = m & -m
            v = low.bit_length() - 1
            scored.append((-(self.closed_adj[v] & unc).bit_count(), v))
            m ^= low
        scored.sort()
        return [v for _, v in scored]
