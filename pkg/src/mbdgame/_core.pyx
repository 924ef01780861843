# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled minimax kernel: the hot twin of ``_pycore.Kernel``.

Masks live in unsigned 64-bit words (boards up to 63 vertices); the
transposition table stays a Python dict keyed by packed position ints.
Logic must mirror ``_pycore`` exactly - the backend equivalence test
holds both to the same values.
"""

from mbdgame._pycore import NodeLimitExceeded

cdef extern from *:
    int __builtin_ctzll(unsigned long long)
    int __builtin_popcountll(unsigned long long)

ctypedef unsigned long long u64

cdef long INF_C = 1 << 28

INF = INF_C
DOMINATOR = 0
STALLER = 1

DEF MAXN = 63
DEF MAXSYM = 16


cdef class Kernel:
    cdef readonly int n
    cdef u64 closed_adj[MAXN]
    cdef u64 ball2[MAXN]
    cdef u64 predom, full
    cdef bint allow_skip, threat_order
    cdef long long node_limit
    cdef readonly long long nodes, hits
    cdef readonly dict memo
    cdef int nsyms
    cdef int perms[MAXSYM][MAXN]

    def __init__(self, n, closed_adj, predom, allow_skip=False, syms=(),
                 node_limit=0, threat_order=True):
        if n > MAXN:
            raise ValueError(f"compiled kernel supports at most {MAXN} vertices")
        if len(syms) > MAXSYM:
            raise ValueError(f"at most {MAXSYM} symmetry permutations supported")
        self.n = n
        cdef int i, j
        for i in range(n):
            self.closed_adj[i] = closed_adj[i]
        cdef u64 ball, m, low
        for i in range(n):
            ball = 0
            m = self.closed_adj[i]
            while m:
                low = m & (0 - m)
                ball |= self.closed_adj[__builtin_ctzll(low)]
                m ^= low
            self.ball2[i] = ball
        self.predom = predom
        self.full = (<u64>1 << n) - 1
        self.allow_skip = allow_skip
        self.threat_order = threat_order
        self.node_limit = node_limit
        self.nsyms = len(syms)
        for i in range(self.nsyms):
            for j in range(n):
                self.perms[i][j] = syms[i][j]
        self.memo = {}
        self.nodes = 0
        self.hits = 0

    cdef u64 _apply_perm(self, u64 mask, int si):
        cdef u64 out = 0, low
        while mask:
            low = mask & (0 - mask)
            out |= <u64>1 << self.perms[si][__builtin_ctzll(low)]
            mask ^= low
        return out

    cdef object _key(self, u64 dom, u64 stall, int side):
        cdef u64 bd = dom, bs = stall, cd, cs
        cdef int i
        for i in range(self.nsyms):
            cd = self._apply_perm(dom, i)
            cs = self._apply_perm(stall, i)
            if cd < bd or (cd == bd and cs < bs):
                bd = cd
                bs = cs
        return (((<object>bd << self.n) | bs) << 1) | side

    def staller_wins_now(self, stall):
        cdef u64 s = stall, inv = ~s
        cdef u64 live = self.full & ~self.predom, low
        while live:
            low = live & (0 - live)
            if self.closed_adj[__builtin_ctzll(low)] & inv == 0:
                return True
            live ^= low
        return False

    cdef bint _claim_isolates(self, int v, u64 nstall):
        cdef u64 inv = ~nstall
        cdef u64 m = self.closed_adj[v] & ~self.predom, low
        while m:
            low = m & (0 - m)
            if self.closed_adj[__builtin_ctzll(low)] & inv == 0:
                return True
            m ^= low
        return False

    def value(self, dom, stall, covered, side, alpha, beta):
        return self._value(dom, stall, covered, side, alpha, beta)

    cdef long _value(self, u64 dom, u64 stall, u64 covered, int side,
                     long alpha, long beta) except? -1:
        self.nodes += 1
        if self.node_limit and self.nodes > self.node_limit:
            raise NodeLimitExceeded()

        cdef object key = self._key(dom, stall, side)
        cdef object entry = self.memo.get(key)
        cdef long lo, hi, packed
        if entry is not None:
            packed = entry
            lo = packed >> 29
            hi = packed & ((1 << 29) - 1)
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
            lo = 0
            hi = INF_C

        cdef u64 free = self.full & ~(dom | stall)
        cdef u64 unc = self.full & ~covered

        cdef long h = 0
        cdef u64 ball_excl = 0, forced = 0
        cdef bint dead = False
        cdef u64 m = unc, low, pool
        cdef int z
        while m:
            low = m & (0 - m)
            z = __builtin_ctzll(low)
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
            self.memo[key] = (INF_C << 29) | INF_C
            return INF_C
        if side == DOMINATOR and forced & (forced - 1):
            self.memo[key] = (INF_C << 29) | INF_C
            return INF_C
        if h >= beta:
            if h > lo:
                lo = h
            self.memo[key] = (lo << 29) | hi
            return h

        cdef long orig_alpha = alpha, orig_beta = beta
        cdef int moves[MAXN]
        cdef int nmoves, k, v
        cdef long best, fail_min, cut, cv, cost, result
        cdef u64 bit, ncov, nstall

        if side == DOMINATOR:
            if forced:
                nmoves = 1
                moves[0] = __builtin_ctzll(forced)
            else:
                nmoves = self._ordered_moves(free, unc, moves)
            best = INF_C
            fail_min = INF_C
            for k in range(nmoves):
                v = moves[k]
                bit = <u64>1 << v
                ncov = covered | self.closed_adj[v]
                if ncov == self.full:
                    best = 1
                    break
                cut = beta if beta < best else best
                if cut <= alpha:
                    break
                cv = self._value(dom | bit, stall, ncov, STALLER, alpha - 1, cut - 1)
                cost = cv + 1 if cv < INF_C else INF_C
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
                    cv = self._value(dom, stall, covered, STALLER, alpha, cut)
                    if cv >= cut:
                        if cv < fail_min:
                            fail_min = cv
                    elif cv < best:
                        best = cv
            result = best if best < fail_min else fail_min
        else:
            nmoves = self._ordered_moves(free, unc, moves)
            best = -1
            for k in range(nmoves):
                v = moves[k]
                bit = <u64>1 << v
                nstall = stall | bit
                if self._claim_isolates(v, nstall):
                    best = INF_C
                    break
                cut = alpha if alpha > best else best
                if cut >= beta:
                    break
                cv = self._value(dom, nstall, covered, DOMINATOR, cut, beta)
                if cv > best:
                    best = cv
                if best >= beta:
                    break
            if best < 0:
                raise AssertionError("non-terminal Staller node must have moves")
            result = best

        if result <= orig_alpha:
            if result < hi:
                hi = result
        elif result >= orig_beta:
            if result > lo:
                lo = result
        else:
            lo = result
            hi = result
        self.memo[key] = (lo << 29) | hi
        return result

    cdef int _ordered_moves(self, u64 free, u64 unc, int* moves):
        cdef int count = 0, i, j, v
        cdef long score
        cdef long scores[MAXN]
        cdef u64 low, mm = free
        if not self.threat_order:
            while mm:
                low = mm & (0 - mm)
                moves[count] = __builtin_ctzll(low)
                count += 1
                mm ^= low
            return count
        while mm:
            low = mm & (0 - mm)
            v = __builtin_ctzll(low)
            score = -__builtin_popcountll(self.closed_adj[v] & unc)
            # insertion sort keyed by (score, v); free iterates ascending so
            # equal scores stay in ascending vertex order
            i = count
            while i > 0 and scores[i - 1] > score:
                scores[i] = scores[i - 1]
                moves[i] = moves[i - 1]
                i -= 1
            scores[i] = score
            moves[i] = v
            count += 1
            mm ^= low
        return count
