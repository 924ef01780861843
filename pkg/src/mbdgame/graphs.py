"""Immutable graphs over bit-mask vertex sets, plus brute-force domination primitives.

Vertices are integers ``0..n-1``. A vertex set is a plain Python int used as a
bit mask (bit ``i`` set means vertex ``i`` is in the set). All game-state and
solver code shares this representation, so the helpers here are the single
place where masks are created, validated and serialized.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence
import itertools

#: Hard cap of the default build (one machine word of mask). A per-graph
#: override up to 128 exists for Cartesian products; the compiled kernel only
#: accepts <= 64 and larger graphs fall back to the pure-Python kernel.
DEFAULT_MAX_VERTICES = 64
ABSOLUTE_MAX_VERTICES = 128

#: Default cap for exhaustive gamma-set enumeration.
EXHAUSTIVE_LIMIT = 24


class GraphError(ValueError):
    """Invalid graph construction or operation."""


class GraphTooLarge(GraphError):
    """Vertex count exceeds the configured capacity; never silently truncated."""


def mask_from_ids(ids: Iterable[int]) -> int:
    m = 0
    for i in ids:
        m |= 1 << i
    return m


def ids_from_mask(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return mask.bit_count()


@dataclass(frozen=True)
class Graph:
    """Immutable graph value: vertex count, adjacency masks, optional labels.

    Invariants (checked on construction):
      * adjacency is symmetric,
      * no self-loops,
      * every mask only uses bits below ``n``.
    """

    n: int
    adj: tuple[int, ...]
    labels: Optional[tuple[str, ...]] = None
    max_vertices: int = DEFAULT_MAX_VERTICES
    closed_adj: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise GraphError("graph needs at least one vertex")
        if self.max_vertices > ABSOLUTE_MAX_VERTICES:
            raise GraphError(f"max_vertices capped at {ABSOLUTE_MAX_VERTICES}")
        if self.n > self.max_vertices:
            raise GraphTooLarge(f"{self.n} vertices exceeds capacity {self.max_vertices}")
        if len(self.adj) != self.n:
            raise GraphError("adjacency length != n")
        full = self.full_mask
        for u, m in enumerate(self.adj):
            if m & ~full:
                raise GraphError(f"adjacency of {u} uses bits >= n")
            if m & (1 << u):
                raise GraphError(f"self-loop at {u}")
            for v in iter_bits(m):
                if not self.adj[v] & (1 << u):
                    raise GraphError(f"asymmetric edge {u}-{v}")
        if self.labels is not None and len(self.labels) != self.n:
            raise GraphError("labels length != n")
        object.__setattr__(
            self, "closed_adj", tuple(m | (1 << u) for u, m in enumerate(self.adj))
        )

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def edges(self) -> list[tuple[int, int]]:
        """Edge list sorted (u < v, lexicographic) for bit-exact golden files."""
        out = []
        for u in range(self.n):
            for v in iter_bits(self.adj[u]):
                if u < v:
                    out.append((u, v))
        return sorted(out)

    def edge_count(self) -> int:
        return sum(popcount(m) for m in self.adj) // 2

    def degree_sequence(self) -> tuple[int, ...]:
        return tuple(sorted(popcount(m) for m in self.adj))

    def label_of(self, v: int) -> str:
        if self.labels is not None:
            return self.labels[v]
        return str(v)

    def index_of_label(self, label: str) -> int:
        if self.labels is None:
            raise GraphError("graph has no labels")
        try:
            return self.labels.index(label)
        except ValueError:
            raise GraphError(f"unknown label {label!r}") from None

    def to_json_dict(self) -> dict:
        d: dict = {"n": self.n, "edges": [[u, v] for u, v in self.edges()]}
        if self.labels is not None:
            d["labels"] = list(self.labels)
        return d

    @staticmethod
    def from_json_dict(d: dict, max_vertices: int = DEFAULT_MAX_VERTICES) -> "Graph":
        labels = tuple(d["labels"]) if "labels" in d and d["labels"] is not None else None
        return graph_from_edges(d["n"], [tuple(e) for e in d["edges"]], labels, max_vertices)


def graph_from_edges(
    n: int,
    edges: Sequence[tuple[int, int]],
    labels: Optional[tuple[str, ...]] = None,
    max_vertices: int = DEFAULT_MAX_VERTICES,
) -> Graph:
    adj = [0] * n
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u},{v}) out of range")
        if u == v:
            raise GraphError(f"self-loop at {u}")
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    return Graph(n, tuple(adj), labels, max_vertices)


def make_path(n: int) -> Graph:
    """Path P_n on vertices 0..n-1 with edges i-(i+1)."""
    if n < 1:
        raise GraphError("path needs n >= 1")
    return graph_from_edges(n, [(i, i + 1) for i in range(n - 1)])


def make_cycle(n: int) -> Graph:
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    return graph_from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def make_complete(n: int) -> Graph:
    if n < 1:
        raise GraphError("complete graph needs n >= 1")
    return graph_from_edges(n, list(itertools.combinations(range(n), 2)))


def cartesian_product(g: Graph, h: Graph, max_vertices: int = DEFAULT_MAX_VERTICES) -> Graph:
    """Cartesian product: (a,x)~(b,y) iff (a=b and x~y) or (x=y and a~b).

    Vertex (a, x) gets index ``a * h.n + x``; labels carry the pair.
    """
    n = g.n * h.n
    if n > max_vertices:
        raise GraphTooLarge(f"product has {n} vertices > capacity {max_vertices}")
    adj = [0] * n
    for a in range(g.n):
        for x in range(h.n):
            i = a * h.n + x
            m = 0
            for y in iter_bits(h.adj[x]):
                m |= 1 << (a * h.n + y)
            for b in iter_bits(g.adj[a]):
                m |= 1 << (b * h.n + x)
            adj[i] = m
    labels = tuple(
        f"({g.label_of(a)},{h.label_of(x)})" for a in range(g.n) for x in range(h.n)
    )
    return Graph(n, tuple(adj), labels, max_vertices)


# --- 2 x n grids with canonical u/v row labels ------------------------------

def grid_u(i: int) -> int:
    """Index of u_i (top row, 1-based column) in a grid2xn graph."""
    return 2 * (i - 1)


def grid_v(i: int) -> int:
    """Index of v_i (bottom row, 1-based column) in a grid2xn graph."""
    return 2 * (i - 1) + 1


def grid2xn(n: int, max_vertices: int = DEFAULT_MAX_VERTICES) -> Graph:
    """The 2 x n grid P_2 [] P_n with labels u_1..u_n / v_1..v_n.

    Equals cartesian_product(P_2, P_n) up to relabeling; columns are numbered
    1..n left to right, u_i and v_i are adjacent within a column.
    """
    if n < 1:
        raise GraphError("grid needs n >= 1")
    edges = []
    for i in range(1, n + 1):
        edges.append((grid_u(i), grid_v(i)))
        if i < n:
            edges.append((grid_u(i), grid_u(i + 1)))
            edges.append((grid_v(i), grid_v(i + 1)))
    labels = []
    for i in range(1, n + 1):
        labels.extend([f"u{i}", f"v{i}"])
    return graph_from_edges(2 * n, edges, tuple(labels), max_vertices)


# --- brute-force domination primitives --------------------------------------

def is_dominating_set(g: Graph, mask: int) -> bool:
    """True iff every vertex not in the set has a neighbour in it."""
    if mask & ~g.full_mask:
        raise GraphError("set uses bits >= n")
    covered = 0
    for v in iter_bits(mask):
        covered |= g.closed_adj[v]
    return covered == g.full_mask


def domination_number(g: Graph, limit: int = EXHAUSTIVE_LIMIT) -> int:
    """gamma(G) by subset enumeration in increasing cardinality."""
    if g.n > limit:
        raise GraphTooLarge(f"{g.n} vertices > exhaustive limit {limit}")
    for k in range(1, g.n + 1):
        for combo in itertools.combinations(range(g.n), k):
            if is_dominating_set(g, mask_from_ids(combo)):
                return k
    raise AssertionError("V(G) always dominates")  # pragma: no cover


def enumerate_gamma_sets(g: Graph, limit: int = EXHAUSTIVE_LIMIT) -> list[int]:
    """All minimum dominating sets, as masks in lexicographic mask order."""
    if g.n > limit:
        raise GraphTooLarge(f"{g.n} vertices > exhaustive limit {limit}")
    for k in range(1, g.n + 1):
        found = [
            mask_from_ids(combo)
            for combo in itertools.combinations(range(g.n), k)
            if is_dominating_set(g, mask_from_ids(combo))
        ]
        if found:
            return sorted(found)
    raise AssertionError("V(G) always dominates")  # pragma: no cover
