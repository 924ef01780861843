"""The structural graph characterizing gamma_MB = gamma = k: builder, checker,
gamma-set counting, and desk-scale consistency checks of the equivalence.

The family is prescriptive: a universal vertex ``a`` (in every minimum
dominating set), pair vertices ``b_i / c_i`` for i = 2..k, leaf set A_1
pendant on ``a``, attachment sets A_i joined to both b_i and c_i, and per-pair
edge options (one of four cases) making every transversal of the pairs plus
``a`` dominating. Builders validate the premises with the brute-force oracle
and reject size choices that admit extra minimum dominating sets.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from .game import Player, Position
from .graphs import (
    Graph,
    enumerate_gamma_sets,
    domination_number,
    graph_from_edges,
    ids_from_mask,
    iter_bits,
    mask_from_ids,
)
from .solver import SolveConfig, gamma_mb, GameValue
from .strategies import Pairing, PairingStrategy


class InvalidCalGSpec(ValueError):
    """Spec whose built graph violates the construction premises; the message
    names the violated condition."""


@dataclass(frozen=True)
class CaseChoice:
    """Edge option for one pair (b_i, c_i).

    case 1: edge b_i c_i. case 2: both b_i and c_i adjacent to a.
    case 3: one of the pair adjacent to a (orient 0: b_i, 1: c_i), the other
    adjacent to both vertices of partner pair j. case 4: b_i adjacent to both
    of pair j, c_i adjacent to both of pair kk.
    """

    case: int
    j: Optional[int] = None
    kk: Optional[int] = None
    orient: int = 0

    def __post_init__(self) -> None:
        if self.case not in (1, 2, 3, 4):
            raise InvalidCalGSpec(f"case must be 1..4, got {self.case}")
        if self.case == 3 and self.j is None:
            raise InvalidCalGSpec("case 3 needs a partner index j")
        if self.case == 4 and (self.j is None or self.kk is None):
            raise InvalidCalGSpec("case 4 needs partner indices j and kk")
        if self.case == 3 and self.orient not in (0, 1):
            raise InvalidCalGSpec("case 3 orient must be 0 or 1")


@dataclass(frozen=True)
class CalGSpec:
    k: int
    a1_size: int
    ai_sizes: tuple[int, ...]  # |A_i| for i = 2..k
    cases: tuple[CaseChoice, ...]  # for i = 2..k

    def __post_init__(self) -> None:
        if self.k < 2:
            raise InvalidCalGSpec("k >= 2 required")
        if self.a1_size < 1 or any(s < 1 for s in self.ai_sizes):
            raise InvalidCalGSpec("all attachment sets need at least one vertex")
        if len(self.ai_sizes) != self.k - 1 or len(self.cases) != self.k - 1:
            raise InvalidCalGSpec("need sizes and cases for i = 2..k")
        for idx, c in enumerate(self.cases):
            i = idx + 2
            for partner in (c.j, c.kk):
                if partner is not None and (partner == i or not 2 <= partner <= self.k):
                    raise InvalidCalGSpec(f"partner index {partner} invalid for pair {i}")


def parse_calg_spec(text: str) -> CalGSpec:
    """Parse the CLI grammar: "k=3,a1=1,ai=1,1,cases=1,2"."""
    fields: dict[str, str] = {}
    for part in text.split(","):
        if "=" in part:
            key, val = part.split("=", 1)
            fields[key.strip()] = val.strip()
            last = key.strip()
        else:
            fields[last] += "," + part.strip()
    try:
        k = int(fields["k"])
        a1 = int(fields["a1"])
        ai = tuple(int(x) for x in fields["ai"].split(","))
        cases = tuple(_parse_case(tok, k) for tok in fields["cases"].split(","))
    except (KeyError, ValueError) as exc:
        raise InvalidCalGSpec(f"bad spec string {text!r}: {exc}") from None
    return CalGSpec(k, a1, ai, cases)


def _parse_case(tok: str, k: int) -> CaseChoice:
    """Case token: "1", "2", "3:j", "3b:j" (orient 1), "4:j:kk"."""
    bits = tok.split(":")
    head = bits[0]
    orient = 1 if head.endswith("b") else 0
    case = int(head.rstrip("b"))
    j = int(bits[1]) if len(bits) > 1 else None
    kk = int(bits[2]) if len(bits) > 2 else None
    if case == 4 and kk is None:
        kk = j
    return CaseChoice(case, j, kk, orient)


def pair_indices(k: int) -> dict[int, tuple[int, int]]:
    """Vertex indices of (b_i, c_i): a sits at 0, pairs follow."""
    return {i: (1 + 2 * (i - 2), 2 + 2 * (i - 2)) for i in range(2, k + 1)}


def build_calG(spec: CalGSpec, validate: bool = True) -> Graph:
    """Materialize the graph; with validate, check the premises by oracle and
    raise InvalidCalGSpec naming the first violation."""
    k = spec.k
    pairs = pair_indices(k)
    n_u = 1 + 2 * (k - 1)
    labels = ["a"]
    for i in range(2, k + 1):
        labels.extend([f"b{i}", f"c{i}"])
    edges: list[tuple[int, int]] = []
    next_v = n_u
    for t in range(spec.a1_size):
        labels.append(f"A1_{t}")
        edges.append((0, next_v))
        next_v += 1
    for idx, size in enumerate(spec.ai_sizes):
        i = idx + 2
        b, c = pairs[i]
        for t in range(size):
            labels.append(f"A{i}_{t}")
            edges.append((b, next_v))
            edges.append((c, next_v))
            next_v += 1
    for idx, choice in enumerate(spec.cases):
        i = idx + 2
        b, c = pairs[i]
        if choice.case == 1:
            edges.append((b, c))
        elif choice.case == 2:
            edges.append((b, 0))
            edges.append((c, 0))
        elif choice.case == 3:
            bj, cj = pairs[choice.j]
            if choice.orient == 0:
                edges.append((b, 0))
                edges.append((c, bj))
                edges.append((c, cj))
            else:
                edges.append((c, 0))
                edges.append((b, bj))
                edges.append((b, cj))
        else:
            bj, cj = pairs[choice.j]
            bk, ck = pairs[choice.kk]
            edges.append((b, bj))
            edges.append((b, cj))
            edges.append((c, bk))
            edges.append((c, ck))
    g = graph_from_edges(next_v, sorted(set(edges)), tuple(labels))
    if validate:
        ok, why = is_calG_structure(g, expected_k=k)
        if not ok:
            raise InvalidCalGSpec(why)
    return g


def is_calG_structure(g: Graph, expected_k: Optional[int] = None) -> tuple[bool, str]:
    """Decide whether the graph itself has the prescribed structure, computing
    U from the actual gamma-sets rather than trusting any labelling."""
    k = domination_number(g)
    if expected_k is not None and k != expected_k:
        return False, f"gamma = {k}, expected {expected_k}"
    if k < 2:
        return False, f"gamma = {k} < 2 is outside the construction's scope"
    gsets = enumerate_gamma_sets(g)
    if len(gsets) != 1 << (k - 1):
        return False, f"{len(gsets)} gamma-sets, expected {1 << (k - 1)}"
    common = g.full_mask
    union = 0
    for s in gsets:
        common &= s
        union |= s
    if common.bit_count() != 1:
        return False, "no unique vertex common to all gamma-sets"
    a = common.bit_length() - 1
    rest = ids_from_mask(union & ~common)
    if len(rest) != 2 * (k - 1):
        return False, f"|U| = {1 + len(rest)}, expected {2 * k - 1}"
    # partner rule: x,y are a pair iff every gamma-set holds exactly one of them
    partner: dict[int, int] = {}
    for x in rest:
        mates = [
            y
            for y in rest
            if y != x
            and all(bool(s & (1 << x)) != bool(s & (1 << y)) for s in gsets)
        ]
        if len(mates) != 1:
            return False, f"vertex {g.label_of(x)} has {len(mates)} complementary mates"
        partner[x] = mates[0]
    pair_list = sorted({tuple(sorted((x, partner[x]))) for x in rest})
    half = 1 << (k - 2)
    for x in rest:
        cnt = sum(1 for s in gsets if s & (1 << x))
        if cnt != half:
            return False, f"{g.label_of(x)} lies in {cnt} gamma-sets, expected {half}"
    # A-partition of the leftover vertices
    u_mask = union
    for w in range(g.n):
        if u_mask & (1 << w):
            continue
        nb_u = g.adj[w] & u_mask
        if nb_u == 1 << a:
            continue  # A_1 leaf
        if any(nb_u == (1 << b) | (1 << c) for b, c in pair_list):
            continue  # attachment vertex of one pair
        return False, (
            f"vertex {g.label_of(w)} attaches to U as "
            f"{[g.label_of(x) for x in ids_from_mask(nb_u)]}"
        )
    # attachment sets must be nonempty for every pair, else the pair vertices
    # would not both appear in gamma-sets the prescribed way
    for b, c in pair_list:
        if not any(
            g.adj[w] & u_mask == (1 << b) | (1 << c)
            for w in range(g.n)
            if not u_mask & (1 << w)
        ):
            return False, f"pair ({g.label_of(b)},{g.label_of(c)}) has no attachment set"
    # per-pair case coverage
    for b, c in pair_list:
        if _pair_case_holds(g, a, b, c, pair_list):
            continue
        return False, f"pair ({g.label_of(b)},{g.label_of(c)}) satisfies none of the four cases"
    return True, "ok"


def _pair_case_holds(g: Graph, a: int, b: int, c: int, pair_list) -> bool:
    def adj(x, y):
        return bool(g.adj[x] & (1 << y))

    if adj(b, c):
        return True  # case 1
    if adj(b, a) and adj(c, a):
        return True  # case 2
    for bj, cj in pair_list:
        if (bj, cj) == tuple(sorted((b, c))):
            continue
        if adj(b, a) and adj(c, bj) and adj(c, cj):
            return True  # case 3
        if adj(c, a) and adj(b, bj) and adj(b, cj):
            return True  # case 3 mirrored
    covered_b = any(
        adj(b, bj) and adj(b, cj)
        for bj, cj in pair_list
        if (bj, cj) != tuple(sorted((b, c)))
    )
    covered_c = any(
        adj(c, bk) and adj(c, ck)
        for bk, ck in pair_list
        if (bk, ck) != tuple(sorted((b, c)))
    )
    return covered_b and covered_c  # case 4


def gamma_set_count(g: Graph) -> int:
    return len(enumerate_gamma_sets(g))


def has_vertex_in_two_gamma_sets(g: Graph) -> bool:
    """The k = 2 criterion's structural side; scoped to gamma = 2."""
    if domination_number(g) != 2:
        raise ValueError("criterion applies to graphs with gamma = 2")
    gsets = enumerate_gamma_sets(g)
    counts: dict[int, int] = {}
    for s in gsets:
        for v in iter_bits(s):
            counts[v] = counts.get(v, 0) + 1
            if counts[v] >= 2:
                return True
    return False


@dataclass
class Theorem1Verdict:
    status: str  # "consistent" | "counterexample-candidate" | "untestable-containment" | "out-of-scope"
    gamma: int
    game_value: Optional[GameValue]
    structural: bool
    detail: str

    def to_json_dict(self) -> dict:
        return {
            "status": self.status,
            "gamma": self.gamma,
            "game_value": self.game_value.to_json_dict() if self.game_value else None,
            "is_calG_structure": self.structural,
            "detail": self.detail,
        }


def theorem1_check(g: Graph, cfg: Optional[SolveConfig] = None) -> Theorem1Verdict:
    """Compare the game predicate gamma_MB = gamma against the structural
    evidence. General subgraph containment is not tested; a structure-less
    graph where the predicate holds is reported untestable."""
    k = domination_number(g)
    if k < 2:
        return Theorem1Verdict("out-of-scope", k, None, False, "gamma < 2")
    value = gamma_mb(g, cfg)
    predicate = value.is_dominator_win and value.claims == k
    structural, why = is_calG_structure(g)
    if structural and predicate:
        return Theorem1Verdict("consistent", k, value, True, "structure present and gamma_MB = gamma")
    if structural and not predicate:
        return Theorem1Verdict(
            "counterexample-candidate", k, value, True,
            f"graph has the structure but gamma_MB = {value} != gamma = {k}",
        )
    if predicate:
        return Theorem1Verdict(
            "untestable-containment", k, value, False,
            f"gamma_MB = gamma holds; containment of the structure not tested ({why})",
        )
    return Theorem1Verdict("consistent", k, value, False, f"neither side holds ({why})")


def sufficiency_strategy(g: Graph) -> PairingStrategy:
    """Dominator's k-claim strategy on a built instance: open at a, answer
    b_i <-> c_i."""
    if g.labels is None or "a" not in g.labels:
        raise ValueError("sufficiency strategy needs a builder-labelled graph")
    a = g.index_of_label("a")
    pairs = []
    i = 2
    while f"b{i}" in g.labels:
        pairs.append((g.index_of_label(f"b{i}"), g.index_of_label(f"c{i}")))
        i += 1
    board = Position(graph=g, to_move=Player.DOMINATOR)
    return PairingStrategy(board, Pairing(tuple(pairs), first_move=a), name="calG-sufficiency")


def random_connected_graphs(
    count: int, n_max: int = 8, n_min: int = 4, seed: int = 20240811
) -> Iterator[Graph]:
    """Deterministic sampler of connected graphs for the seeded corpus."""
    rng = random.Random(seed)
    produced = 0
    while produced < count:
        n = rng.randint(n_min, n_max)
        p = rng.uniform(0.25, 0.6)
        edges = [
            (u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p
        ]
        try:
            g = graph_from_edges(n, edges)
        except Exception:
            continue
        if not _connected(g):
            continue
        produced += 1
        yield g


def _connected(g: Graph) -> bool:
    seen = 1
    frontier = [0]
    while frontier:
        v = frontier.pop()
        for w in iter_bits(g.adj[v] & ~seen):
            seen |= 1 << w
            frontier.append(w)
    return seen == g.full_mask


def k2_criterion_scan(
    count: int = 200, n_max: int = 8, seed: int = 20240811, cfg: Optional[SolveConfig] = None
) -> dict:
    """Over the seeded corpus filtered to gamma = 2: check gamma_MB = 2 iff
    some vertex lies in at least two gamma-sets. Returns scan statistics and
    any counterexamples (expected none)."""
    checked = 0
    sampled = 0
    counterexamples = []
    gen = random_connected_graphs(10 * count, n_max=n_max, seed=seed)
    for g in gen:
        sampled += 1
        if domination_number(g) != 2:
            continue
        left = gamma_mb(g, cfg) == GameValue.dominator_win(2)
        right = has_vertex_in_two_gamma_sets(g)
        if left != right:
            counterexamples.append(g.to_json_dict())
        checked += 1
        if checked >= count:
            break
    return {
        "checked": checked,
        "sampled": sampled,
        "counterexamples": counterexamples,
        "seed": seed,
        "n_max": n_max,
    }
