import json

import pytest
from hypothesis import given, settings, strategies as st

from mbdgame.graphs import (
    DEFAULT_MAX_VERTICES,
    Graph,
    GraphError,
    GraphTooLarge,
    cartesian_product,
    domination_number,
    enumerate_gamma_sets,
    graph_from_edges,
    grid2xn,
    grid_u,
    grid_v,
    ids_from_mask,
    is_dominating_set,
    make_complete,
    make_cycle,
    make_path,
    mask_from_ids,
)

from oracles import oracle_min_dominating_sets


def test_make_path_basics():
    p1 = make_path(1)
    assert p1.n == 1 and p1.edge_count() == 0
    p3 = make_path(3)
    assert p3.edges() == [(0, 1), (1, 2)]
    p5 = make_path(5)
    assert p5.edge_count() == 4
    assert p5.degree_sequence() == (1, 1, 2, 2, 2)
    with pytest.raises(GraphError):
        make_path(0)


def test_complete_and_cycle():
    assert make_complete(3).edge_count() == 3
    assert make_complete(1).edge_count() == 0
    c4 = make_cycle(4)
    assert c4.edge_count() == 4
    assert c4.degree_sequence() == (2, 2, 2, 2)
    with pytest.raises(GraphError):
        make_cycle(2)


def test_cartesian_product_squares():
    sq = cartesian_product(make_path(2), make_path(2))
    assert sq.n == 4 and sq.edge_count() == 4
    assert sq.degree_sequence() == (2, 2, 2, 2)
    k2k2 = cartesian_product(make_complete(2), make_complete(2))
    assert k2k2.degree_sequence() == (2, 2, 2, 2)


def test_product_matches_grid_structure():
    # P2 [] Pn carries exactly the three published edge families
    n = 6
    prod = cartesian_product(make_path(2), make_path(n))
    grid = grid2xn(n)
    assert prod.n == grid.n
    assert prod.edge_count() == grid.edge_count() == 3 * n - 2
    assert prod.degree_sequence() == grid.degree_sequence()
    for i in range(1, n + 1):
        assert grid.adj[grid_u(i)] >> grid_v(i) & 1
        if i < n:
            assert grid.adj[grid_u(i)] >> grid_u(i + 1) & 1
            assert grid.adj[grid_v(i)] >> grid_v(i + 1) & 1


def test_grid_counts():
    assert grid2xn(1).n == 2
    g13 = grid2xn(13)
    assert g13.n == 26 and g13.edge_count() == 37
    assert grid2xn(2).degree_sequence() == make_cycle(4).degree_sequence()


def test_product_size_limit():
    with pytest.raises(GraphTooLarge):
        cartesian_product(make_path(9), make_path(9))


def test_is_dominating_set_examples():
    c4 = make_cycle(4)
    assert is_dominating_set(c4, mask_from_ids([0, 2]))
    p5 = make_path(5)
    assert is_dominating_set(p5, mask_from_ids([1, 3]))
    assert not is_dominating_set(p5, mask_from_ids([0]))


def test_domination_number_vs_oracle(graph_corpus):
    for name, g in graph_corpus:
        oracle_sets = oracle_min_dominating_sets(g)
        assert domination_number(g) == len(next(iter(oracle_sets))), name
        got = {frozenset(ids_from_mask(m)) for m in enumerate_gamma_sets(g)}
        assert got == set(oracle_sets), name


def test_gamma_sets_p6_contains_example():
    sets = {frozenset(ids_from_mask(m)) for m in enumerate_gamma_sets(make_path(6))}
    assert domination_number(make_path(6)) == 2
    assert frozenset({1, 4}) in sets


def test_rooks_graph_domination():
    for r, l, want in ((2, 3, 2), (3, 3, 3)):
        g = cartesian_product(make_complete(r), make_complete(l))
        assert domination_number(g) == want


def test_enumerate_limit_error():
    big = grid2xn(13)
    with pytest.raises(GraphTooLarge):
        enumerate_gamma_sets(big)


def test_graph_validation():
    with pytest.raises(GraphError):
        Graph(2, (0b10, 0b00))  # asymmetric
    with pytest.raises(GraphError):
        Graph(2, (0b01, 0b10))  # self-loops
    with pytest.raises(GraphTooLarge):
        grid2xn(40)  # 80 > 64


def test_serialization_round_trip_and_golden():
    g = grid2xn(3)
    d = g.to_json_dict()
    assert d["edges"] == sorted(d["edges"])
    g2 = Graph.from_json_dict(json.loads(json.dumps(d)))
    assert g2 == g
    assert d == g2.to_json_dict()


@st.composite
def random_graph(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if draw(st.booleans()):
                edges.append((u, v))
    return graph_from_edges(n, edges)


@given(random_graph(), random_graph(max_n=4))
@settings(max_examples=40, deadline=None)
def test_product_commutes_up_to_invariants(g, h):
    gh = cartesian_product(g, h)
    hg = cartesian_product(h, g)
    assert gh.n == hg.n == g.n * h.n
    assert gh.edge_count() == hg.edge_count() == g.edge_count() * h.n + h.edge_count() * g.n
    assert gh.degree_sequence() == hg.degree_sequence()


@given(random_graph())
@settings(max_examples=50, deadline=None)
def test_full_vertex_set_dominates(g):
    assert is_dominating_set(g, g.full_mask)
