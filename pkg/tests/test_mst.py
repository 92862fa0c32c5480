import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from campusnet.geodesy import DuplicateSiteError, haversine_km
from campusnet.mst import (
    DisconnectedGraphError, GraphError, WeightedGraph, brute_force_mst_weight, graph_from_sites,
    prim_mst,
)
from conftest import make_site


def random_connected_graph(rng, n, integer_weights=False):
    verts = [f"v{i}" for i in range(n)]
    order = verts[:]
    rng.shuffle(order)
    pairs = {frozenset((order[i], order[rng.randrange(i)])) for i in range(1, n)}
    for u, v in itertools.combinations(verts, 2):
        if rng.random() < 0.5:
            pairs.add(frozenset((u, v)))
    edges = []
    for p in sorted(pairs, key=sorted):
        u, v = sorted(p)
        w = float(rng.randint(1, 4)) if integer_weights else rng.uniform(0, 100)
        edges.append((u, v, w))
    return WeightedGraph(verts, edges)


def is_spanning_tree(g, edges):
    parent = {v: v for v in g.vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v, _ in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return len(edges) == g.n - 1 and len({find(v) for v in g.vertices}) == 1


TRIANGLE = WeightedGraph("ABC", [("A", "B", 1), ("A", "C", 2), ("B", "C", 3)])


def test_graph_from_sites_counts(three_sites):
    assert graph_from_sites(three_sites[:1]).m == 0
    assert graph_from_sites(three_sites).m == 3


def test_graph_from_sites_weights_match_haversine():
    sites = [make_site(f"s{i}", 35 + i * 0.3, 43 + i * 0.4) for i in range(5)]
    g = graph_from_sites(sites)
    assert g.m == 10
    by_id = {s.id: s for s in sites}
    for u, v, w in g.edges:
        assert w == haversine_km(by_id[u].location, by_id[v].location)


def test_graph_from_sites_rejects_duplicates():
    s = make_site("a", 36, 44)
    with pytest.raises(DuplicateSiteError):
        graph_from_sites([s, s])


@pytest.mark.parametrize("edges", [
    [("A", "A", 1)],
    [("A", "B", 1), ("B", "A", 2)],
    [("A", "B", -1)],
    [("A", "Z", 1)],
])
def test_graph_invariants(edges):
    with pytest.raises(GraphError):
        WeightedGraph("AB", edges)


def test_single_vertex():
    t = prim_mst(WeightedGraph(["x"], []), "x")
    assert t.edges == [] and t.total_weight == 0


def test_triangle():
    t = prim_mst(TRIANGLE, "A")
    assert {(u, v) for u, v, _ in t.edges} == {("A", "B"), ("A", "C")}
    assert t.total_weight == 3
    assert brute_force_mst_weight(TRIANGLE) == 3


def test_three_site_extraction_order():
    g = WeightedGraph(
        ["erbil", "koya", "kirkuk"],
        [("erbil", "koya", 1.0), ("erbil", "kirkuk", 2.0), ("koya", "kirkuk", 3.0)],
    )
    t = prim_mst(g, "erbil")
    assert [(u, v) for u, v, _ in t.edges] == [("erbil", "koya"), ("erbil", "kirkuk")]


def test_tie_goes_to_earlier_vertex():
    g = WeightedGraph(["s", "b", "a"], [("s", "a", 1.0), ("s", "b", 1.0), ("a", "b", 5.0)])
    assert prim_mst(g, "s").order == ("s", "b", "a")


def test_disconnected_names_vertex():
    g = WeightedGraph("ABC", [("A", "B", 1)])
    with pytest.raises(DisconnectedGraphError, match="'C'"):
        prim_mst(g, "A")
    with pytest.raises(DisconnectedGraphError, match="'C'"):
        brute_force_mst_weight(g)


def test_unknown_start():
    with pytest.raises(GraphError):
        prim_mst(TRIANGLE, "Q")


def test_brute_force_unit_k4():
    g = WeightedGraph("ABCD", [(u, v, 1) for u, v in itertools.combinations("ABCD", 2)])
    assert brute_force_mst_weight(g) == 3


def test_brute_force_guard():
    g = WeightedGraph(range(9), [(i, i + 1, 1) for i in range(8)])
    with pytest.raises(GraphError):
        brute_force_mst_weight(g)


def test_seeded_k6_cross_check():
    rng = random.Random(6)
    verts = list("ABCDEF")
    g = WeightedGraph(verts, [(u, v, rng.uniform(1, 50)) for u, v in itertools.combinations(verts, 2)])
    expected = brute_force_mst_weight(g)
    for s in verts:
        assert prim_mst(g, s).total_weight == expected


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**32), st.booleans())
def test_prim_matches_oracle_from_every_start(n, seed, ints):
    g = random_connected_graph(random.Random(seed), n, ints)
    expected = brute_force_mst_weight(g)
    for s in g.vertices:
        t = prim_mst(g, s)
        assert t.total_weight == expected
        assert is_spanning_tree(g, t.edges)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32), st.floats(0.01, 100))
def test_scaling_keeps_edge_set(n, seed, c):
    g = random_connected_graph(random.Random(seed), n)
    before = {frozenset((u, v)) for u, v, _ in prim_mst(g, g.vertices[0]).edges}
    after = {frozenset((u, v)) for u, v, _ in prim_mst(g.scaled(c), g.vertices[0]).edges}
    assert before == after


def test_preorder():
    g = WeightedGraph("ABCDE", [("A", "B", 1), ("A", "C", 2), ("B", "D", 1), ("C", "E", 1)])
    t = prim_mst(g, "A")
    assert t.order == ("A", "B", "D", "C", "E")
    assert t.preorder() == ["A", "B", "D", "C", "E"]
