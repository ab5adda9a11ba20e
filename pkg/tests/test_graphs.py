import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import automorphism_count, brute_force_graphs, graph_key
from rationalmoduli.graphs import (
    GraphError, StableGraph, enumerate_graphs, graph_from_vertices, graphs_to_json, parallel_map,
    smooth_graph, threads,
)

TYPES = [(0, 3), (0, 4), (0, 5), (0, 6), (1, 1), (1, 2), (1, 3), (2, 0), (2, 1)]


@pytest.mark.parametrize("g,n", TYPES)
def test_enumeration_matches_brute_force(g, n):
    got = [graph_key(G) for G in enumerate_graphs(g, n)]
    assert len(got) == len(set(got)), "isomorphic graphs listed twice"
    assert set(got) == brute_force_graphs(g, n)


@pytest.mark.parametrize("g,n,count", [(0, 3, 1), (0, 4, 4), (0, 5, 26), (1, 1, 2), (1, 2, 5), (2, 0, 7)])
def test_known_counts(g, n, count):
    assert len(enumerate_graphs(g, n)) == count


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_one_edge_count_genus0(n):
    ones = [G for G in enumerate_graphs(0, n, max_edges=1) if G.n_edges == 1]
    assert len(ones) == 2 ** (n - 1) - n - 1


def test_max_edges_filters():
    full = enumerate_graphs(0, 5)
    cut = enumerate_graphs(0, 5, max_edges=1)
    assert [G.canonical_code() for G in cut] == [G.canonical_code() for G in full if G.n_edges <= 1]


@pytest.mark.parametrize("g,n", TYPES)
def test_automorphism_orders(g, n):
    for G in enumerate_graphs(g, n):
        genera, legs, edges = graph_key(G)
        # graph_key relabels vertices; |Aut| does not depend on that
        assert G.automorphisms().order == automorphism_count(list(genera), legs, edges), G.describe()


def test_automorphism_generators_are_automorphisms():
    for g, n in [(1, 1), (1, 2), (2, 0), (2, 1)]:
        for G in enumerate_graphs(g, n):
            for a in G.automorphisms().generators:
                for h, k in enumerate(a.half_map):
                    assert a.vertex_map[G.half_vertex[h]] == G.half_vertex[k]
                    assert G.leg_label[h] == G.leg_label[k]
                pairs = {frozenset(e) for e in G.edges}
                assert {frozenset(a.half_map[x] for x in e) for e in G.edges} == pairs


def test_genus_two_figure_eight_and_theta():
    eight = graph_from_vertices([(0, [])], [(0, 0), (0, 0)])
    theta = graph_from_vertices([(0, []), (0, [])], [(0, 1), (0, 1), (0, 1)])
    assert eight.automorphisms().order == 8
    assert theta.automorphisms().order == 12
    assert eight.genus() == theta.genus() == 2


def test_stability_and_validation():
    assert not graph_from_vertices([(0, [1, 2])], []).is_stable()
    assert graph_from_vertices([(1, [1])], []).is_stable()
    with pytest.raises(GraphError):
        StableGraph([0], [0, 0], [1, 1], [])
    with pytest.raises(GraphError):
        StableGraph([0], [0, 0], [1, 0], [])
    with pytest.raises(GraphError):
        enumerate_graphs(0, 2)


def test_contraction_preserves_type():
    for g, n in [(0, 6), (1, 2), (2, 1)]:
        for G in enumerate_graphs(g, n):
            for e in range(G.n_edges):
                H = G.contract_edge(e)
                assert (H.genus(), H.n_legs, H.n_edges) == (g, n, G.n_edges - 1)
                assert H.is_stable()


def test_contracting_all_edges_gives_smooth_curve():
    for G in enumerate_graphs(1, 3):
        H, vmap, _ = G.contract(range(G.n_edges))
        assert H.is_isomorphic(smooth_graph(1, 3))
        assert set(vmap) == {0}


@st.composite
def relabelings(draw):
    g, n = draw(st.sampled_from([(0, 6), (1, 2), (1, 3), (2, 1)]))
    graphs = enumerate_graphs(g, n)
    G = graphs[draw(st.integers(0, len(graphs) - 1))]
    vp = draw(st.permutations(range(G.n_vertices)))
    hp = draw(st.permutations(range(len(G.half_vertex))))
    flips = draw(st.lists(st.booleans(), min_size=G.n_edges, max_size=G.n_edges))
    return G, vp, hp, flips


@settings(max_examples=60, deadline=None)
@given(relabelings())
def test_canonical_code_ignores_labels(case):
    G, vp, hp, flips = case
    nh = len(G.half_vertex)
    hv = [0] * nh
    ll = [0] * nh
    for h in range(nh):
        hv[hp[h]] = vp[G.half_vertex[h]]
        ll[hp[h]] = G.leg_label[h]
    genera = [0] * G.n_vertices
    for v in range(G.n_vertices):
        genera[vp[v]] = G.genera[v]
    edges = []
    for (a, b), f in zip(G.edges, flips):
        edges.append((hp[b], hp[a]) if f else (hp[a], hp[b]))
    H = StableGraph(genera, hv, ll, edges[::-1])
    assert H.canonical_code() == G.canonical_code()
    C, vmap, hmap = H.canonical_form()
    assert C.canonical_code() == G.canonical_code()
    for h, k in hmap.items():
        assert C.half_vertex[k] == vmap[H.half_vertex[h]]
        assert C.leg_label[k] == H.leg_label[h]


def test_distinct_graphs_have_distinct_codes():
    for g, n in TYPES:
        codes = [G.canonical_code() for G in enumerate_graphs(g, n)]
        assert len(set(codes)) == len(codes)


def test_json_round_trip():
    gs = enumerate_graphs(1, 2)
    text = graphs_to_json(gs)
    back = [StableGraph.from_dict(d) for d in json.loads(text)]
    assert back == gs
    assert graphs_to_json(back) == text
    assert "leg_label" in text
    with pytest.raises(GraphError):
        StableGraph.from_dict({"vertices": []})


def test_enumeration_is_thread_independent():
    with threads(1):
        a = [G.canonical_code() for G in enumerate_graphs(0, 6)]
    with threads(6):
        b = [G.canonical_code() for G in enumerate_graphs(0, 6)]
    assert a == b


def test_parallel_map_keeps_order():
    with threads(4):
        assert parallel_map(lambda x: x * x, range(50)) == [x * x for x in range(50)]
