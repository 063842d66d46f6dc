import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import connected_graphs, small_graphs, as_graph
from oracles import scipy_distances, upward_reachable
from roadcut.cch import (INF, build_cch, compute_order_metrics, customize_basic, dijkstra,
                         elimination_tree_parents, query_elim_tree, query_upward_bidijkstra,
                         unit_weights)
from roadcut.graph import Graph
from roadcut.nd import ContractionOrder


def _weights(g, table):
    """Per-arc weights from a dict keyed by directed pairs."""
    return [table[(u, g.head[a])] for u in range(g.n) for a in range(g.first_out[u], g.first_out[u + 1])]


C4 = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
P3 = Graph.from_edges(3, [(0, 1), (1, 2)])


def test_c4_shortcut():
    cch = build_cch(C4, [0, 1, 2, 3])
    assert cch.arc_count == 5
    a = cch.arc(1, 3)
    assert not cch.is_original[a]
    m = customize_basic(cch, unit_weights(C4))
    assert m.up[a] == m.down[a] == 2
    assert query_elim_tree(cch, m, 0, 2) == 2
    assert query_upward_bidijkstra(cch, m, 0, 2) == 2


def test_p3_no_shortcut():
    cch = build_cch(P3, [0, 2, 1])
    assert cch.arc_count == 2
    assert elimination_tree_parents(cch) == [1, -1, 1]
    met = compute_order_metrics(cch)
    assert met.avg_search_space_nodes == pytest.approx(5 / 3)
    assert met.max_search_space_nodes == 2


@pytest.mark.parametrize("n", [2, 4, 6])
def test_complete_graph(n):
    kn = Graph.from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])
    order = list(range(n))
    random.Random(n).shuffle(order)
    cch = build_cch(kn, order)
    assert cch.arc_count == n * (n - 1) // 2
    assert compute_order_metrics(cch).treewidth_bound == n - 1
    parents = elimination_tree_parents(build_cch(kn, list(range(n))))
    assert parents == list(range(1, n)) + [-1]


def test_isolated_node_is_root():
    g = Graph.from_edges(3, [(0, 1)])
    assert elimination_tree_parents(build_cch(g, [0, 1, 2]))[2] == -1


def test_path_treewidth_one():
    pn = Graph.from_edges(7, [(i, i + 1) for i in range(6)])
    # eliminating from one end never creates fill
    assert compute_order_metrics(build_cch(pn, list(range(7)))).treewidth_bound == 1
    # the minimum-depth order trades width for depth
    from roadcut.nd import order_tree_min_depth

    met = compute_order_metrics(build_cch(pn, order_tree_min_depth(pn)))
    assert met.max_search_space_nodes == 3 and met.treewidth_bound == 2


def test_detour_lowers_direct_arc():
    g = Graph.from_edges(3, [(0, 1), (0, 2), (1, 2)])
    w = _weights(g, {(1, 2): 5, (2, 1): 5, (0, 1): 1, (1, 0): 1, (0, 2): 1, (2, 0): 1})
    cch = build_cch(g, [0, 1, 2])
    m = customize_basic(cch, w)
    a = cch.arc(1, 2)
    assert m.up[a] == 2 and m.down[a] == 2


def test_one_way_arcs_and_infinity():
    # 0 -> 1 -> 2 only; reverse directions absent
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    inf_w = {(0, 1): 3, (1, 2): 4, (1, 0): INF, (2, 1): INF}
    w = _weights(g, inf_w)
    cch = build_cch(g, [0, 2, 1])
    m = customize_basic(cch, w)
    assert query_elim_tree(cch, m, 0, 2) == 7
    assert query_elim_tree(cch, m, 2, 0) == INF
    assert query_upward_bidijkstra(cch, m, 2, 0) == INF


def test_negative_weight_rejected():
    w = unit_weights(P3)
    w[0] = -1
    with pytest.raises(ValueError):
        customize_basic(build_cch(P3, [0, 1, 2]), w)


def test_query_edges():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    cch = build_cch(g, [0, 1, 2, 3])
    m = customize_basic(cch, unit_weights(g))
    assert query_elim_tree(cch, m, 1, 1) == 0
    assert query_upward_bidijkstra(cch, m, 2, 2) == 0
    assert query_elim_tree(cch, m, 0, 3) == INF
    with pytest.raises(IndexError):
        query_elim_tree(cch, m, 0, 9)


def test_order_size_mismatch():
    with pytest.raises(ValueError):
        build_cch(P3, [0, 1])
    with pytest.raises(ValueError):
        build_cch(P3, [0, 1, 1])


def _random_instance(g, rng, symmetric=False):
    table = {}
    for u, v in g.edges():
        a = rng.randint(0, 20)
        table[(u, v)] = a
        table[(v, u)] = a if symmetric else rng.randint(0, 20)
    return table


@given(connected_graphs(min_n=2, max_n=40, extra=40), st.integers(0, 10**6), st.booleans())
def test_queries_match_scipy(g, seed, symmetric):
    rng = random.Random(seed)
    order = list(range(g.n))
    rng.shuffle(order)
    table = _random_instance(g, rng, symmetric)
    w = _weights(g, table)
    cch = build_cch(g, order)
    m = customize_basic(cch, w)
    ref = scipy_distances(g.n, [(u, v, x) for (u, v), x in table.items()])
    for s in range(g.n):
        for t in range(g.n):
            d = query_elim_tree(cch, m, s, t)
            assert d == query_upward_bidijkstra(cch, m, s, t)
            assert d == ref[s, t]
            if symmetric:
                assert d == query_elim_tree(cch, m, t, s)


@given(small_graphs(min_n=1, max_n=12, max_m=25), st.integers(0, 10**6))
def test_ancestors_equal_upward_reachability(ng, seed):
    n, edges = ng
    g = as_graph(n, edges)
    order = list(range(n))
    random.Random(seed).shuffle(order)
    cch = build_cch(g, order)
    for r in range(n):
        assert set(cch.ancestors(r)) == upward_reachable(cch.first_out, cch.head, r)
        for a in cch.up_arcs(r):
            assert cch.head[a] > r


@given(connected_graphs(min_n=2, max_n=30, extra=30), st.integers(0, 10**6))
def test_customization_idempotent(g, seed):
    rng = random.Random(seed)
    order = list(range(g.n))
    rng.shuffle(order)
    w = _weights(g, _random_instance(g, rng))
    cch = build_cch(g, order)
    a = customize_basic(cch, w)
    b = customize_basic(cch, w)
    assert a.up == b.up and a.down == b.down
    t = cch.triangle_count()
    assert build_cch(g, order).triangle_count() == t


def test_triangle_count_matches_enumeration():
    rng = random.Random(3)
    g = Graph.from_edges(30, {tuple(sorted(rng.sample(range(30), 2))) for _ in range(70)})
    order = list(range(30))
    rng.shuffle(order)
    cch = build_cch(g, order)
    arcs = {(r, cch.head[a]) for r in range(30) for a in cch.up_arcs(r)}
    count = 0
    for w in range(30):
        ups = [cch.head[a] for a in cch.up_arcs(w)]
        for i in range(len(ups)):
            for j in range(i + 1, len(ups)):
                assert (ups[i], ups[j]) in arcs
                count += 1
    assert cch.triangle_count() == count
    met = compute_order_metrics(cch)
    assert met.triangles == count and met.cch_arcs == len(arcs)


def test_search_space_metrics_by_definition():
    rng = random.Random(8)
    g = Graph.from_edges(25, {tuple(sorted(rng.sample(range(25), 2))) for _ in range(50)})
    order = list(range(25))
    rng.shuffle(order)
    cch = build_cch(g, order)
    met = compute_order_metrics(cch)
    nodes = [len(cch.ancestors(r)) for r in range(25)]
    arcs = [sum(cch.up_degree(x) for x in cch.ancestors(r)) for r in range(25)]
    assert met.avg_search_space_nodes == pytest.approx(np.mean(nodes))
    assert met.max_search_space_nodes == max(nodes)
    assert met.avg_search_space_arcs == pytest.approx(np.mean(arcs))
    assert met.max_search_space_arcs == max(arcs)


def test_plain_dijkstra_full_list():
    w = unit_weights(P3)
    assert dijkstra(P3, w, 0) == [0, 1, 2]
    assert dijkstra(Graph.from_edges(2, []), [], 0, 1) == INF


def test_order_object_accepted():
    cch = build_cch(P3, ContractionOrder([0, 2, 1]))
    assert cch.parent == [2, 2, -1]  # rank space
