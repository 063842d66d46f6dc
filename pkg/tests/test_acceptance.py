"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line and the collected lines are
repeated in the terminal summary. Run ``pytest tests/test_acceptance.py -v``.
"""

import io
import math
import os
import random
import time
from pathlib import Path

import networkx as nx
import pytest

from oracles import (elimination_tree_depth, min_depth_brute_force, min_st_edge_cut,
                     scipy_distances, treedepth, upward_reachable)
from roadcut.cch import (build_cch, customize_basic, dijkstra, query_elim_tree,
                         query_upward_bidijkstra)
from roadcut.cli import main
from roadcut.cutter import (CUT_FOUND, CutterConfig, CutterState, balance_bound, bulk_step_size,
                            init_cutter)
from roadcut.flow import build_edge_cut_network
from roadcut.generators import grid_graph, random_connected_graph, road_like_graph, write_dimacs
from roadcut.graph import Graph
from roadcut.nd import NDConfig, NDStats, nested_dissection_order, order_tree_min_depth
from roadcut.scheduler import run_interleaved

RESULTS: list[str] = []
FC = CutterConfig(mode="flowcutter")


def report(num, name, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'} criterion {num:>2}: {name}" + (f" ({detail})" if detail else "")
    RESULTS.append(line)
    print(line)
    return ok


# -- 1 -------------------------------------------------------------------------

def test_01_flow_oracle_equivalence():
    rng = random.Random(1)
    mismatches, spent = 0, 0.0
    for _ in range(200):
        n = rng.randint(2, 10)
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
        edges = rng.sample(pairs, rng.randint(0, min(20, len(pairs))))
        nodes = list(range(n))
        rng.shuffle(nodes)
        k = rng.randint(1, n - 1)
        S = nodes[:rng.randint(1, k)]
        T = nodes[k:k + rng.randint(1, n - k)]
        t0 = time.perf_counter()
        state = CutterState(build_edge_cut_network(Graph.from_edges(n, edges)), FC, S, T)
        while state.augment_one_unit():
            pass
        spent += time.perf_counter() - t0
        mismatches += state.flow_value != min_st_edge_cut(n, edges, S, T)
    ok = mismatches == 0 and spent < 5.0
    assert report(1, "flow oracle equivalence", ok, f"{mismatches} mismatches, {spent:.2f}s")


# -- 2 -------------------------------------------------------------------------

def _balance_instance(i):
    rng = random.Random(f"balance:{i}")
    n = rng.randint(10, 500)
    if i % 2 == 0:
        g, pts = road_like_graph(n, seed=i)
        return g, pts, CutterConfig()
    return random_connected_graph(n, rng.randint(0, n), rng), None, FC


def test_02_balance_guarantee():
    violations, runs = 0, 0
    for i in range(50):
        g, pts, cfg = _balance_instance(i)
        net = build_edge_cut_network(g)
        for eps in (0.0, 0.1, 0.3, 0.6):
            res = run_interleaved(net, 4, cfg, eps_target=eps, coords=pts, seed=i)
            runs += 1
            best = res.best
            if best is None or best.larger_side > balance_bound(g.n, eps):
                violations += 1
    assert report(2, "balance guarantee", violations == 0, f"{violations}/{runs} violations")


# -- 3 -------------------------------------------------------------------------

def _single_run(state):
    cuts = []
    while not state.done:
        ev = state.advance(0.0)
        if ev.kind == CUT_FOUND:
            cuts.append(ev.cut)
    return cuts


def test_03_pareto_monotonicity():
    bad, total = 0, 0
    for i in range(50):
        rng = random.Random(f"mono:{i}")
        if i < 25:
            g, coords = grid_graph(rng.randint(4, 25), rng.randint(4, 25))
            a = rng.uniform(0, math.pi)
            state = init_cutter(build_edge_cut_network(g), CutterConfig(), coords=coords,
                                direction=(math.cos(a), math.sin(a)), allow_small=True)
        else:
            g = random_connected_graph(rng.randint(4, 300), rng.randint(0, 300), rng)
            state = init_cutter(build_edge_cut_network(g), FC, rng=rng)
        cuts = _single_run(state)
        total += len(cuts)
        ok = bool(cuts) and all(a.cut_size <= b.cut_size and a.smaller_side < b.smaller_side
                                for a, b in zip(cuts, cuts[1:]))
        bad += not ok
    assert report(3, "pareto monotonicity", bad == 0, f"{bad} bad runs, {total} cuts")


# -- 4 -------------------------------------------------------------------------

def test_04_bulk_formula():
    got = bulk_step_size(1000, 100, 0.05)
    assert report(4, "bulk piercing formula", got == 18, f"got {got}")


# -- 5 -------------------------------------------------------------------------

def test_05_minimal_depth_tree_order():
    t0 = time.perf_counter()
    violations, trees, at9 = 0, 0, 0
    for n in range(1, 10):
        family = [nx.empty_graph(1)] if n == 1 else list(nx.nonisomorphic_trees(n))
        at9 = len(family) if n == 9 else at9
        for t in family:
            edges = list(t.edges())
            g = Graph.from_edges(n, edges)
            # exhaustive over permutations where affordable, exact subset recursion beyond
            best = min_depth_brute_force(n, edges) if n <= 7 else treedepth(n, edges)
            for order in (order_tree_min_depth(g), nested_dissection_order(g, config=NDConfig(
                    cutter=FC))):
                violations += elimination_tree_depth(n, edges, list(order)) != best
            trees += 1
    spent = time.perf_counter() - t0
    ok = violations == 0 and at9 >= 47 and spent < 60
    assert report(5, "minimal-depth tree ordering", ok,
                  f"{trees} trees, {at9} at n=9, {violations} violations, {spent:.1f}s")


# -- 6, 7, 8 -------------------------------------------------------------------

def _weighted_instance(i):
    rng = random.Random(f"cch:{i}")
    n = rng.randint(5, 200)
    if i % 2 == 0:
        g, pts = road_like_graph(n, seed=1000 + i)
        cfg = NDConfig(cutters=4, seed=i)
    else:
        g, pts = random_connected_graph(n, rng.randint(0, 2 * n), rng), None
        cfg = NDConfig(cutter=FC, cutters=4, seed=i)
    table = {}
    for u, v in g.edges():
        table[(u, v)] = rng.randint(1, 100)
        table[(v, u)] = table[(u, v)] if rng.random() < 0.5 else rng.randint(1, 100)
    w = [table[(u, g.head[a])] for u in range(g.n) for a in range(g.first_out[u], g.first_out[u + 1])]
    return g, pts, cfg, table, w, rng


def _exactness(g, order, table, w, rng):
    cch = build_cch(g, order)
    m = customize_basic(cch, w)
    ref = scipy_distances(g.n, [(u, v, x) for (u, v), x in table.items()])
    plain = {}
    bad = 0
    for _ in range(1000):
        s, t = rng.randrange(g.n), rng.randrange(g.n)
        if s not in plain:
            plain[s] = dijkstra(g, w, s)
        d = query_elim_tree(cch, m, s, t)
        bad += not (d == query_upward_bidijkstra(cch, m, s, t) == plain[s][t] == ref[s, t])
    return bad


def _ancestors(g, order):
    cch = build_cch(g, order)
    return sum(set(cch.ancestors(r)) != upward_reachable(cch.first_out, cch.head, r)
               for r in range(g.n))


@pytest.fixture(scope="module")
def cch_instances():
    out = []
    for i in range(50):
        g, pts, cfg, table, w, rng = _weighted_instance(i)
        out.append((g, nested_dissection_order(g, pts, cfg), table, w, rng))
    return out


def test_06_cch_exactness(cch_instances):
    bad = sum(_exactness(g, o, table, w, rng) for g, o, table, w, rng in cch_instances)
    assert report(6, "CCH exactness", bad == 0, f"{bad} mismatches on 50000 pairs")


def test_07_ancestor_identity(cch_instances):
    bad = sum(_ancestors(g, o) for g, o, *_ in cch_instances)
    assert report(7, "ancestor/search-space identity", bad == 0, f"{bad} mismatches")


def test_08_idempotence_and_triangles(cch_instances):
    bad = 0
    for g, o, _, w, _ in cch_instances:
        cch = build_cch(g, o)
        first = customize_basic(cch, w)
        again = customize_basic(cch, w)
        bad += first.up != again.up or first.down != again.down
        bad += cch.triangle_count() != build_cch(g, o).triangle_count()
    assert report(8, "customization idempotence and triangle stability", bad == 0,
                  f"{bad} differences")


# -- 9 -------------------------------------------------------------------------

COLORADO = os.environ.get("ROADCUT_COLORADO")


def test_09_colorado_reproduction():
    if not COLORADO:
        RESULTS.append("SKIP criterion  9: Colorado reproduction (ROADCUT_COLORADO not set)")
        pytest.skip("set ROADCUT_COLORADO to the directory holding USA-road-d.COL.gr/.co")
    base = Path(COLORADO)
    gr, co = base / "USA-road-d.COL.gr", base / "USA-road-d.COL.co"
    out, err = io.StringIO(), io.StringIO()
    t0 = time.perf_counter()
    code = main(["cut", "--graph", str(gr), "--coords", str(co), "--cutters", "4",
                 "--epsilon", "0", "--epsilon", "0.1"], out, err)
    spent = time.perf_counter() - t0
    rows = [line.split(",") for line in out.getvalue().splitlines()[1:]]
    by_eps = {float(r[0]): (int(r[2]), float(r[1])) for r in rows}
    size10, eps10 = by_eps[0.1]
    size0, _ = by_eps[0.0]
    ok = code == 0 and size10 <= 25 and eps10 <= 0.1 and size0 <= 70 and spent <= 60
    assert report(9, "Colorado reproduction", ok,
                  f"eps 10%: {size10} at {eps10:.3f}, eps 0: {size0}, {spent:.1f}s")


# -- 10 ------------------------------------------------------------------------

def test_10_parallel_sanity():
    bad_exact = bad_anc = audit = 0
    for threads in (2, 4):
        for i in range(0, 50, 5):
            g, pts, cfg, table, w, rng = _weighted_instance(i)
            stats = NDStats()
            cfg = NDConfig(cutter=cfg.cutter, cutters=8, seed=i, threads=threads)
            o = nested_dissection_order(g, pts, cfg, stats)
            audit += stats.audit_violations
            bad_exact += _exactness(g, o, table, w, rng)
            bad_anc += _ancestors(g, o)
    # scheduler stress: many short work items over 8 shared cutters
    for seed in range(6):
        g, pts = road_like_graph(800, seed=50 + seed)
        for policy in ("pareto", "expansion"):
            res = run_interleaved(build_edge_cut_network(g), 8, CutterConfig(), coords=pts,
                                  eps_target=0.03, policy=policy, threads=4)
            audit += res.audit_violations
    ok = bad_exact == bad_anc == audit == 0
    assert report(10, "parallel sanity", ok,
                  f"{bad_exact} distance, {bad_anc} ancestor, {audit} audit violations")


# -- 11 ------------------------------------------------------------------------

def test_11_determinism(tmp_path):
    g, pts = road_like_graph(2000, seed=11)
    gr, co = tmp_path / "r.gr", tmp_path / "r.co"
    write_dimacs(gr, g, coords=pts, coords_path=co)
    orders, cuts = set(), set()
    for i in range(3):
        path = tmp_path / f"o{i}.order"
        out = io.StringIO()
        assert main(["order", "--graph", str(gr), "--coords", str(co), "--order", str(path),
                     "--seed", "5", "--no-times"], out, io.StringIO()) == 0
        orders.add(path.read_bytes())
        out = io.StringIO()
        assert main(["cut", "--graph", str(gr), "--coords", str(co), "--seed", "5",
                     "--no-times"], out, io.StringIO()) == 0
        cuts.add(out.getvalue().encode())
    ok = len(orders) == 1 and len(cuts) == 1
    assert report(11, "determinism", ok, f"{len(orders)} distinct orders, {len(cuts)} distinct reports")
