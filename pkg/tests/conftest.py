from __future__ import annotations

import random

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from roadcut.generators import grid_graph, random_connected_graph, road_like_graph, write_dimacs
from roadcut.graph import Graph

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@st.composite
def small_graphs(draw, min_n=1, max_n=10, max_m=20):
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if not pairs:
        return n, []
    edges = draw(st.lists(st.sampled_from(pairs), max_size=max_m, unique=True))
    return n, edges


@st.composite
def connected_graphs(draw, min_n=2, max_n=40, extra=30):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    k = draw(st.integers(0, extra))
    rng = random.Random(seed)
    return random_connected_graph(n, k, rng)


def as_graph(n, edges) -> Graph:
    return Graph.from_edges(n, edges)


@pytest.fixture
def grid30():
    return grid_graph(30, 30)


@pytest.fixture
def grid_files(tmp_path):
    g, coords = grid_graph(12, 10)
    gr, co = tmp_path / "grid.gr", tmp_path / "grid.co"
    write_dimacs(gr, g, coords=coords, coords_path=co)
    return g, coords, gr, co


@pytest.fixture
def road_files(tmp_path):
    g, pts = road_like_graph(150, seed=3)
    rng = random.Random(7)
    weights = {e: rng.randint(1, 50) for e in g.edges()}
    gr, co = tmp_path / "road.gr", tmp_path / "road.co"
    write_dimacs(gr, g, weights=weights, coords=pts * 1e6, coords_path=co)
    return g, weights, gr, co


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
