"""Synthetic graphs with coordinates for tests, demos and benchmarks."""

from __future__ import annotations

import random

import numpy as np

from .graph import Graph, connected_components

__all__ = ["grid_graph", "road_like_graph", "random_connected_graph", "write_dimacs"]


def grid_graph(width: int, height: int) -> tuple[Graph, np.ndarray]:
    """``width x height`` grid; node ``y * width + x`` sits at ``(x, y)``."""
    edges = []
    for y in range(height):
        for x in range(width):
            v = y * width + x
            if x + 1 < width:
                edges.append((v, v + 1))
            if y + 1 < height:
                edges.append((v, v + width))
    coords = np.array([(x, y) for y in range(height) for x in range(width)], dtype=float)
    return Graph.from_edges(width * height, edges), coords


def road_like_graph(n: int, seed: int = 0, k: int = 3) -> tuple[Graph, np.ndarray]:
    """Connected planar-ish graph: points in the unit square joined to near neighbors.

    Each point links to its ``k`` nearest neighbors; components are then
    chained by their closest point pairs so the result is connected.
    """
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    edges: set[tuple[int, int]] = set()
    kk = min(k, n - 1)
    # chunked so the distance block stays small
    for lo in range(0, n if kk > 0 else 0, 512):
        block = pts[lo:lo + 512]
        d = ((block[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        d[np.arange(len(block)), np.arange(lo, lo + len(block))] = np.inf
        near = np.argpartition(d, kk - 1, axis=1)[:, :kk]
        for i, row in enumerate(near):
            u = lo + i
            for v in row.tolist():
                edges.add((min(u, v), max(u, v)))
    g = Graph.from_edges(n, edges)
    comps = connected_components(g)
    while len(comps) > 1:
        a, b = comps[0], np.array(comps[1])
        d = ((pts[a][:, None, :] - pts[b][None, :, :]) ** 2).sum(axis=2)
        i, j = np.unravel_index(int(d.argmin()), d.shape)
        u, v = a[i], int(b[j])
        edges.add((min(u, v), max(u, v)))
        g = Graph.from_edges(n, edges)
        comps = connected_components(g)
    return g, pts


def random_connected_graph(n: int, extra: int, rng: random.Random) -> Graph:
    """Random spanning tree plus ``extra`` random additional edges (duplicates dropped)."""
    edges = set()
    for v in range(1, n):
        u = rng.randrange(v)
        edges.add((u, v))
    for _ in range(extra):
        if n < 2:
            break
        u, v = rng.sample(range(n), 2)
        edges.add((min(u, v), max(u, v)))
    perm = list(range(n))
    rng.shuffle(perm)
    return Graph.from_edges(n, [(perm[u], perm[v]) for u, v in edges])


def write_dimacs(path, g: Graph, weights=None, coords=None, coords_path=None) -> None:
    """Write ``g`` as a DIMACS ``.gr`` file (both arc directions), optionally ``.co`` coordinates.

    ``weights`` maps an undirected edge ``(u, v)``, ``u < v``, to its length (default 1).
    """
    lines = [f"p sp {g.n} {2 * g.m}"]
    for u, v in g.edges():
        w = 1 if weights is None else weights[(u, v)]
        lines.append(f"a {u + 1} {v + 1} {w}")
        lines.append(f"a {v + 1} {u + 1} {w}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
    if coords is not None and coords_path is not None:
        out = [f"p aux sp co {g.n}"]
        for v in range(g.n):
            x, y = coords[v]
            out.append(f"v {v + 1} {_num(x)} {_num(y)}")
        with open(coords_path, "w", encoding="ascii") as fh:
            fh.write("\n".join(out) + "\n")


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))
