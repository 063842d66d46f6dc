"""Customizable Contraction Hierarchies over a given contraction order.

Internally every node is identified by its rank, so all CCH arcs point
from a lower to a higher id. Distances are integers; :data:`INF` marks
missing arcs and unreachable pairs.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Sequence

from .graph import Graph
from .nd import ContractionOrder

__all__ = [
    "INF",
    "CCH",
    "Metric",
    "OrderMetrics",
    "build_cch",
    "customize_basic",
    "elimination_tree_parents",
    "query_elim_tree",
    "query_upward_bidijkstra",
    "compute_order_metrics",
    "dijkstra",
    "unit_weights",
]

INF = (1 << 63) - 1


class CCH:
    """Chordal upward graph of ``graph`` under ``order``.

    Arcs of rank ``r`` are ``first_out[r]:first_out[r + 1]``; ``head`` holds
    ranks in ascending order. ``parent[r]`` is the elimination tree parent
    (lowest upward neighbor) or -1.
    """

    def __init__(self, graph: Graph, order: ContractionOrder):
        if len(order) != graph.n:
            raise ValueError("order and graph sizes differ")
        self.graph = graph
        self.order = order
        n = graph.n
        rank = order.rank
        up: list[set[int]] = [set() for _ in range(n)]
        for u, v in graph.edges():
            ru, rv = rank[u], rank[v]
            if ru < rv:
                up[ru].add(rv)
            else:
                up[rv].add(ru)
        original = [frozenset(s) for s in up]
        # Contracting r connects all its upper neighbors. Adding them to the
        # lowest one suffices: the rest follow when that one is contracted.
        for r in range(n):
            if up[r]:
                p = min(up[r])
                up[p].update(x for x in up[r] if x != p)
        self.first_out = [0] * (n + 1)
        self.head: list[int] = []
        self.is_original: list[bool] = []
        self.parent = [-1] * n
        for r in range(n):
            nb = sorted(up[r])
            self.head.extend(nb)
            self.is_original.extend(x in original[r] for x in nb)
            self.first_out[r + 1] = len(self.head)
            if nb:
                self.parent[r] = nb[0]
        self._arc_index = {}
        for r in range(n):
            for a in range(self.first_out[r], self.first_out[r + 1]):
                self._arc_index[(r, self.head[a])] = a

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def arc_count(self) -> int:
        return len(self.head)

    def up_arcs(self, r: int) -> range:
        return range(self.first_out[r], self.first_out[r + 1])

    def up_degree(self, r: int) -> int:
        return self.first_out[r + 1] - self.first_out[r]

    def arc(self, lo: int, hi: int) -> int:
        return self._arc_index[(lo, hi)]

    def ancestors(self, r: int) -> list[int]:
        """Elimination tree path from rank ``r`` to its root, ``r`` included."""
        path = []
        while r != -1:
            path.append(r)
            r = self.parent[r]
        return path

    def triangle_count(self) -> int:
        # every pair of upper neighbors is adjacent in a chordal graph
        return sum(d * (d - 1) // 2 for d in (self.up_degree(r) for r in range(self.n)))


@dataclass
class Metric:
    """Customized weights per CCH arc: ``up[a]`` lower -> higher, ``down[a]`` the reverse."""

    up: list[int]
    down: list[int]


@dataclass(frozen=True)
class OrderMetrics:
    avg_search_space_nodes: float
    max_search_space_nodes: int
    avg_search_space_arcs: float
    max_search_space_arcs: int
    cch_arcs: int
    triangles: int
    treewidth_bound: int


def build_cch(g: Graph, order: ContractionOrder | Sequence[int]) -> CCH:
    if not isinstance(order, ContractionOrder):
        order = ContractionOrder(order)
    return CCH(g, order)


def elimination_tree_parents(cch: CCH) -> list[int]:
    """Parent per original node id (-1 for roots)."""
    order, rank = cch.order.order, cch.order.rank
    return [order[cch.parent[rank[v]]] if cch.parent[rank[v]] != -1 else -1 for v in range(cch.n)]


def unit_weights(g: Graph) -> list[int]:
    return [1] * len(g.head)


def customize_basic(cch: CCH, weights: Sequence[int]) -> Metric:
    """Basic customization by upper-triangle enumeration.

    ``weights`` is indexed like ``cch.graph.head`` (one entry per directed
    graph arc). Lower nodes are swept in rank order; each pair of upper
    neighbors ``u < v`` of ``w`` relaxes arc ``(u, v)`` through ``w``.
    """
    g = cch.graph
    if len(weights) != len(g.head):
        raise ValueError("need one weight per directed graph arc")
    up = [INF] * cch.arc_count
    down = [INF] * cch.arc_count
    rank = cch.order.rank
    fo, head = g.first_out, g.head
    for u in range(g.n):
        ru = rank[u]
        for a in range(fo[u], fo[u + 1]):
            w = weights[a]
            if w < 0:
                raise ValueError("negative arc weight")
            rv = rank[head[a]]
            if ru < rv:
                c = cch.arc(ru, rv)
                if w < up[c]:
                    up[c] = w
            else:
                c = cch.arc(rv, ru)
                if w < down[c]:
                    down[c] = w
    cfo, chead, index = cch.first_out, cch.head, cch._arc_index
    for w in range(cch.n):
        lo, hi = cfo[w], cfo[w + 1]
        for i in range(lo, hi):
            u = chead[i]
            wu_up, wu_down = up[i], down[i]
            for j in range(i + 1, hi):
                v = chead[j]
                c = index[(u, v)]
                # u -> w -> v and v -> w -> u
                if wu_down < INF and up[j] < INF and wu_down + up[j] < up[c]:
                    up[c] = wu_down + up[j]
                if down[j] < INF and wu_up < INF and down[j] + wu_up < down[c]:
                    down[c] = down[j] + wu_up
    return Metric(up, down)


def query_elim_tree(cch: CCH, metric: Metric, s: int, t: int) -> int:
    """Shortest s-t distance by relaxing arcs along both elimination tree paths."""
    n = cch.n
    if not (0 <= s < n and 0 <= t < n):
        raise IndexError("query node out of range")
    if s == t:
        return 0
    rank = cch.order.rank
    fo, head = cch.first_out, cch.head
    up, down = metric.up, metric.down
    ds = {x: INF for x in cch.ancestors(rank[s])}
    dt = {x: INF for x in cch.ancestors(rank[t])}
    ds[rank[s]] = 0
    dt[rank[t]] = 0
    for dist, weight in ((ds, up), (dt, down)):
        for x in sorted(dist):
            dx = dist[x]
            if dx == INF:
                continue
            for a in range(fo[x], fo[x + 1]):
                w = weight[a]
                if w == INF:
                    continue
                y = head[a]
                d = dx + w
                if d < dist[y]:
                    dist[y] = d
    best = INF
    for z, dz in ds.items():
        if dz == INF:
            continue
        d2 = dt.get(z)
        if d2 is not None and d2 != INF and dz + d2 < best:
            best = dz + d2
    return best


def query_upward_bidijkstra(cch: CCH, metric: Metric, s: int, t: int) -> int:
    """Shortest s-t distance by two Dijkstra searches restricted to upward arcs."""
    n = cch.n
    if not (0 <= s < n and 0 <= t < n):
        raise IndexError("query node out of range")
    if s == t:
        return 0
    rank = cch.order.rank
    fo, head = cch.first_out, cch.head

    def search(source: int, weight: list[int]) -> dict[int, int]:
        dist = {source: 0}
        done: dict[int, int] = {}
        heap = [(0, source)]
        while heap:
            d, x = heapq.heappop(heap)
            if x in done:
                continue
            done[x] = d
            for a in range(fo[x], fo[x + 1]):
                w = weight[a]
                if w == INF:
                    continue
                y = head[a]
                nd = d + w
                if nd < dist.get(y, INF):
                    dist[y] = nd
                    heapq.heappush(heap, (nd, y))
        return done

    fwd = search(rank[s], metric.up)
    bwd = search(rank[t], metric.down)
    best = INF
    for z, d in fwd.items():
        d2 = bwd.get(z)
        if d2 is not None and d + d2 < best:
            best = d + d2
    return best


def compute_order_metrics(cch: CCH) -> OrderMetrics:
    """Search space sizes (node itself included), CCH size, triangles, treewidth bound."""
    n = cch.n
    if n == 0:
        return OrderMetrics(0.0, 0, 0.0, 0, 0, 0, 0)
    nodes = [0] * n
    arcs = [0] * n
    for r in range(n - 1, -1, -1):
        p = cch.parent[r]
        deg = cch.up_degree(r)
        if p == -1:
            nodes[r], arcs[r] = 1, deg
        else:
            nodes[r], arcs[r] = nodes[p] + 1, arcs[p] + deg
    return OrderMetrics(
        avg_search_space_nodes=sum(nodes) / n,
        max_search_space_nodes=max(nodes),
        avg_search_space_arcs=sum(arcs) / n,
        max_search_space_arcs=max(arcs),
        cch_arcs=cch.arc_count,
        triangles=cch.triangle_count(),
        treewidth_bound=max(cch.up_degree(r) for r in range(n)),
    )


def dijkstra(g: Graph, weights: Sequence[int], s: int, t: int | None = None):
    """Plain Dijkstra on the input graph; distance to ``t`` or the full distance list."""
    dist = [INF] * g.n
    dist[s] = 0
    heap = [(0, s)]
    fo, head = g.first_out, g.head
    while heap:
        d, x = heapq.heappop(heap)
        if d > dist[x]:
            continue
        if x == t:
            return d
        for a in range(fo[x], fo[x + 1]):
            w = weights[a]
            if w == INF:
                continue
            y = head[a]
            nd = d + w
            if nd < dist[y]:
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return dist if t is None else dist[t]
