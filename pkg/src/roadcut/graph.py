"""Undirected graphs in adjacency-array form, DIMACS ingestion and the
structural decompositions used by the ordering pipeline."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "Graph",
    "ParseError",
    "ChainDecomposition",
    "load_dimacs_graph",
    "load_dimacs_metric",
    "load_coordinates",
    "read_dimacs_arcs",
    "bfs_hop_distances",
    "connected_components",
    "biconnected_components",
    "largest_biconnected_component",
    "split_degree2_chains",
    "preorder",
    "preorder_relabel",
]


class ParseError(ValueError):
    """Malformed input file. ``line`` is 1-based, or None for file-level problems."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class Graph:
    """Simple undirected graph.

    Node ids are ``0..n-1``. The neighbors of ``v`` are
    ``head[first_out[v]:first_out[v + 1]]`` in ascending order; every edge is
    stored once in each direction, so ``len(head) == 2 * m``.
    """

    __slots__ = ("n", "first_out", "head")

    def __init__(self, n: int, first_out: list[int], head: list[int]):
        self.n = n
        self.first_out = first_out
        self.head = head

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Build a graph, dropping self-loops and duplicate edges."""
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) outside node range [0, {n})")
            if u != v:
                adj[u].add(v)
                adj[v].add(u)
        return cls.from_adjacency(adj)

    @classmethod
    def from_adjacency(cls, adj: Sequence[Iterable[int]]) -> "Graph":
        first_out = [0]
        head: list[int] = []
        for nbrs in adj:
            head.extend(sorted(nbrs))
            first_out.append(len(head))
        return cls(len(adj), first_out, head)

    @property
    def m(self) -> int:
        return len(self.head) // 2

    def neighbors(self, v: int) -> list[int]:
        return self.head[self.first_out[v]:self.first_out[v + 1]]

    def degree(self, v: int) -> int:
        return self.first_out[v + 1] - self.first_out[v]

    def edges(self) -> Iterator[tuple[int, int]]:
        """Each undirected edge once, as ``(u, v)`` with ``u < v``."""
        fo, head = self.first_out, self.head
        for u in range(self.n):
            for a in range(fo[u], fo[u + 1]):
                v = head[a]
                if u < v:
                    yield u, v

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        lo, hi = 0, len(nb)
        while lo < hi:
            mid = (lo + hi) // 2
            if nb[mid] < v:
                lo = mid + 1
            else:
                hi = mid
        return lo < len(nb) and nb[lo] == v

    def subgraph(self, nodes: Sequence[int]) -> "Graph":
        """Induced subgraph; local id ``i`` corresponds to ``nodes[i]``."""
        local = {v: i for i, v in enumerate(nodes)}
        adj = []
        for v in nodes:
            adj.append([local[w] for w in self.neighbors(v) if w in local])
        return Graph.from_adjacency(adj)

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph whose node ``i`` is old node ``perm[i]``."""
        return self.subgraph(perm)

    def is_tree(self) -> bool:
        return self.n > 0 and self.m == self.n - 1 and len(connected_components(self)) == 1

    def is_clique(self) -> bool:
        return self.m == self.n * (self.n - 1) // 2

    def check(self) -> None:
        """Raise AssertionError unless the structural invariants hold."""
        assert len(self.first_out) == self.n + 1
        for u in range(self.n):
            nb = self.neighbors(u)
            assert all(nb[i] < nb[i + 1] for i in range(len(nb) - 1)), f"unsorted or duplicate at {u}"
            assert u not in nb, f"self-loop at {u}"
            for v in nb:
                assert self.has_edge(v, u), f"asymmetric edge {u}-{v}"

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.first_out == other.first_out and self.head == other.head


# --------------------------------------------------------------- file formats


def _tokens(path: str | Path) -> Iterator[tuple[int, list[str]]]:
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts or parts[0] == "c":
                continue
            yield lineno, parts


def read_dimacs_arcs(path: str | Path) -> tuple[int, list[tuple[int, int, int]]]:
    """Raw ``(u, v, w)`` arcs of a ``.gr`` file with 0-based ids."""
    path = str(path)
    n = None
    arcs: list[tuple[int, int, int]] = []
    for lineno, parts in _tokens(path):
        kind = parts[0]
        if kind == "p":
            if n is not None:
                raise ParseError("duplicate 'p' line", lineno, path)
            if len(parts) != 4 or parts[1] != "sp":
                raise ParseError("expected 'p sp <n> <m>'", lineno, path)
            try:
                n = int(parts[2])
                int(parts[3])
            except ValueError:
                raise ParseError("non-integer node or arc count", lineno, path) from None
            if n < 0:
                raise ParseError("negative node count", lineno, path)
        elif kind == "a":
            if n is None:
                raise ParseError("arc before 'p' line", lineno, path)
            if len(parts) != 4:
                raise ParseError("expected 'a <u> <v> <w>'", lineno, path)
            try:
                u, v, w = int(parts[1]), int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError("non-integer arc field", lineno, path) from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise ParseError(f"id out of range [1, {n}]", lineno, path)
            if w < 0:
                raise ParseError("negative arc weight", lineno, path)
            arcs.append((u - 1, v - 1, w))
        else:
            raise ParseError(f"unknown line type {kind!r}", lineno, path)
    if n is None:
        raise ParseError("missing 'p' line", None, path)
    return n, arcs


def load_dimacs_graph(path: str | Path) -> Graph:
    """Topology of a 9th-DIMACS ``.gr`` file, simplified to an undirected graph.

    Arc weights are discarded; see :func:`load_dimacs_metric`.
    """
    n, arcs = read_dimacs_arcs(path)
    return Graph.from_edges(n, ((u, v) for u, v, _ in arcs))


def load_dimacs_metric(path: str | Path, graph: Graph) -> list[int]:
    """Per-arc weights of ``graph`` (indexed like ``graph.head``) from a ``.gr`` file.

    Parallel arcs keep their minimum; directions missing from the file get
    :data:`roadcut.cch.INF`.
    """
    from .cch import INF

    n, arcs = read_dimacs_arcs(path)
    if n != graph.n:
        raise ParseError(f"metric has {n} nodes, graph has {graph.n}", None, str(path))
    weights = [INF] * len(graph.head)
    fo, head = graph.first_out, graph.head
    for u, v, w in arcs:
        if u == v:
            continue
        lo, hi = fo[u], fo[u + 1]
        while lo < hi:
            mid = (lo + hi) // 2
            if head[mid] < v:
                lo = mid + 1
            else:
                hi = mid
        if lo == fo[u + 1] or head[lo] != v:
            raise ParseError(f"metric arc {u + 1}->{v + 1} not in graph", None, str(path))
        if w < weights[lo]:
            weights[lo] = w
    return weights


def load_coordinates(path: str | Path, n: int) -> np.ndarray:
    """``(n, 2)`` float array from a DIMACS ``.co`` file (``v id x y`` lines)."""
    path = str(path)
    coords = np.full((n, 2), np.nan)
    seen = np.zeros(n, dtype=bool)
    for lineno, parts in _tokens(path):
        kind = parts[0]
        if kind == "p":
            # p aux sp co <n>
            try:
                declared = int(parts[-1])
            except ValueError:
                raise ParseError("malformed 'p' line", lineno, path) from None
            if declared != n:
                raise ParseError(f"coordinate count {declared} does not match n={n}", lineno, path)
        elif kind == "v":
            if len(parts) != 4:
                raise ParseError("expected 'v <id> <x> <y>'", lineno, path)
            try:
                i = int(parts[1])
                x, y = float(parts[2]), float(parts[3])
            except ValueError:
                raise ParseError("malformed coordinate line", lineno, path) from None
            if not 1 <= i <= n:
                raise ParseError(f"id out of range [1, {n}]", lineno, path)
            if not (np.isfinite(x) and np.isfinite(y)):
                raise ParseError("non-finite coordinate", lineno, path)
            coords[i - 1] = (x, y)
            seen[i - 1] = True
        else:
            raise ParseError(f"unknown line type {kind!r}", lineno, path)
    if not seen.all():
        missing = int(np.flatnonzero(~seen)[0]) + 1
        raise ParseError(f"missing coordinate for node {missing}", None, path)
    return coords


# ---------------------------------------------------------------- traversals


def bfs_hop_distances(g: Graph, sources: Iterable[int]) -> list[int]:
    """Hop distance to the nearest source; unreachable nodes get ``g.n``."""
    inf = g.n
    dist = [inf] * g.n
    queue = deque()
    for s in sources:
        if dist[s] != 0:
            dist[s] = 0
            queue.append(s)
    if not queue:
        raise ValueError("bfs_hop_distances needs at least one source")
    fo, head = g.first_out, g.head
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for a in range(fo[u], fo[u + 1]):
            v = head[a]
            if dist[v] == inf:
                dist[v] = du
                queue.append(v)
    return dist


def preorder(g: Graph, start: int = 0) -> list[int]:
    """DFS preorder over all nodes: ``start``'s component first, then by smallest id."""
    seen = bytearray(g.n)
    out: list[int] = []
    fo, head = g.first_out, g.head
    roots = [start] + list(range(g.n)) if g.n else []
    for r in roots:
        if seen[r]:
            continue
        seen[r] = 1
        out.append(r)
        stack = [(r, fo[r])]
        while stack:
            u, i = stack[-1]
            end = fo[u + 1]
            while i < end and seen[head[i]]:
                i += 1
            if i == end:
                stack.pop()
                continue
            stack[-1] = (u, i + 1)
            v = head[i]
            seen[v] = 1
            out.append(v)
            stack.append((v, fo[v]))
    return out


def preorder_relabel(g: Graph, seed: int) -> tuple[Graph, list[int]]:
    """Relabel nodes in DFS preorder from a seeded random start node.

    Returns the relabeled graph and ``perm`` with ``perm[new_id] == old_id``.
    """
    if g.n == 0:
        return g, []
    start = random.Random(seed).randrange(g.n)
    perm = preorder(g, start)
    return g.relabel(perm), perm


def connected_components(g: Graph) -> list[list[int]]:
    """Components as node lists, each in DFS preorder; ordered by smallest node."""
    seen = bytearray(g.n)
    comps = []
    fo, head = g.first_out, g.head
    for r in range(g.n):
        if seen[r]:
            continue
        seen[r] = 1
        comp = [r]
        stack = [r]
        while stack:
            u = stack.pop()
            for a in range(fo[u], fo[u + 1]):
                v = head[a]
                if not seen[v]:
                    seen[v] = 1
                    comp.append(v)
                    stack.append(v)
        comps.append(comp)
    return comps


def biconnected_components(g: Graph) -> list[set[int]]:
    """Node sets of all biconnected components (blocks) with at least one edge.

    Iterative Hopcroft-Tarjan with an edge stack; linear time.
    """
    n = g.n
    fo, head = g.first_out, g.head
    disc = [-1] * n
    low = [0] * n
    blocks: list[set[int]] = []
    timer = 0
    for root in range(n):
        if disc[root] != -1 or fo[root] == fo[root + 1]:
            continue
        disc[root] = low[root] = timer
        timer += 1
        edge_stack: list[tuple[int, int]] = []
        stack = [(root, -1, fo[root])]
        while stack:
            u, parent, i = stack[-1]
            if i < fo[u + 1]:
                stack[-1] = (u, parent, i + 1)
                v = head[i]
                if disc[v] == -1:
                    edge_stack.append((u, v))
                    disc[v] = low[v] = timer
                    timer += 1
                    stack.append((v, u, fo[v]))
                elif v != parent and disc[v] < disc[u]:
                    edge_stack.append((u, v))
                    if disc[v] < low[u]:
                        low[u] = disc[v]
                continue
            stack.pop()
            if parent == -1:
                continue
            if low[u] < low[parent]:
                low[parent] = low[u]
            if low[u] >= disc[parent]:
                block = set()
                while True:
                    a, b = edge_stack.pop()
                    block.add(a)
                    block.add(b)
                    if (a, b) == (parent, u):
                        break
                blocks.append(block)
    return blocks


def largest_biconnected_component(g: Graph) -> set[int]:
    """Largest block by node count; ties go to the lexicographically smallest sorted node list."""
    best: set[int] = set()
    best_key = None
    for block in biconnected_components(g):
        key = (-len(block), sorted(block))
        if best_key is None or key < best_key:
            best, best_key = block, key
    return best


# --------------------------------------------------------- degree-2 chains


@dataclass
class ChainDecomposition:
    """Split of a graph into its degree>=3 core and degree<=2 chains.

    ``reduced`` is the core over ``core_nodes`` (local id ``i`` is
    ``core_nodes[i]``) with one extra edge per chain whose both endpoints lie in
    the core. ``low`` is the subgraph induced by the degree<=2 nodes
    (``low_nodes``), whose components are paths or cycles.
    """

    core_nodes: list[int]
    reduced: Graph
    low_nodes: list[int]
    low: Graph
    chains: list[tuple[int, ...]] = field(default_factory=list)
    cyclic: list[tuple[int, ...]] = field(default_factory=list)
    chain_of_edge: dict[tuple[int, int], list[int]] = field(default_factory=dict)


def split_degree2_chains(g: Graph) -> ChainDecomposition:
    """Find all degree-2 chains ``(x, y1..yk, z)`` in linear time and split along them."""
    n = g.n
    deg = [g.degree(v) for v in range(n)]
    core_nodes = [v for v in range(n) if deg[v] >= 3]
    low_nodes = [v for v in range(n) if deg[v] <= 2]
    in_chain = bytearray(n)
    chains: list[tuple[int, ...]] = []
    extra: set[tuple[int, int]] = set()
    chain_of_edge: dict[tuple[int, int], list[int]] = {}

    for x in core_nodes:
        for y in g.neighbors(x):
            if deg[y] > 2 or in_chain[y]:
                continue
            path = [x]
            prev, cur = x, y
            while deg[cur] == 2 and not in_chain[cur]:
                in_chain[cur] = 1
                path.append(cur)
                a, b = g.neighbors(cur)
                nxt = b if a == prev else a
                prev, cur = cur, nxt
            path.append(cur)
            z = cur
            if deg[z] < 2:
                in_chain[z] = 1
            chains.append(tuple(path))
            if deg[z] > 2 and z != x:
                key = (min(x, z), max(x, z))
                chain_of_edge.setdefault(key, []).append(len(chains) - 1)
                if not g.has_edge(x, z):
                    extra.add(key)

    # Components made only of degree<=2 nodes: isolated paths and cycles.
    cyclic: list[tuple[int, ...]] = []
    for v in low_nodes:
        if in_chain[v]:
            continue
        comp = _walk_low_component(g, v, in_chain)
        if len(comp) > 2 and all(deg[u] == 2 for u in comp):
            cyclic.append(tuple(comp))
        else:
            chains.append(tuple(comp))

    local = {v: i for i, v in enumerate(core_nodes)}
    adj: list[set[int]] = [set() for _ in core_nodes]
    for v in core_nodes:
        for w in g.neighbors(v):
            if w in local:
                adj[local[v]].add(local[w])
    for x, z in extra:
        adj[local[x]].add(local[z])
        adj[local[z]].add(local[x])
    reduced = Graph.from_adjacency(adj)
    return ChainDecomposition(
        core_nodes=core_nodes,
        reduced=reduced,
        low_nodes=low_nodes,
        low=g.subgraph(low_nodes),
        chains=chains,
        cyclic=cyclic,
        chain_of_edge=chain_of_edge,
    )


def _walk_low_component(g: Graph, v: int, mark: bytearray) -> list[int]:
    comp = [v]
    mark[v] = 1
    stack = [v]
    while stack:
        u = stack.pop()
        for w in g.neighbors(u):
            if not mark[w] and g.degree(w) <= 2:
                mark[w] = 1
                comp.append(w)
                stack.append(w)
    return comp
