"""Nested dissection contraction orders built from flow-based node separators."""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .cutter import Cut, CutterConfig
from .flow import FlowNetwork, build_separator_network
from .graph import (
    Graph,
    ParseError,
    connected_components,
    largest_biconnected_component,
    preorder,
    split_degree2_chains,
)
from .scheduler import EXPANSION, min_smaller_side, run_interleaved

__all__ = [
    "SeparatorPartition",
    "ContractionOrder",
    "NDConfig",
    "NDStats",
    "select_best_cut",
    "cut_to_separator",
    "order_tree_min_depth",
    "tree_vertex_ranking",
    "order_clique",
    "nested_dissection_order",
    "write_order",
    "read_order",
]


@dataclass
class SeparatorPartition:
    separator: list[int]
    block1: list[int]
    block2: list[int]


class ContractionOrder:
    """Bijection between nodes and contraction ranks; ``order[i]`` has rank ``i``."""

    __slots__ = ("order", "rank")

    def __init__(self, order: Sequence[int]):
        self.order = list(order)
        rank = [-1] * len(self.order)
        for i, v in enumerate(self.order):
            if not 0 <= v < len(rank) or rank[v] != -1:
                raise ValueError("order is not a permutation of 0..n-1")
            rank[v] = i
        self.rank = rank

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self):
        return iter(self.order)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ContractionOrder):
            return self.order == other.order
        return NotImplemented

    def __repr__(self) -> str:
        return f"ContractionOrder(n={len(self.order)})"


def write_order(path: str | Path, order: ContractionOrder | Sequence[int]) -> None:
    """One node id per line, line i holding the node of rank i."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("".join(f"{v}\n" for v in order))


def read_order(path: str | Path, n: int | None = None) -> ContractionOrder:
    path = str(path)
    nodes = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s:
                continue
            try:
                nodes.append(int(s))
            except ValueError:
                raise ParseError("expected a node id", lineno, path) from None
    if n is not None and len(nodes) != n:
        raise ParseError(f"order has {len(nodes)} entries, graph has {n} nodes", None, path)
    try:
        return ContractionOrder(nodes)
    except ValueError as exc:
        raise ParseError(str(exc), None, path) from None


# ----------------------------------------------------------- cut handling


def select_best_cut(cuts: Sequence[Cut], n: int) -> Cut:
    """Minimum-expansion cut with at least 20% of the nodes on its smaller side.

    Ties prefer the larger smaller side, then the smaller cut. Without an
    eligible cut the most balanced one is returned; check with
    :func:`is_eligible`.
    """
    if not cuts:
        raise ValueError("no cuts to choose from")
    floor_side = min_smaller_side(n)
    eligible = [c for c in cuts if c.smaller_side >= floor_side]
    if eligible:
        return min(eligible, key=lambda c: (c.expansion, -c.smaller_side, c.cut_size))
    return max(cuts, key=lambda c: (c.smaller_side, -c.cut_size))


def is_eligible(cut: Cut, n: int) -> bool:
    return cut.smaller_side >= min_smaller_side(n)


def cut_to_separator(net: FlowNetwork, cut: Cut) -> SeparatorPartition:
    """Separator from a cut of a node-expanded network.

    Nodes with a cut bridge arc go to the separator; for each cut external
    arc the endpoint on the larger side joins it (source side on ties).
    """
    if not net.expanded:
        raise ValueError("cut does not come from a separator network")
    g = net.graph
    side = cut.source_side
    larger_is_source = cut.source_size >= cut.target_size
    in_q = bytearray(g.n)
    owner, tail, head = net.owner, net.tail, net.head
    for a in cut.arcs:
        if net.is_bridge[a]:
            in_q[owner[tail[a]]] = 1
            continue
        u, v = owner[tail[a]], owner[head[a]]
        su, sv = side[u], side[v]
        if su == sv:
            raise ValueError("cut arc does not cross the cut")
        src, tgt = (u, v) if su else (v, u)
        in_q[src if larger_is_source else tgt] = 1
    q_nodes = [v for v in range(g.n) if in_q[v]]
    b1 = [v for v in range(g.n) if side[v] and not in_q[v]]
    b2 = [v for v in range(g.n) if not side[v] and not in_q[v]]
    return SeparatorPartition(q_nodes, b1, b2)


# ------------------------------------------------------------ base cases


def tree_vertex_ranking(tree: Graph, root: int = 0) -> list[int]:
    """Optimal vertex ranking of a tree (labels from 1), bottom-up with critical lists.

    Each subtree exposes the set of labels still visible from above as a bit
    mask. A node takes the smallest label above every label visible in two
    child subtrees and absent from all of them.
    """
    n = tree.n
    label = [0] * n
    visible = [0] * n
    parent = [-1] * n
    order = []
    seen = bytearray(n)
    seen[root] = 1
    stack = [root]
    while stack:
        u = stack.pop()
        order.append(u)
        for w in tree.neighbors(u):
            if not seen[w]:
                seen[w] = 1
                parent[w] = u
                stack.append(w)
    for u in reversed(order):
        union = 0
        dup = 0
        for w in tree.neighbors(u):
            if w != parent[u]:
                dup |= union & visible[w]
                union |= visible[w]
        lo = max(1, dup.bit_length())  # labels must exceed the largest duplicate
        free = ~(union >> lo)
        r = lo + (free & -free).bit_length() - 1
        label[u] = r
        visible[u] = (union >> (r + 1) << (r + 1)) | (1 << r)
    return label


def order_tree_min_depth(tree: Graph) -> ContractionOrder:
    """Order of minimum elimination tree depth for a forest."""
    comps = connected_components(tree)
    if tree.m != tree.n - len(comps):
        raise ValueError("input is not a forest")
    return ContractionOrder(_order_forest(tree, comps))


def _order_forest(tree: Graph, comps: list[list[int]]) -> list[int]:
    out: list[int] = []
    for comp in comps:
        if len(comp) == 1:
            out.append(comp[0])
            continue
        sub = tree.subgraph(comp)
        label = tree_vertex_ranking(sub)
        local = sorted(range(len(comp)), key=lambda i: (label[i], i))
        out.extend(comp[i] for i in local)
    return out


def order_clique(nodes: Sequence[int]) -> list[int]:
    """Any order of a clique is optimal; keep the input order."""
    return list(nodes)


# ------------------------------------------------------------- pipeline


@dataclass(frozen=True)
class NDConfig:
    cutter: CutterConfig = field(default_factory=CutterConfig)
    cutters: int = 8
    seed: int = 0
    threads: int = 1
    preprocess: bool = True


@dataclass
class NDStats:
    separators: int = 0
    fallbacks: int = 0
    trees: int = 0
    cliques: int = 0
    audit_violations: int = 0
    partitions: list[SeparatorPartition] = field(default_factory=list)
    keep_partitions: bool = False

    def __post_init__(self):
        self._lock = threading.Lock()

    def add(self, **kw):
        with self._lock:
            for k, v in kw.items():
                setattr(self, k, getattr(self, k) + v)


def nested_dissection_order(
    g: Graph,
    coords: np.ndarray | None = None,
    config: NDConfig | None = None,
    stats: NDStats | None = None,
) -> ContractionOrder:
    """Nested dissection order of ``g``.

    Runs the one-time special preprocessing (largest biconnected component
    last, degree-2 chains ordered before the core), then recursive bisection
    with flow-based separators down to trees and cliques.
    """
    config = config or NDConfig()
    if config.cutter.inertial and coords is None:
        raise ValueError(f"mode {config.cutter.mode} needs coordinates")
    if coords is not None:
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (g.n, 2):
            raise ValueError("coordinate table does not match the graph")
    runner = _Dissector(g, coords, config, stats or NDStats())
    return ContractionOrder(runner.run())


class _Dissector:
    def __init__(self, g: Graph, coords, config: NDConfig, stats: NDStats):
        self.g = g
        self.coords = coords
        self.config = config
        self.stats = stats
        self.out = [-1] * g.n
        self._spare = threading.Semaphore(max(0, config.threads - 1))

    def run(self) -> list[int]:
        g = self.g
        pieces: list[list[int]] = []
        if self.config.preprocess:
            core = largest_biconnected_component(g)
            if len(core) < 3:
                # a bridge is not worth isolating; forests keep the tree order
                core = set()
            rest = [v for v in range(g.n) if v not in core]
            pieces.append(rest)
            if core:
                core_nodes = sorted(core)
                dec = split_degree2_chains(g.subgraph(core_nodes))
                low = [core_nodes[v] for v in dec.low_nodes]
                pieces.append(low)
                pieces.append(None)  # placeholder for the reduced core
                reduced_nodes = [core_nodes[v] for v in dec.core_nodes]
        else:
            pieces.append(list(range(g.n)))
        offset = 0
        for i, nodes in enumerate(pieces):
            if nodes is None:
                self._order(dec.reduced, reduced_nodes, offset, f"p{i}")
                offset += len(reduced_nodes)
            else:
                self._order(g.subgraph(nodes), nodes, offset, f"p{i}")
                offset += len(nodes)
        assert offset == g.n and -1 not in self.out
        return self.out

    def _rng(self, key: str) -> int:
        return random.Random(f"{self.config.seed}:{key}").getrandbits(63)

    def _order(self, sub: Graph, nodes: list[int], offset: int, key: str) -> None:
        """Write the order of ``sub`` (local id i = global node nodes[i]) at ``offset``."""
        n = sub.n
        if n == 0:
            return
        if n <= 2:
            self.out[offset:offset + n] = nodes
            return
        comps = connected_components(sub)
        if len(comps) > 1:
            for j, comp in enumerate(comps):
                self._order(sub.subgraph(comp), [nodes[v] for v in comp], offset, f"{key}.c{j}")
                offset += len(comp)
            return
        perm = preorder(sub, 0)
        sub = sub.subgraph(perm)
        nodes = [nodes[v] for v in perm]
        if sub.m == n - 1:
            self.stats.add(trees=1)
            self.out[offset:offset + n] = [nodes[v] for v in _order_forest(sub, [list(range(n))])]
            return
        if sub.is_clique():
            self.stats.add(cliques=1)
            self.out[offset:offset + n] = order_clique(nodes)
            return
        part = self._separate(sub, nodes, key)
        b1, b2, q = part.block1, part.block2, part.separator
        g1 = sub.subgraph(b1)
        g2 = sub.subgraph(b2)
        n1 = [nodes[v] for v in b1]
        n2 = [nodes[v] for v in b2]
        self.out[offset + len(b1) + len(b2):offset + n] = [nodes[v] for v in q]
        worker = None
        if len(b1) > 64 and self._spare.acquire(blocking=False):
            def job():
                try:
                    self._order(g1, n1, offset, key + ".1")
                finally:
                    self._spare.release()
            worker = threading.Thread(target=job)
            worker.start()
        else:
            self._order(g1, n1, offset, key + ".1")
        self._order(g2, n2, offset + len(b1), key + ".2")
        if worker is not None:
            worker.join()

    def _separate(self, sub: Graph, nodes: list[int], key: str) -> SeparatorPartition:
        cfg = self.config
        net = build_separator_network(sub)
        coords = self.coords[nodes] if self.coords is not None else None
        q = cfg.cutters
        result = run_interleaved(
            net,
            q,
            cfg.cutter,
            eps_target=0.0,
            policy=EXPANSION,
            coords=coords,
            seed=self._rng(key),
            threads=cfg.threads,
            allow_small=True,
        )
        cut = select_best_cut(result.cuts, sub.n)
        if not is_eligible(cut, sub.n):
            self.stats.add(fallbacks=1)
        part = cut_to_separator(net, cut)
        self.stats.add(separators=1, audit_violations=result.audit_violations)
        if self.stats.keep_partitions:
            with self.stats._lock:
                self.stats.partitions.append(SeparatorPartition(
                    [nodes[v] for v in part.separator],
                    [nodes[v] for v in part.block1],
                    [nodes[v] for v in part.block2],
                ))
        return part
