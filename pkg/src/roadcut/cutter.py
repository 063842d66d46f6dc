"""Incremental max-flow cutters: FlowCutter, Inertial Flow and InertialFlowCutter.

A cutter grows terminal sets ``S`` and ``T`` and reuses its flow across a
sequence of max-flow problems, emitting cuts of non-decreasing size and
increasing balance.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .flow import FlowNetwork
from .graph import bfs_hop_distances

__all__ = [
    "SOURCE",
    "TARGET",
    "FLOWCUTTER",
    "INERTIALFLOW",
    "INERTIALFLOWCUTTER",
    "MODES",
    "CutterConfig",
    "Cut",
    "Event",
    "Piercing",
    "InertialOrder",
    "CutterState",
    "balance_bound",
    "is_balanced",
    "bulk_step_size",
    "inertial_node_order",
    "init_cutter",
    "filter_pareto",
]

SOURCE, TARGET = 0, 1

FLOWCUTTER = "flowcutter"
INERTIALFLOW = "inertialflow"
INERTIALFLOWCUTTER = "inertialflowcutter"
MODES = (FLOWCUTTER, INERTIALFLOW, INERTIALFLOWCUTTER)

FLOW_PUSHED = "flow-pushed"
CUT_FOUND = "cut-found"
PIERCED = "pierced"
FINISHED = "finished"

AVOID = "avoid-augmenting"
BULK = "bulk"
SINGLE = "single"


@dataclass(frozen=True)
class CutterConfig:
    mode: str = INERTIALFLOWCUTTER
    alpha: float = 0.05
    delta: float = 0.05
    gamma_a: float = 0.4
    gamma_o: float = 0.25

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0 < self.alpha < 0.5:
            raise ValueError("alpha must lie in (0, 0.5)")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not (0 < self.gamma_a <= 0.5 and 0 < self.gamma_o <= 0.5):
            raise ValueError("gamma_a and gamma_o must lie in (0, 0.5]")

    @property
    def inertial(self) -> bool:
        return self.mode != FLOWCUTTER


def _exact(x: float) -> Fraction:
    # str() keeps 0.1 as 1/10 instead of the binary approximation
    return Fraction(str(x))


def balance_bound(n: int, eps: float) -> int:
    """Largest block size allowed for an ``eps``-balanced bipartition: ceil((1+eps) n / 2)."""
    return math.ceil((1 + _exact(eps)) * n / 2)


def is_balanced(larger_side: int, n: int, eps: float) -> bool:
    return larger_side <= balance_bound(n, eps)


def bulk_step_size(n: int, settled: int, delta: float) -> int:
    """Nodes settled by one bulk piercing step, floor(delta ((1-delta)/2 n - settled)), at least 1."""
    d = _exact(delta)
    return max(1, math.floor(d * ((1 - d) / 2 * n - settled)))


@dataclass(frozen=True)
class Cut:
    """A cut at max flow.

    ``source_side[v] == 1`` marks graph node ``v`` on the source side. On
    node-expanded networks a node sits on the side of its in-node, so nodes
    whose bridge arc is cut count towards the source side.
    """

    arcs: tuple[int, ...]
    source_side: bytes
    source_size: int
    target_size: int
    flow_side: int = SOURCE

    @property
    def cut_size(self) -> int:
        return len(self.arcs)

    @property
    def n(self) -> int:
        return self.source_size + self.target_size

    @property
    def smaller_side(self) -> int:
        return min(self.source_size, self.target_size)

    @property
    def larger_side(self) -> int:
        return max(self.source_size, self.target_size)

    @property
    def epsilon(self) -> float:
        """Achieved imbalance; 0.0 for perfect balance."""
        n = self.n
        if n == 0 or self.larger_side <= math.ceil(n / 2):
            return 0.0
        return 2 * self.larger_side / n - 1

    @property
    def expansion(self) -> float:
        if self.smaller_side == 0:
            return math.inf
        return self.cut_size / self.smaller_side

    def __repr__(self) -> str:
        return f"Cut(size={self.cut_size}, sides={self.source_size}/{self.target_size})"


@dataclass(frozen=True)
class Event:
    kind: str
    cut: Cut | None = None


@dataclass(frozen=True)
class Piercing:
    kind: str
    side: int
    nodes: tuple[int, ...]


def filter_pareto(cuts: Iterable[Cut]) -> list[Cut]:
    """Cuts not dominated in (cut size, smaller side size), by ascending size."""
    out: list[Cut] = []
    for c in sorted(cuts, key=lambda c: (c.cut_size, -c.smaller_side)):
        if not out or c.smaller_side > out[-1].smaller_side:
            if out and out[-1].cut_size == c.cut_size:
                out[-1] = c
            else:
                out.append(c)
    return out


# ------------------------------------------------------------ inertial order


def _k_smallest(keys: np.ndarray, k: int, ids_desc: bool = False) -> np.ndarray:
    """Indices of the k smallest keys in ascending (key, id) order.

    With ``ids_desc`` ties are broken by larger id first. Uses selection, so
    only the k chosen entries are sorted.
    """
    n = keys.shape[0]
    k = max(0, min(k, n))
    ids = np.arange(n)
    tie = -ids if ids_desc else ids
    if k == 0:
        return ids[:0]
    if k < n:
        part = np.argpartition(keys, k - 1)[:k]
        thr = keys[part].max()
        strict = np.flatnonzero(keys < thr)
        ties = np.flatnonzero(keys == thr)
        ties = ties[np.argsort(tie[ties], kind="stable")][: k - strict.shape[0]]
        chosen = np.concatenate([strict, ties])
    else:
        chosen = ids
    return chosen[np.lexsort((tie[chosen], keys[chosen]))]


class InertialOrder:
    """Nodes ranked by projection onto a direction, materialized lazily from both ends."""

    def __init__(self, coords: np.ndarray, direction: Sequence[float]):
        coords = np.asarray(coords, dtype=float)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise ValueError("coordinates must be an (n, 2) array")
        if not np.isfinite(coords).all():
            raise ValueError("coordinates must be finite")
        self.direction = (float(direction[0]), float(direction[1]))
        self.projection = coords @ np.asarray(self.direction)
        self.n = coords.shape[0]
        self._head: list[int] = []
        self._tail: list[int] = []

    def head(self, k: int) -> list[int]:
        """First k nodes of the order."""
        if k > len(self._head):
            self._head = _k_smallest(self.projection, k).tolist()
        return self._head[:k]

    def tail(self, k: int) -> list[int]:
        """Last k nodes of the order, listed from the far end inwards."""
        if k > len(self._tail):
            self._tail = _k_smallest(-self.projection, k, ids_desc=True).tolist()
        return self._tail[:k]

    def from_end(self, side: int, k: int) -> list[int]:
        return self.head(k) if side == SOURCE else self.tail(k)

    def full(self) -> list[int]:
        return self.head(self.n)

    def __iter__(self):
        return iter(self.full())

    def __len__(self) -> int:
        return self.n


def inertial_node_order(coords: np.ndarray, direction: Sequence[float]) -> InertialOrder:
    return InertialOrder(coords, direction)


# -------------------------------------------------------------- cutter state


class CutterState:
    """One cutter over a shared :class:`FlowNetwork`; owns its flow and terminals."""

    def __init__(
        self,
        net: FlowNetwork,
        config: CutterConfig,
        sources: Sequence[int],
        targets: Sequence[int],
        order: InertialOrder | None = None,
    ):
        if not sources or not targets:
            raise ValueError("terminal sets must be non-empty")
        if set(sources) & set(targets):
            raise ValueError("terminal sets must be disjoint")
        self.net = net
        self.config = config
        self.n = net.graph.n
        self.order = order
        self.flow = [0] * net.arc_count
        self.flow_value = 0
        N = net.node_count
        self.is_term = (bytearray(N), bytearray(N))
        self.term_nodes: tuple[list[int], list[int]] = ([], [])
        self.seeds: tuple[list[int], list[int]] = ([], [])
        self.settled = [0, 0]
        self._has_term = (bytearray(self.n), bytearray(self.n))
        self.reach: list[bytearray | None] = [None, None]
        self.reach_list: list[list[int]] = [[], []]
        self.at_max_flow = False
        self.done = False
        self.best_smaller = 0
        self.pierce_log: list[Piercing] = []

        for side, nodes in ((SOURCE, sources), (TARGET, targets)):
            for v in nodes:
                self._add_terminal(side, v, seed=False)
        # Initial terminals whose arcs all stay inside their own set never
        # start a search.
        head = net.head
        for side in (SOURCE, TARGET):
            mine = self.is_term[side]
            for x in self.term_nodes[side]:
                if any(not mine[head[a]] for a in net.out_arcs(x)):
                    self.seeds[side].append(x)
        self.initial_frontier = (list(self.seeds[SOURCE]), list(self.seeds[TARGET]))
        self.dist_s = bfs_hop_distances(net.graph, sources)
        self.dist_t = bfs_hop_distances(net.graph, targets)
        self.bulk_limit = math.floor(_exact(config.gamma_o) * self.n)
        self.cursor = [len(sources), len(targets)] if order is not None else [0, 0]

    # -- terminal bookkeeping --------------------------------------------

    def _add_terminal(self, side: int, v: int, seed: bool = True) -> list[int]:
        added = []
        mine = self.is_term[side]
        for x in self.net.halves(v):
            if not mine[x]:
                mine[x] = 1
                self.term_nodes[side].append(x)
                if seed:
                    self.seeds[side].append(x)
                added.append(x)
        if not self._has_term[side][v]:
            self._has_term[side][v] = 1
            self.settled[side] += 1
        return added

    def is_terminal(self, side: int, v: int) -> bool:
        """True if some half of graph node ``v`` is a terminal of ``side``."""
        return bool(self._has_term[side][v])

    def _settle(self, side: int) -> None:
        owner = self.net.owner
        mine = self.is_term[side]
        for x in self.reach_list[side]:
            if not mine[x]:
                mine[x] = 1
                self.term_nodes[side].append(x)
                self.seeds[side].append(x)
                v = owner[x]
                if not self._has_term[side][v]:
                    self._has_term[side][v] = 1
                    self.settled[side] += 1

    # -- flow ------------------------------------------------------------

    def augment_one_unit(self) -> bool:
        """Push one unit along an S-T path found by pseudo-DFS.

        Returns False at max flow and caches the source-reachable set.
        """
        net = self.net
        fo, head, cap, rev, tail = net.first_out, net.head, net.capacity, net.reverse, net.tail
        flow = self.flow
        is_t = self.is_term[TARGET]
        visited = bytearray(self.is_term[SOURCE])
        reached = list(self.term_nodes[SOURCE])
        pred: dict[int, int] = {}
        stack = list(self.seeds[SOURCE])
        while stack:
            x = stack.pop()
            for a in range(fo[x], fo[x + 1]):
                y = head[a]
                if visited[y] or cap[a] - flow[a] <= 0:
                    continue
                pred[y] = a
                if is_t[y]:
                    is_s = self.is_term[SOURCE]
                    while not is_s[y]:
                        a = pred[y]
                        flow[a] += 1
                        flow[rev[a]] -= 1
                        y = tail[a]
                    self.flow_value += 1
                    self.at_max_flow = False
                    self.reach = [None, None]
                    return True
                visited[y] = 1
                reached.append(y)
                stack.append(y)
        self.at_max_flow = True
        self.reach = [visited, None]
        self.reach_list = [reached, []]
        return False

    def _compute_target_reach(self) -> None:
        net = self.net
        fo, head, cap, rev = net.first_out, net.head, net.capacity, net.reverse
        flow = self.flow
        visited = bytearray(self.is_term[TARGET])
        reached = list(self.term_nodes[TARGET])
        stack = list(self.seeds[TARGET])
        while stack:
            y = stack.pop()
            for a in range(fo[y], fo[y + 1]):
                x = head[a]
                r = rev[a]
                if not visited[x] and cap[r] - flow[r] > 0:
                    visited[x] = 1
                    reached.append(x)
                    stack.append(x)
        self.reach[TARGET] = visited
        self.reach_list[TARGET] = reached

    def _extend_reach(self, side: int, start: Iterable[int]) -> None:
        net = self.net
        fo, head, cap, rev = net.first_out, net.head, net.capacity, net.reverse
        flow = self.flow
        visited = self.reach[side]
        reached = self.reach_list[side]
        stack = []
        for x in start:
            if not visited[x]:
                visited[x] = 1
                reached.append(x)
            stack.append(x)
        while stack:
            x = stack.pop()
            for a in range(fo[x], fo[x + 1]):
                y = head[a]
                if visited[y]:
                    continue
                if side == SOURCE:
                    ok = cap[a] - flow[a] > 0
                else:
                    r = rev[a]
                    ok = cap[r] - flow[r] > 0
                if ok:
                    visited[y] = 1
                    reached.append(y)
                    stack.append(y)

    def _require_max_flow(self) -> None:
        if not self.at_max_flow:
            raise RuntimeError("reachable sets are only defined at maximum flow")
        if self.reach[TARGET] is None:
            self._compute_target_reach()

    def reachable_sets(self) -> tuple[frozenset[int], frozenset[int]]:
        """(S_r, T_r) as sets of network nodes."""
        self._require_max_flow()
        return frozenset(self.reach_list[SOURCE]), frozenset(self.reach_list[TARGET])

    # -- cuts ------------------------------------------------------------

    def derive_side_cut(self, side: int) -> Cut:
        """Source-side cut (S_r, rest) or target-side cut (rest, T_r)."""
        self._require_max_flow()
        net = self.net
        fo, head, cap, rev = net.first_out, net.head, net.capacity, net.reverse
        inside = self.reach[side]
        arcs = []
        if side == SOURCE:
            for x in self.reach_list[SOURCE]:
                for a in range(fo[x], fo[x + 1]):
                    if cap[a] == 1 and not inside[head[a]]:
                        arcs.append(a)
            src = inside
        else:
            for y in self.reach_list[TARGET]:
                for a in range(fo[y], fo[y + 1]):
                    r = rev[a]
                    if cap[r] == 1 and not inside[head[a]]:
                        arcs.append(r)
            src = inside.translate(_FLIP)
        mask = bytes(src[0::2]) if net.expanded else bytes(src)
        s = mask.count(1)
        arcs.sort()
        return Cut(tuple(arcs), mask, s, self.n - s, side)

    def _candidates(self, side: int) -> list[int]:
        """Graph nodes across the current side cut that may join ``side``'s terminals."""
        net = self.net
        fo, head, cap, rev, tail, owner = (
            net.first_out, net.head, net.capacity, net.reverse, net.tail, net.owner)
        inside = self.reach[side]
        other = 1 - side
        out = set()
        if side == SOURCE:
            for x in self.reach_list[SOURCE]:
                for a in range(fo[x], fo[x + 1]):
                    if cap[a] == 1 and not inside[head[a]]:
                        out.add(owner[head[a]])
        else:
            for y in self.reach_list[TARGET]:
                for a in range(fo[y], fo[y + 1]):
                    r = rev[a]
                    if cap[r] == 1 and not inside[head[a]]:
                        out.add(owner[tail[r]])
        return sorted(v for v in out if not self._has_term[other][v])

    def _by_distance(self, nodes: Sequence[int], side: int) -> int:
        ds, dt = self.dist_s, self.dist_t
        if side == SOURCE:
            return min(nodes, key=lambda v: (dt[v] - ds[v], v))
        return min(nodes, key=lambda v: (ds[v] - dt[v], v))

    def _bulk_nodes(self, side: int) -> tuple[int, ...]:
        cfg = self.config
        if self.order is None or cfg.mode != INERTIALFLOWCUTTER:
            return ()
        if self.settled[side] > _exact(cfg.gamma_a) * self.n or self.cursor[side] >= self.bulk_limit:
            return ()
        want = bulk_step_size(self.n, self.settled[side], cfg.delta)
        prefix = self.order.from_end(side, self.bulk_limit)
        other = 1 - side
        picked = []
        pos = self.cursor[side]
        while pos < len(prefix) and len(picked) < want:
            v = prefix[pos]
            if self._has_term[other][v]:
                break
            pos += 1
            if not all(self.is_term[side][x] for x in self.net.halves(v)):
                picked.append(v)
        self._bulk_cursor_next = pos
        return tuple(picked)

    def pierce_select(self, side: int) -> Piercing | None:
        """Choose the next piercing for ``side``; falls back to the other side.

        Priority: a cut-incident node unreachable from the opposite side,
        then a bulk step from the inertial order, then the cut-incident node
        with the best distance score.
        """
        self._require_max_flow()
        for sd in (side, 1 - side):
            cands = self._candidates(sd)
            opp = self.reach[1 - sd]
            halves = self.net.halves
            avoid = [v for v in cands if not any(opp[x] for x in halves(v))]
            if avoid:
                return Piercing(AVOID, sd, (self._by_distance(avoid, sd),))
            bulk = self._bulk_nodes(sd)
            if bulk:
                return Piercing(BULK, sd, bulk)
            if cands:
                return Piercing(SINGLE, sd, (self._by_distance(cands, sd),))
        # Every cut-incident node is already an opposite terminal, which
        # happens when the cut consists of S-T edges. Any free node still
        # makes progress.
        term_s, term_t = self._has_term
        free = [v for v in range(self.n) if not term_s[v] and not term_t[v]]
        if free:
            return Piercing(SINGLE, side, (self._by_distance(free, side),))
        return None

    def _apply(self, p: Piercing) -> None:
        self.pierce_log.append(p)
        if p.kind == BULK:
            self.cursor[p.side] = self._bulk_cursor_next
        added = []
        for v in p.nodes:
            added.extend(self._add_terminal(p.side, v))
        if p.kind == AVOID:
            self._extend_reach(p.side, added)
        else:
            self.at_max_flow = False
            self.reach = [None, None]

    # -- driver ----------------------------------------------------------

    def advance(self, eps: float) -> Event:
        """One atomic step: push a flow unit, or derive and report the next cut."""
        if self.done:
            return Event(FINISHED)
        if not self.at_max_flow and self.augment_one_unit():
            return Event(FLOW_PUSHED)
        self._require_max_flow()

        if self.config.mode == INERTIALFLOW:
            cs = self.derive_side_cut(SOURCE)
            ct = self.derive_side_cut(TARGET)
            cut = ct if ct.smaller_side > cs.smaller_side else cs
            self.done = True
            self.best_smaller = cut.smaller_side
            return Event(CUT_FOUND, cut)

        best = None
        pending = None
        while True:
            side = SOURCE if len(self.reach_list[SOURCE]) <= len(self.reach_list[TARGET]) else TARGET
            self._settle(side)
            cut = self.derive_side_cut(side)
            if cut.smaller_side > (best.smaller_side if best else self.best_smaller):
                best = cut
            if is_balanced(cut.larger_side, self.n, eps):
                self.done = True
                break
            choice = self.pierce_select(side)
            if choice is None:
                self.done = True
                break
            if choice.kind == AVOID:
                self._apply(choice)
                continue
            pending = choice
            break
        if pending is not None:
            self._apply(pending)
        if best is None:
            return Event(FINISHED if self.done else PIERCED)
        self.best_smaller = best.smaller_side
        return Event(CUT_FOUND, best)

    def is_finished(self) -> bool:
        return self.done


_FLIP = bytes([1, 0] + list(range(2, 256)))


def init_cutter(
    net: FlowNetwork,
    config: CutterConfig,
    *,
    coords: np.ndarray | None = None,
    direction: Sequence[float] | None = None,
    rng: random.Random | None = None,
    allow_small: bool = False,
) -> CutterState:
    """Create a cutter with inertial or random initial terminals.

    ``allow_small`` raises ``floor(alpha n)`` to 1 on small graphs instead of
    rejecting them.
    """
    config.validate()
    n = net.graph.n
    if n < 2:
        raise ValueError("cutting needs at least two nodes")
    if config.inertial:
        if coords is None or direction is None:
            raise ValueError(f"mode {config.mode} needs coordinates and a direction")
        if len(coords) != n:
            raise ValueError("coordinate table length does not match the graph")
        k = math.floor(_exact(config.alpha) * n)
        if k < 1:
            if not allow_small:
                raise ValueError(f"alpha * n = {float(config.alpha) * n:g} < 1: no initial terminals")
            k = 1
        order = InertialOrder(coords, direction)
        return CutterState(net, config, order.head(k), order.tail(k), order)
    if rng is None:
        raise ValueError("random terminal selection needs a seeded rng")
    s = rng.randrange(n)
    t = rng.randrange(n)
    while t == s:
        t = rng.randrange(n)
    return CutterState(net, config, [s], [t])
