"""Unit-capacity flow networks derived from undirected graphs."""

from __future__ import annotations

from dataclasses import dataclass

from .graph import Graph

__all__ = ["FlowNetwork", "build_edge_cut_network", "build_separator_network"]


@dataclass(eq=False)
class FlowNetwork:
    """Symmetric directed network in CSR form.

    Arc ``a`` runs ``tail[a] -> head[a]`` with capacity ``capacity[a]`` in
    {0, 1}; ``reverse[a]`` is its partner arc. Flow lives in the cutters, not
    here, so one network can back many cutters.

    ``owner[x]`` is the graph node a network node stands for. ``expanded``
    networks hold an in-node ``2v`` and an out-node ``2v + 1`` per graph node
    ``v``, joined by the bridge arc ``2v -> 2v + 1``.
    """

    graph: Graph
    node_count: int
    first_out: list[int]
    head: list[int]
    tail: list[int]
    capacity: list[int]
    reverse: list[int]
    is_bridge: list[bool]
    owner: list[int]
    expanded: bool

    @property
    def arc_count(self) -> int:
        return len(self.head)

    def halves(self, v: int) -> tuple[int, ...]:
        """Network nodes representing graph node ``v``."""
        if self.expanded:
            return (2 * v, 2 * v + 1)
        return (v,)

    def in_node(self, v: int) -> int:
        return 2 * v if self.expanded else v

    def out_arcs(self, x: int) -> range:
        return range(self.first_out[x], self.first_out[x + 1])


def _assemble(graph: Graph, node_count: int, pairs, owner, expanded) -> FlowNetwork:
    # pairs: (u, v, cap_uv, cap_vu, bridge)
    raw = []
    for u, v, c_uv, c_vu, bridge in pairs:
        i = len(raw)
        raw.append((u, v, c_uv, i + 1, bridge))
        raw.append((v, u, c_vu, i, False))
    order = sorted(range(len(raw)), key=lambda i: (raw[i][0], raw[i][1], -raw[i][2]))
    pos = [0] * len(raw)
    for new, old in enumerate(order):
        pos[old] = new
    first_out = [0] * (node_count + 1)
    head, tail, capacity, reverse, is_bridge = [], [], [], [], []
    for old in order:
        u, v, c, partner, bridge = raw[old]
        first_out[u + 1] += 1
        tail.append(u)
        head.append(v)
        capacity.append(c)
        reverse.append(pos[partner])
        is_bridge.append(bridge)
    for x in range(node_count):
        first_out[x + 1] += first_out[x]
    return FlowNetwork(
        graph=graph,
        node_count=node_count,
        first_out=first_out,
        head=head,
        tail=tail,
        capacity=capacity,
        reverse=reverse,
        is_bridge=is_bridge,
        owner=owner,
        expanded=expanded,
    )


def build_edge_cut_network(g: Graph) -> FlowNetwork:
    """One node per graph node; each edge becomes two opposing unit arcs."""
    pairs = [(u, v, 1, 1, False) for u, v in g.edges()]
    return _assemble(g, g.n, pairs, list(range(g.n)), expanded=False)


def build_separator_network(g: Graph) -> FlowNetwork:
    """Node-expanded network whose unit edge cuts correspond to node separators.

    Every capacity-1 arc (bridge ``v_i -> v_o`` and external ``u_o -> v_i``)
    is paired with an explicit capacity-0 reverse arc.
    """
    pairs = [(2 * v, 2 * v + 1, 1, 0, True) for v in range(g.n)]
    for u, v in g.edges():
        pairs.append((2 * u + 1, 2 * v, 1, 0, False))
        pairs.append((2 * v + 1, 2 * u, 1, 0, False))
    owner = [x // 2 for x in range(2 * g.n)]
    return _assemble(g, 2 * g.n, pairs, owner, expanded=True)
