"""Delimited reports, GeoJSON export and matplotlib figures for cut experiments."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .cutter import Cut, is_balanced
from .graph import Graph
from .scheduler import CutRecord

__all__ = [
    "CUT_COLUMNS",
    "BENCH_COLUMNS",
    "CutRow",
    "cut_rows",
    "side_connectivity",
    "cut_edges",
    "cut_geojson",
    "plot_pareto",
    "plot_cut",
]

CUT_COLUMNS = ("max_epsilon", "achieved_epsilon", "cut_size", "source_connected",
               "target_connected", "time_ms")

BENCH_COLUMNS = ("avg_ss_nodes", "max_ss_nodes", "avg_ss_arcs_k", "max_ss_arcs_k", "cch_arcs_m",
                 "triangles_m", "tw_bound", "order_ms", "customize_ms", "query_ms",
                 "verify_mismatches")

SIDE_COLORS = ("#1f77b4", "#ff7f0e")


def side_connectivity(g: Graph, source_side: bytes) -> tuple[bool, bool]:
    """Whether G[source side] and G[target side] are each connected, by component labeling."""
    out = []
    for want in (1, 0):
        nodes = [v for v in range(g.n) if source_side[v] == want]
        if not nodes:
            out.append(False)
            continue
        seen = {nodes[0]}
        stack = [nodes[0]]
        while stack:
            u = stack.pop()
            for w in g.neighbors(u):
                if source_side[w] == want and w not in seen:
                    seen.add(w)
                    stack.append(w)
        out.append(len(seen) == len(nodes))
    return out[0], out[1]


@dataclass
class CutRow:
    max_epsilon: float
    record: CutRecord | None
    source_connected: bool | None = None
    target_connected: bool | None = None

    def fields(self, times: bool = True) -> list[str]:
        if self.record is None:
            return [_fmt_eps(self.max_epsilon), "-", "-", "-", "-", "-"]
        cut = self.record.cut
        return [
            _fmt_eps(self.max_epsilon),
            f"{cut.epsilon:.6f}",
            str(cut.cut_size),
            _flag(self.source_connected),
            _flag(self.target_connected),
            f"{self.record.elapsed * 1e3:.3f}" if times else "",
        ]


def _fmt_eps(x: float) -> str:
    return f"{x:g}"


def _flag(b: bool | None) -> str:
    return "-" if b is None else ("1" if b else "0")


def cut_rows(g: Graph, records: Sequence[CutRecord], eps_list: Sequence[float]) -> list[CutRow]:
    """Per requested imbalance, the smallest recorded cut meeting it (earliest on ties)."""
    rows = []
    for eps in eps_list:
        ok = [r for r in records if is_balanced(r.cut.larger_side, g.n, eps)]
        if not ok:
            rows.append(CutRow(eps, None))
            continue
        rec = min(ok, key=lambda r: (r.cut.cut_size, r.elapsed, -r.cut.smaller_side))
        sc, tc = side_connectivity(g, rec.cut.source_side)
        rows.append(CutRow(eps, rec, sc, tc))
    return rows


def cut_edges(g: Graph, source_side: bytes) -> list[tuple[int, int]]:
    return [(u, v) for u, v in g.edges() if source_side[u] != source_side[v]]


def _lonlat(coords: np.ndarray) -> np.ndarray:
    coords = np.asarray(coords, dtype=float)
    # DIMACS .co files store micro-degrees
    if coords.size and np.abs(coords).max() > 360:
        return coords / 1e6
    return coords


def cut_geojson(g: Graph, coords: np.ndarray, source_side: bytes) -> dict:
    """FeatureCollection: one LineString per cut edge plus one MultiPoint per side."""
    edges = cut_edges(g, source_side)
    if not edges:
        raise ValueError("nothing to export: the cut is empty")
    xy = _lonlat(coords)
    features = []
    for u, v in edges:
        features.append({
            "type": "Feature",
            "geometry": {"type": "LineString",
                         "coordinates": [xy[u].tolist(), xy[v].tolist()]},
            "properties": {"kind": "cut-edge", "u": u, "v": v, "stroke": "#d62728"},
        })
    for side, want in ((0, 1), (1, 0)):
        pts = [xy[v].tolist() for v in range(g.n) if source_side[v] == want]
        features.append({
            "type": "Feature",
            "geometry": {"type": "MultiPoint", "coordinates": pts},
            "properties": {"kind": "side", "side": side, "marker-color": SIDE_COLORS[side],
                           "nodes": len(pts)},
        })
    return {"type": "FeatureCollection", "features": features}


def write_geojson(path: str | Path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, separators=(",", ":"))
        fh.write("\n")


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_pareto(cuts: Sequence[Cut], path: str | Path, title: str = "") -> None:
    """Cut size against achieved imbalance for a Pareto cut set."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    if cuts:
        eps = [100 * c.epsilon for c in cuts]
        size = [c.cut_size for c in cuts]
        ax.step(eps, size, where="post", color="#333333", lw=1)
        ax.plot(eps, size, "o", ms=4, color=SIDE_COLORS[0])
        ax.invert_xaxis()
    ax.set_xlabel("achieved imbalance [%]")
    ax.set_ylabel("cut size")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_cut(g: Graph, coords: np.ndarray, source_side: bytes, path: str | Path,
             title: str = "") -> None:
    """Nodes colored by side, cut edges drawn on top."""
    plt = _pyplot()
    from matplotlib.collections import LineCollection

    xy = _lonlat(coords)
    mask = np.frombuffer(source_side, dtype=np.uint8).astype(bool)
    fig, ax = plt.subplots(figsize=(6, 6))
    segs = [(xy[u], xy[v]) for u, v in g.edges()]
    if segs:
        ax.add_collection(LineCollection(segs, colors="#cccccc", linewidths=0.4))
    ax.scatter(xy[mask, 0], xy[mask, 1], s=2, c=SIDE_COLORS[0], label="source side")
    ax.scatter(xy[~mask, 0], xy[~mask, 1], s=2, c=SIDE_COLORS[1], label="target side")
    cut = [(xy[u], xy[v]) for u, v in cut_edges(g, source_side)]
    if cut:
        ax.add_collection(LineCollection(cut, colors="#d62728", linewidths=1.5))
    ax.set_aspect("equal", adjustable="datalim")
    ax.autoscale_view()
    ax.legend(loc="best", fontsize=8, markerscale=4)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
