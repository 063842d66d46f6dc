"""Balanced road network cuts, nested dissection orders and CCH queries."""

__version__ = "0.1.0"

from .cch import (CCH, INF, Metric, OrderMetrics, build_cch, compute_order_metrics,
                  customize_basic, dijkstra, query_elim_tree, query_upward_bidijkstra)
from .cutter import Cut, CutterConfig, CutterState, filter_pareto, init_cutter, is_balanced
from .flow import FlowNetwork, build_edge_cut_network, build_separator_network
from .graph import (Graph, ParseError, load_coordinates, load_dimacs_graph, load_dimacs_metric,
                    preorder_relabel)
from .nd import ContractionOrder, NDConfig, nested_dissection_order, read_order, write_order
from .scheduler import run_interleaved

__all__ = [
    "CCH", "INF", "Metric", "OrderMetrics", "build_cch", "compute_order_metrics",
    "customize_basic", "dijkstra", "query_elim_tree", "query_upward_bidijkstra",
    "Cut", "CutterConfig", "CutterState", "filter_pareto", "init_cutter", "is_balanced",
    "FlowNetwork", "build_edge_cut_network", "build_separator_network",
    "Graph", "ParseError", "load_coordinates", "load_dimacs_graph", "load_dimacs_metric",
    "preorder_relabel", "ContractionOrder", "NDConfig", "nested_dissection_order",
    "read_order", "write_order", "run_interleaved",
]
