"""``roadcut`` command line: cut experiments, orders, CCH benchmarks, GeoJSON export.

Exit status is 0 on success, 1 on usage errors and 2 on data errors.
Reports go to standard output as CSV with a fixed column order; times are
milliseconds with three decimals. Runs with ``--threads`` above 1 are not
deterministic.
"""

from __future__ import annotations

import argparse
import csv
import random
import statistics
import sys
import time
from typing import Sequence

from . import __version__
from .cch import (build_cch, compute_order_metrics, customize_basic, dijkstra,
                  query_elim_tree)
from .cutter import INERTIALFLOW, MODES, CutterConfig
from .flow import build_edge_cut_network
from .graph import (ParseError, load_coordinates, load_dimacs_graph, load_dimacs_metric,
                    preorder_relabel)
from .nd import NDConfig, NDStats, nested_dissection_order, read_order, write_order
from .report import (BENCH_COLUMNS, CUT_COLUMNS, cut_geojson, cut_rows, plot_cut,
                     plot_pareto, write_geojson)
from .scheduler import run_interleaved

DEFAULT_EPSILONS = (0.0, 0.01, 0.03, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9)
VERIFY_PAIRS = 1000
CUSTOMIZATION_RUNS = 9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _cutter_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--graph", required=True, help="DIMACS .gr file")
    p.add_argument("--coords", help="DIMACS .co file (required for inertial modes)")
    p.add_argument("--mode", choices=MODES, default="inertialflowcutter")
    p.add_argument("--cutters", type=int, default=8, help="number of cutters q (default 8)")
    p.add_argument("--alpha", type=float, default=None,
                   help="initial terminal fraction (default 0.05, 0.2 for inertialflow)")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--gamma-a", type=float, default=0.4)
    p.add_argument("--gamma-o", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--no-times", action="store_true",
                   help="leave time columns empty so reports are byte-stable")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _cutter_flags()
    parser = _Parser(prog="roadcut", description=__doc__.splitlines()[0].replace("``", ""))
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("cut", parents=[common], help="top-level cut experiment")
    p.add_argument("--epsilon", type=float, action="append",
                   help="maximum imbalance, repeatable (default 0 .. 0.9)")
    p.add_argument("--figure", help="write a Pareto plot (PNG/PDF/SVG)")
    p.add_argument("--cut-figure", help="map of the cut for the largest requested epsilon")

    p = sub.add_parser("order", parents=[common], help="nested dissection order")
    p.add_argument("--order", required=True, help="output order file")

    p = sub.add_parser("cch-bench", parents=[common], help="CCH metrics and timings")
    p.add_argument("--order", help="order file (computed when omitted)")
    p.add_argument("--metric", help="DIMACS .gr file with the arc lengths (default --graph)")
    p.add_argument("--queries", type=int, default=1000)
    p.add_argument("--verify", action="store_true",
                   help=f"check {VERIFY_PAIRS} random queries against Dijkstra")

    p = sub.add_parser("export-geojson", parents=[common], help="write a cut as GeoJSON")
    p.add_argument("--epsilon", type=float, action="append",
                   help="maximum imbalance of the exported cut (default 0.1)")
    p.add_argument("--out", required=True, help="output .geojson file")
    p.add_argument("--figure", help="also draw the cut on a map")
    return parser


def cutter_config(args) -> CutterConfig:
    alpha = args.alpha
    if alpha is None:
        alpha = 0.2 if args.mode == INERTIALFLOW else 0.05
    cfg = CutterConfig(args.mode, alpha, args.delta, args.gamma_a, args.gamma_o)
    try:
        cfg.validate()
    except ValueError as e:
        raise UsageError(str(e)) from None
    if args.cutters < 1:
        raise UsageError("--cutters must be at least 1")
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    if cfg.inertial and not args.coords:
        raise UsageError(f"mode {cfg.mode} needs --coords")
    return cfg


def _load(args):
    g = load_dimacs_graph(args.graph)
    coords = load_coordinates(args.coords, g.n) if args.coords else None
    return g, coords


def _writer(out):
    return csv.writer(out, lineterminator="\n")


def _ms(seconds: float) -> str:
    return f"{seconds * 1e3:.3f}"


def _warn_threads(args, err) -> None:
    if args.threads > 1:
        print("note: runs with more than one thread are not deterministic", file=err)


def _top_level_cuts(args, cfg, eps_list):
    g, coords = _load(args)
    if g.n < 2:
        raise ValueError("graph needs at least two nodes to cut")
    g2, perm = preorder_relabel(g, args.seed)
    coords2 = coords[perm] if coords is not None else None
    net = build_edge_cut_network(g2)
    res = run_interleaved(net, args.cutters, cfg, eps_target=min(eps_list), policy="pareto",
                          coords=coords2, seed=args.seed, threads=args.threads)
    return g, coords, g2, perm, res


def cmd_cut(args, out, err) -> int:
    cfg = cutter_config(args)
    eps_list = args.epsilon or list(DEFAULT_EPSILONS)
    if any(e < 0 for e in eps_list):
        raise UsageError("--epsilon must be non-negative")
    _warn_threads(args, err)
    g, coords, g2, perm, res = _top_level_cuts(args, cfg, eps_list)
    rows = cut_rows(g2, res.records, eps_list)
    w = _writer(out)
    w.writerow(CUT_COLUMNS)
    for row in rows:
        w.writerow(row.fields(times=not args.no_times))
    if args.figure:
        plot_pareto(res.pareto, args.figure, title=f"{cfg.mode}, q={args.cutters}")
    if args.cut_figure:
        chosen = [r for r in rows if r.record is not None]
        if not chosen:
            raise ValueError("no cut to draw")
        if coords is None:
            raise UsageError("--cut-figure needs --coords")
        side = _to_original(chosen[-1].record.cut.source_side, perm)
        plot_cut(g, coords, side, args.cut_figure)
    return 0


def _to_original(source_side: bytes, perm: Sequence[int]) -> bytes:
    out = bytearray(len(perm))
    for new, old in enumerate(perm):
        out[old] = source_side[new]
    return bytes(out)


def _compute_order(args, cfg, g, coords):
    stats = NDStats()
    t0 = time.perf_counter()
    order = nested_dissection_order(
        g, coords, NDConfig(cutter=cfg, cutters=args.cutters, seed=args.seed,
                            threads=args.threads), stats)
    return order, time.perf_counter() - t0, stats


def cmd_order(args, out, err) -> int:
    cfg = cutter_config(args)
    _warn_threads(args, err)
    g, coords = _load(args)
    order, elapsed, stats = _compute_order(args, cfg, g, coords)
    write_order(args.order, order)
    w = _writer(out)
    w.writerow(("n", "separators", "order_ms"))
    w.writerow((g.n, stats.separators, "" if args.no_times else _ms(elapsed)))
    return 0


def cmd_cch_bench(args, out, err) -> int:
    g = load_dimacs_graph(args.graph)
    if args.queries < 0:
        raise UsageError("--queries must be non-negative")
    order_time = None
    if args.order:
        order = read_order(args.order, g.n)
    else:
        cfg = cutter_config(args)
        _warn_threads(args, err)
        coords = load_coordinates(args.coords, g.n) if args.coords else None
        order, order_time, _ = _compute_order(args, cfg, g, coords)
    weights = load_dimacs_metric(args.metric or args.graph, g)
    cch = build_cch(g, order)
    metrics = compute_order_metrics(cch)

    times = []
    metric = None
    for _ in range(CUSTOMIZATION_RUNS):
        t0 = time.perf_counter()
        metric = customize_basic(cch, weights)
        times.append(time.perf_counter() - t0)
    custom_time = statistics.median(times)

    query_time = None
    if args.queries and g.n:
        rng = random.Random(f"{args.seed}:queries")
        pairs = [(rng.randrange(g.n), rng.randrange(g.n)) for _ in range(args.queries)]
        t0 = time.perf_counter()
        for s, t in pairs:
            query_elim_tree(cch, metric, s, t)
        query_time = (time.perf_counter() - t0) / len(pairs)

    mismatches = None
    if args.verify and g.n:
        rng = random.Random(f"{args.seed}:verify")
        mismatches = 0
        for _ in range(VERIFY_PAIRS):
            s, t = rng.randrange(g.n), rng.randrange(g.n)
            if query_elim_tree(cch, metric, s, t) != dijkstra(g, weights, s, t):
                mismatches += 1
        if mismatches:
            print(f"error: {mismatches} of {VERIFY_PAIRS} queries disagree with Dijkstra",
                  file=err)

    def t(x):
        return "" if x is None or args.no_times else _ms(x)

    w = _writer(out)
    w.writerow(BENCH_COLUMNS)
    w.writerow((
        f"{metrics.avg_search_space_nodes:.2f}",
        metrics.max_search_space_nodes,
        f"{metrics.avg_search_space_arcs / 1e3:.3f}",
        f"{metrics.max_search_space_arcs / 1e3:.3f}",
        f"{metrics.cch_arcs / 1e6:.6f}",
        f"{metrics.triangles / 1e6:.6f}",
        metrics.treewidth_bound,
        t(order_time),
        t(custom_time),
        t(query_time),
        "" if mismatches is None else mismatches,
    ))
    return 0 if not mismatches else 2


def cmd_export_geojson(args, out, err) -> int:
    cfg = cutter_config(args)
    if not args.coords:
        raise UsageError("export-geojson needs --coords")
    eps_list = args.epsilon or [0.1]
    if len(eps_list) != 1:
        raise UsageError("export-geojson takes a single --epsilon")
    _warn_threads(args, err)
    g, coords, g2, perm, res = _top_level_cuts(args, cfg, eps_list)
    row = cut_rows(g2, res.records, eps_list)[0]
    if row.record is None:
        raise ValueError(f"no cut within epsilon {eps_list[0]:g}")
    side = _to_original(row.record.cut.source_side, perm)
    write_geojson(args.out, cut_geojson(g, coords, side))
    if args.figure:
        plot_cut(g, coords, side, args.figure)
    w = _writer(out)
    w.writerow(CUT_COLUMNS)
    w.writerow(row.fields(times=not args.no_times))
    return 0


COMMANDS = {
    "cut": cmd_cut,
    "order": cmd_order,
    "cch-bench": cmd_cch_bench,
    "export-geojson": cmd_export_geojson,
}


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return COMMANDS[args.command](args, out, err)
    except UsageError as e:
        print(f"roadcut: error: {e}", file=err)
        return 1
    except (ParseError, ValueError, OSError) as e:
        print(f"roadcut: error: {e}", file=err)
        return 2


if __name__ == "__main__":
    sys.exit(main())
