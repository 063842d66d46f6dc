"""Flow-interleaved execution of several cutters.

The sequential scheduler always advances the unfinished cutter with the
smallest flow value. The threaded scheduler follows the same rule through
per-cutter ``active``/``acquired`` flags, so work items switch cutters only
when fewer workers than cutters are running.
"""

from __future__ import annotations

import math
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cutter import (
    CUT_FOUND,
    FINISHED,
    Cut,
    CutterConfig,
    CutterState,
    filter_pareto,
    init_cutter,
    is_balanced,
)
from .flow import FlowNetwork

__all__ = [
    "CutRecord",
    "InterleavedResult",
    "cutter_directions",
    "make_cutters",
    "run_interleaved",
    "min_smaller_side",
]

PARETO = "pareto"
EXPANSION = "expansion"


def cutter_directions(q: int) -> list[tuple[float, float]]:
    """Unit directions at angles k*pi/q, k = 0..q-1."""
    return [(math.cos(k * math.pi / q), math.sin(k * math.pi / q)) for k in range(q)]


def min_smaller_side(n: int) -> int:
    """Smallest block a cut may have to be chosen for recursion: 20% of n, rounded up."""
    return -(-n // 5)


@dataclass
class CutRecord:
    cut: Cut
    cutter: int
    elapsed: float  # seconds since the run started


@dataclass
class InterleavedResult:
    records: list[CutRecord]
    best: Cut | None
    trace: list[tuple[int, int, int]] = field(default_factory=list)
    audit_violations: int = 0

    @property
    def cuts(self) -> list[Cut]:
        return [r.cut for r in self.records]

    @property
    def pareto(self) -> list[Cut]:
        return filter_pareto(self.cuts)


def make_cutters(
    net: FlowNetwork,
    q: int,
    config: CutterConfig,
    *,
    coords: np.ndarray | None = None,
    seed: int = 0,
    allow_small: bool = False,
) -> list[CutterState]:
    if q < 1:
        raise ValueError("need at least one cutter")
    if config.inertial:
        return [
            init_cutter(net, config, coords=coords, direction=d, allow_small=allow_small)
            for d in cutter_directions(q)
        ]
    rng = random.Random(seed)
    return [init_cutter(net, config, rng=rng) for _ in range(q)]


def run_interleaved(
    net: FlowNetwork,
    q: int = 8,
    config: CutterConfig | None = None,
    *,
    eps_target: float = 0.0,
    policy: str = PARETO,
    coords: np.ndarray | None = None,
    seed: int = 0,
    threads: int = 1,
    trace: bool = False,
    allow_small: bool = False,
    cutters: list[CutterState] | None = None,
) -> InterleavedResult:
    """Run q cutters interleaved by flow value.

    ``policy="pareto"`` records every cut and stops as soon as any cutter
    reaches ``eps_target`` balance. ``policy="expansion"`` keeps the cut of
    minimum expansion with at least 20% of the nodes on its smaller side and
    retires cutters whose flow already rules out an improvement.
    """
    if policy not in (PARETO, EXPANSION):
        raise ValueError(f"unknown policy {policy!r}")
    if cutters is None:
        cutters = make_cutters(net, q, config or CutterConfig(), coords=coords, seed=seed,
                               allow_small=allow_small)
    if threads > 1 and len(cutters) > 1:
        return _run_parallel(net, cutters, eps_target, policy, threads)
    return _run_sequential(net, cutters, eps_target, policy, trace)


def _run_sequential(net, cutters, eps_target, policy, trace) -> InterleavedResult:
    n = net.graph.n
    half = -(-n // 2)
    floor_side = min_smaller_side(n)
    active = [True] * len(cutters)
    records: list[CutRecord] = []
    steps: list[tuple[int, int, int]] = []
    best: Cut | None = None
    best_exp = math.inf
    start = time.perf_counter()
    while True:
        live = [i for i, on in enumerate(active) if on]
        if not live:
            break
        i = min(live, key=lambda j: (cutters[j].flow_value, j))
        c = cutters[i]
        if policy == EXPANSION and c.flow_value / half >= best_exp:
            active[i] = False
            continue
        if trace:
            steps.append((i, c.flow_value, min(cutters[j].flow_value for j in live)))
        ev = c.advance(eps_target)
        if ev.kind == CUT_FOUND:
            cut = ev.cut
            records.append(CutRecord(cut, i, time.perf_counter() - start))
            if policy == EXPANSION:
                if cut.smaller_side >= floor_side and cut.expansion < best_exp:
                    best, best_exp = cut, cut.expansion
            elif is_balanced(cut.larger_side, n, eps_target):
                if best is None or cut.cut_size < best.cut_size:
                    best = cut
                active = [False] * len(cutters)
        if ev.kind == FINISHED or c.done:
            active[i] = False
    if policy == PARETO and best is None and records:
        best = max((r.cut for r in records), key=lambda c: (c.smaller_side, -c.cut_size))
    return InterleavedResult(records, best, steps)


class _Slot:
    __slots__ = ("cutter", "index", "active", "acquired", "holders")

    def __init__(self, cutter: CutterState, index: int):
        self.cutter = cutter
        self.index = index
        self.active = True
        self.acquired = threading.Lock()
        self.holders = 0


def _run_parallel(net, cutters, eps_target, policy, threads) -> InterleavedResult:
    n = net.graph.n
    half = -(-n // 2)
    floor_side = min_smaller_side(n)
    slots = [_Slot(c, i) for i, c in enumerate(cutters)]
    records: list[CutRecord] = []
    shared = {"best": None, "exp": math.inf, "violations": 0}
    best_lock = threading.Lock()
    audit_lock = threading.Lock()
    start = time.perf_counter()

    def acquire() -> _Slot | None:
        # one sweep over the active cutters by ascending flow
        for s in sorted((s for s in slots if s.active), key=lambda s: (s.cutter.flow_value, s.index)):
            if not s.acquired.acquire(blocking=False):
                continue
            if not s.active:
                s.acquired.release()
                continue
            with audit_lock:
                s.holders += 1
                if s.holders > 1:
                    shared["violations"] += 1
            return s
        return None

    def release(s: _Slot) -> None:
        with audit_lock:
            s.holders -= 1
        s.acquired.release()

    def work_item() -> None:
        while True:
            s = acquire()
            if s is None:
                return
            try:
                c = s.cutter
                if policy == EXPANSION and c.flow_value / half >= shared["exp"]:
                    s.active = False
                    continue
                ev = c.advance(eps_target)
                if ev.kind == CUT_FOUND:
                    cut = ev.cut
                    with best_lock:
                        records.append(CutRecord(cut, s.index, time.perf_counter() - start))
                        if policy == EXPANSION:
                            if cut.smaller_side >= floor_side and cut.expansion < shared["exp"]:
                                shared["best"], shared["exp"] = cut, cut.expansion
                        elif is_balanced(cut.larger_side, n, eps_target):
                            if shared["best"] is None or cut.cut_size < shared["best"].cut_size:
                                shared["best"] = cut
                            for other in slots:
                                other.active = False
                if ev.kind == FINISHED or c.done:
                    s.active = False
            finally:
                release(s)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(work_item) for _ in slots]
        for f in futures:
            f.result()
    best = shared["best"]
    if policy == PARETO and best is None and records:
        best = max((r.cut for r in records), key=lambda c: (c.smaller_side, -c.cut_size))
    return InterleavedResult(records, best, [], shared["violations"])
