"""Searches for a known initial energy: energy A* and potential-reweighted Dijkstra."""

from __future__ import annotations

import time
from heapq import heappop, heappush
from itertools import count

from ..heuristic import InconsistentHeuristicError
from ..profile import INFEASIBLE
from ._core import E_TOL, SearchNode, SearchResult, SearchStats, SearchTrace


def _check_e_init(e_init, e_max):
    if not 0.0 <= e_init <= e_max:
        raise ValueError(f"e_init={e_init} outside [0, {e_max}]")


def astar_energy(g, h, start: int, goal: int, e_init: float, e_max: float,
                 trace: SearchTrace | None = None) -> SearchResult:
    """Minimum energy from ``start`` to ``goal`` starting with ``e_init`` Wh.

    Labels are corrected per state (``best``), stale queue entries skipped,
    and recuperation beyond a full battery is discarded by raising ``g`` to
    ``e_init - e_max``.
    """
    _check_e_init(e_init, e_max)
    t0 = time.perf_counter()
    return _energy_search("astar", g, h, start, goal, e_init, e_max, t0, trace, check_reduced=False)


def dijkstra_energy(g, potential, start: int, goal: int, e_init: float, e_max: float,
                    trace: SearchTrace | None = None) -> SearchResult:
    """Same contract as :func:`astar_energy`, ordered by potential-reduced costs.

    Every relaxed edge's reduced cost is checked; a negative one raises
    :class:`InconsistentHeuristicError`.
    """
    _check_e_init(e_init, e_max)
    t0 = time.perf_counter()
    return _energy_search("dijkstra", g, potential, start, goal, e_init, e_max, t0, trace,
                          check_reduced=True)


def _energy_search(name, g, h, start, goal, e_init, e_max, t0, trace, check_reduced):
    stats = SearchStats()
    adj = g.fwd
    seq = count()
    best = {start: 0.0}
    root = SearchNode(start, 0.0, 0.0, 0.0, h(start))
    heap = [(root.f, 0.0, next(seq), root)]
    goal_node = None
    lim = e_init + E_TOL
    while heap:
        stats.peak_open = max(stats.peak_open, len(heap))
        f, gx, _, x = heappop(heap)
        stats.extractions += 1
        u = x.state
        if gx > best[u]:
            continue
        if trace is not None:
            trace.extracted(f)
        stats.expansions += 1
        if u == goal:
            goal_node = x
            break
        hu = h(u)
        for v, c in adj[u]:
            hv = h(v)
            if check_reduced and c + hv - hu < -E_TOL:
                raise InconsistentHeuristicError(f"reduced cost {c + hv - hu} < 0 on edge ({u}, {v})")
            gy = gx + c
            stats.generated += 1
            if gy > lim or gy + hv > lim:
                continue
            if e_init - gy > e_max:
                gy = e_init - e_max
            if gy < best.get(v, INFEASIBLE):
                best[v] = gy
                y = SearchNode(v, 0.0, gy, 0.0, gy + hv, parent=x)
                heappush(heap, (y.f, gy, next(seq), y))
    cost = best.get(goal, INFEASIBLE)
    stats.runtime_s = time.perf_counter() - t0
    return SearchResult(name, e_max, [goal_node] if goal_node is not None else [], cost, stats)
