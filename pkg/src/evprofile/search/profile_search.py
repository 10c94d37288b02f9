"""Unidirectional energy-profile A* (forward and backward)."""

from __future__ import annotations

import math
import time
from heapq import heappop, heappush
from itertools import count

from ..profile import dominates_ordered
from ._core import E_TOL, F_TOL, SearchNode, SearchResult, SearchStats, SearchTrace


def expand_forward(x, g, h, e_max, X, heap, seq, stats, trace, dominance, quick_check=True):
    """Push the successors of ``x`` that survive feasibility and quick dominance checks."""
    lim = e_max + E_TOL
    lo = -e_max
    for v, c in g.fwd[x.state]:
        gy = x.g + c
        if gy < lo:
            gy = lo
        ey = x.e_min if x.e_min > gy else gy
        Gy = x.g_max + c
        if Gy < 0.0:
            Gy = 0.0
        stats.generated += 1
        if trace is not None:
            trace.generated(ey, gy, Gy)
        if ey > lim or Gy > lim:
            continue
        hv = h(v)
        if Gy + hv > lim:
            continue
        y = SearchNode(v, ey, gy, Gy, gy + hv, parent=x, direction="forward")
        if quick_check:
            lst = X.get(v)
            if lst and dominance(lst[-1], y):
                continue
        heappush(heap, (y.f, gy, next(seq), y))


def expand_backward(x, g, h, e_max, X, heap, seq, stats, trace, dominance, quick_check=True):
    """Backward twin of :func:`expand_forward`: prepends predecessor edges."""
    lim = e_max + E_TOL
    lo = -e_max
    for v, c in g.bwd[x.state]:
        gy = x.g + c
        if gy < lo:
            gy = lo
        Gy = x.g_max if x.g_max > gy else gy
        ey = x.e_min + c
        if ey < 0.0:
            ey = 0.0
        stats.generated += 1
        if trace is not None:
            trace.generated(ey, gy, Gy)
        if ey > lim or Gy > lim:
            continue
        hv = h(v)
        if ey + hv > lim:
            continue
        y = SearchNode(v, ey, gy, Gy, gy + hv, parent=x, direction="backward")
        if quick_check:
            lst = X.get(v)
            if lst and dominance(lst[-1], y):
                continue
        heappush(heap, (y.f, gy, next(seq), y))


def is_dominated(x, stored, dominance) -> bool:
    if stored:
        for y in stored:
            if dominance(y, x):
                return True
    return False


def _profile_astar(name, direction, g, h, origin, terminal, e_max, upper_bound, dominance,
                   quick_check, trace):
    t0 = time.perf_counter()
    stats = SearchStats()
    expand = expand_forward if direction == "forward" else expand_backward
    X: dict[int, list[SearchNode]] = {}
    seq = count()
    root = SearchNode(origin, 0.0, 0.0, 0.0, h(origin), direction=direction)
    heap = [(root.f, 0.0, next(seq), root)]
    f_bar = math.inf
    while heap:
        if len(heap) > stats.peak_open:
            stats.peak_open = len(heap)
        f, _, _, x = heappop(heap)
        stats.extractions += 1
        if upper_bound and f >= f_bar + F_TOL:
            break
        if trace is not None:
            trace.extracted(f)
        lst = X.get(x.state)
        if is_dominated(x, lst, dominance):
            continue
        if lst is None:
            X[x.state] = [x]
        else:
            lst.append(x)
        stats.expansions += 1
        if x.state == terminal:
            f_bar = min(f_bar, max(x.e_min, x.g_max))
            continue
        expand(x, g, h, e_max, X, heap, seq, stats, trace, dominance, quick_check)
    stats.runtime_s = time.perf_counter() - t0
    return SearchResult(name, e_max, X.get(terminal, []), None, stats)


def pr_astar_fw(g, h, start: int, goal: int, e_max: float, *, upper_bound: bool = True,
                dominance=dominates_ordered, quick_check: bool = True,
                trace: SearchTrace | None = None) -> SearchResult:
    """Forward profile search; returns the non-dominated goal nodes.

    ``h`` must be consistent toward ``goal``. ``upper_bound=False`` disables
    the early cut on ``max(e_min, g_max)`` of found solutions.
    """
    return _profile_astar("pr-fw", "forward", g, h, start, goal, e_max, upper_bound, dominance,
                          quick_check, trace)


def pr_astar_bw(g, h_bw, start: int, goal: int, e_max: float, *, upper_bound: bool = True,
                dominance=dominates_ordered, quick_check: bool = True,
                trace: SearchTrace | None = None) -> SearchResult:
    """Backward profile search from ``goal`` over predecessors; returns start nodes.

    ``h_bw`` estimates the cost from ``start`` to each state.
    """
    return _profile_astar("pr-bw", "backward", g, h_bw, goal, start, e_max, upper_bound, dominance,
                          quick_check, trace)
