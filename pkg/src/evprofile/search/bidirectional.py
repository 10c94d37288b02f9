"""Bidirectional energy-profile A*, interleaved and two-threaded."""

from __future__ import annotations

import math
import threading
import time
from heapq import heappop, heappush
from itertools import count

from ..profile import dominates, dominates_ordered, join_fw_bw
from ._core import F_TOL, SearchError, SearchNode, SearchResult, SearchStats, SearchTrace
from .profile_search import expand_backward, expand_forward, is_dominated


def _join(x, z, e_max):
    """Joined solution node from an expanded node and an opposite-direction node at its state."""
    fw, bw = (x, z) if x.direction == "forward" else (z, x)
    p = join_fw_bw(fw.profile, bw.profile, e_max)
    if p is None:
        return None
    return SearchNode(x.state, p.e_min, p.g_min, p.g_max, p.g_min, parent=fw, partner=bw,
                      direction=x.direction, joined=True)


def pr_bastar(g, h_fw, h_bw, start: int, goal: int, e_max: float, *, upper_bound: bool = True,
              dominance=dominates_ordered, trace: SearchTrace | None = None) -> SearchResult:
    """Interleaved bidirectional profile search returning joined solution nodes.

    The node with the smaller f across both queues is taken next (alternating
    on exact ties). Expanded nodes are joined with every node already
    expanded at the same state by the other direction; joined nodes go back
    into the queue of the creating direction with ``f = g``.
    """
    t0 = time.perf_counter()
    stats = SearchStats()
    seq = count()
    X = {"forward": {}, "backward": {}}
    heaps = {"forward": [], "backward": []}
    fw_root = SearchNode(start, 0.0, 0.0, 0.0, h_fw(start), direction="forward")
    bw_root = SearchNode(goal, 0.0, 0.0, 0.0, h_bw(goal), direction="backward")
    heappush(heaps["forward"], (fw_root.f, 0.0, next(seq), fw_root))
    heappush(heaps["backward"], (bw_root.f, 0.0, next(seq), bw_root))
    sols: list[SearchNode] = []
    f_bar = math.inf
    prefer_fw = True
    while heaps["forward"] or heaps["backward"]:
        size = len(heaps["forward"]) + len(heaps["backward"])
        if size > stats.peak_open:
            stats.peak_open = size
        hf, hb = heaps["forward"], heaps["backward"]
        if not hb:
            d = "forward"
        elif not hf:
            d = "backward"
        elif hf[0][0] < hb[0][0]:
            d = "forward"
        elif hb[0][0] < hf[0][0]:
            d = "backward"
        else:
            d = "forward" if prefer_fw else "backward"
            prefer_fw = not prefer_fw
        f, _, _, x = heappop(heaps[d])
        stats.extractions += 1
        if upper_bound and f >= f_bar + F_TOL:
            break
        if trace is not None:
            trace.extracted(f)
        if x.joined:
            if not is_dominated(x, sols, dominance):
                f_bar = min(f_bar, max(x.e_min, x.g_max))
                sols.append(x)
            continue
        own = X[d]
        lst = own.get(x.state)
        if is_dominated(x, lst, dominance):
            continue
        if lst is None:
            own[x.state] = [x]
        else:
            lst.append(x)
        stats.expansions += 1
        if d == "forward":
            stats.expansions_fw += 1
            if x.state != goal:
                expand_forward(x, g, h_fw, e_max, own, heaps[d], seq, stats, trace, dominance)
            opposite = X["backward"].get(x.state)
        else:
            stats.expansions_bw += 1
            if x.state != start:
                expand_backward(x, g, h_bw, e_max, own, heaps[d], seq, stats, trace, dominance)
            opposite = X["forward"].get(x.state)
        if opposite:
            for z in opposite:
                y = _join(x, z, e_max)
                if y is not None:
                    heappush(heaps[d], (y.f, y.g, next(seq), y))
    stats.runtime_s = time.perf_counter() - t0
    return SearchResult("pr-ba", e_max, sols, None, stats)


class _Shared:
    def __init__(self):
        self.lock = threading.Lock()
        self.f_bar = math.inf
        self.sols: list[SearchNode] = []

    def offer(self, x: SearchNode) -> None:
        # joined nodes arrive out of global f order, so use full dominance here
        with self.lock:
            for s in self.sols:
                if dominates(s, x):
                    return
            self.sols.append(x)
            self.f_bar = min(self.f_bar, max(x.e_min, x.g_max))


def pr_bastar_par(g, h_fw, h_bw, start: int, goal: int, e_max: float, *, upper_bound: bool = True,
                  dominance=dominates_ordered, trace: SearchTrace | None = None) -> SearchResult:
    """Bidirectional profile search with one thread per direction.

    Each worker owns its queue and expanded sets; the opposite worker only
    reads snapshots of those append-only lists. A worker appends to its own
    set before reading the other side's, so every forward/backward pair at a
    state is joined by at least one of them. ``f_bar`` is shared and only
    ever lowered.
    """
    t0 = time.perf_counter()
    shared = _Shared()
    X = {"forward": {}, "backward": {}}
    heaps = {"forward": [], "backward": []}
    stats_d = {"forward": SearchStats(), "backward": SearchStats()}
    traces = {d: (trace.child() if trace is not None else None) for d in heaps}
    errors: list[BaseException] = []
    seq = count()  # next() on itertools.count is atomic under the GIL

    fw_root = SearchNode(start, 0.0, 0.0, 0.0, h_fw(start), direction="forward")
    bw_root = SearchNode(goal, 0.0, 0.0, 0.0, h_bw(goal), direction="backward")
    heappush(heaps["forward"], (fw_root.f, 0.0, next(seq), fw_root))
    heappush(heaps["backward"], (bw_root.f, 0.0, next(seq), bw_root))

    def worker(d: str):
        try:
            other = "backward" if d == "forward" else "forward"
            heap, own, opp = heaps[d], X[d], X[other]
            st, tr = stats_d[d], traces[d]
            if d == "forward":
                h, terminal, expand = h_fw, goal, expand_forward
            else:
                h, terminal, expand = h_bw, start, expand_backward
            while heap:
                if len(heap) > st.peak_open:
                    st.peak_open = len(heap)
                f, _, _, x = heappop(heap)
                st.extractions += 1
                if upper_bound and f >= shared.f_bar + F_TOL:
                    heappush(heap, (f, x.g, next(seq), x))
                    break
                if tr is not None:
                    tr.extracted(f)
                if x.joined:
                    shared.offer(x)
                    continue
                lst = own.get(x.state)
                if is_dominated(x, lst, dominance):
                    continue
                if lst is None:
                    own[x.state] = [x]
                else:
                    lst.append(x)
                st.expansions += 1
                if x.state != terminal:
                    expand(x, g, h, e_max, own, heap, seq, st, tr, dominance)
                snapshot = opp.get(x.state)
                if snapshot:
                    for z in snapshot[:]:
                        y = _join(x, z, e_max)
                        if y is not None:
                            heappush(heap, (y.f, y.g, next(seq), y))
        except BaseException as exc:  # surfaced to the caller below
            errors.append(exc)

    threads = [threading.Thread(target=worker, args=(d,), name=f"pr-ba-{d}") for d in heaps]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if errors:
        raise SearchError(f"pr-ba-par worker failed: {errors[0]!r}") from errors[0]

    # joint drain: joined candidates still queued below the final bound
    for heap in heaps.values():
        while heap:
            f, _, _, x = heappop(heap)
            if upper_bound and f >= shared.f_bar + F_TOL:
                break
            if x.joined:
                shared.offer(x)

    sols = sorted(shared.sols, key=lambda n: (n.g, n.e_min, n.g_max))
    kept: list[SearchNode] = []
    for s in sols:
        if not any(dominates(k, s) for k in kept):
            kept.append(s)

    stats = SearchStats()
    for d, st in stats_d.items():
        stats.expansions += st.expansions
        stats.generated += st.generated
        stats.extractions += st.extractions
        stats.peak_open += st.peak_open
    stats.expansions_fw = stats_d["forward"].expansions
    stats.expansions_bw = stats_d["backward"].expansions
    if trace is not None:
        for tr in traces.values():
            trace.absorb(tr)
    stats.runtime_s = time.perf_counter() - t0
    return SearchResult("pr-ba-par", e_max, kept, None, stats)
