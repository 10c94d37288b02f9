"""Two-breakpoint energy profiles.

A profile ``(e_min, g_min, g_max)`` describes the cost of a path as a function
of the initial energy ``e``: infeasible below ``e_min``, otherwise
``max(g_min, e - E_max + g_max)``. Equivalently the energy left at the end of
the path is ``min(e - g_min, E_max - g_max)``, which is what all linking rules
below are derived from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

INFEASIBLE = math.inf


class EnergyProfile(NamedTuple):
    e_min: float
    g_min: float
    g_max: float

    def is_feasible(self, e_max: float, tol: float = 0.0) -> bool:
        return self.e_min <= e_max + tol and self.g_max <= e_max + tol

    def invariant_violations(self, e_max: float, tol: float = 0.0) -> list[str]:
        out = []
        if self.g_max < self.g_min - tol:
            out.append("g_max < g_min")
        if self.e_min < self.g_min - tol:
            out.append("e_min < g_min")
        if self.g_min < -e_max - tol:
            out.append("g_min < -E_max")
        if self.g_max < -tol:
            out.append("g_max < 0")
        if self.e_min < -tol:
            out.append("e_min < 0")
        return out

    def to_json(self) -> dict:
        return {"e_min": self.e_min, "g_min": self.g_min, "g_max": self.g_max}


ZERO = EnergyProfile(0.0, 0.0, 0.0)
# absorbing under linking: inf + c stays inf
UNREACHABLE = EnergyProfile(INFEASIBLE, INFEASIBLE, INFEASIBLE)


def link_forward(p: EnergyProfile, edge_cost: float, e_max: float) -> EnergyProfile:
    """Append an edge to the end of the path ``p``."""
    g = max(p.g_min + edge_cost, -e_max)
    return EnergyProfile(max(p.e_min, g), g, max(0.0, p.g_max + edge_cost))


def link_backward(p: EnergyProfile, edge_cost: float, e_max: float) -> EnergyProfile:
    """Prepend an edge to the front of the path ``p``."""
    g = max(p.g_min + edge_cost, -e_max)
    return EnergyProfile(max(0.0, p.e_min + edge_cost), g, max(p.g_max, g))


def evaluate(p: EnergyProfile, e_init: float, e_max: float) -> float:
    """Cost of the path when starting with ``e_init``.

    ``INFEASIBLE`` below ``e_min``, and everywhere if ``g_max > E_max`` (not
    even a full battery gets through).
    """
    if not 0.0 <= e_init <= e_max:
        raise ValueError(f"e_init={e_init} outside [0, {e_max}]")
    if e_init < p.e_min or p.g_max > e_max:
        return INFEASIBLE
    return max(p.g_min, e_init - e_max + p.g_max)


def transition_point(p: EnergyProfile, e_max: float) -> float:
    return e_max - p.g_max + p.g_min


def dominates(x: EnergyProfile, y: EnergyProfile) -> bool:
    """True if ``x`` is no worse than ``y`` in all three breakpoints (ties dominate)."""
    return x.e_min <= y.e_min and x.g_min <= y.g_min and x.g_max <= y.g_max


def dominates_ordered(x: EnergyProfile, y: EnergyProfile) -> bool:
    """Dominance when ``g_min(x) <= g_min(y)`` is already known from extraction order."""
    return x.e_min <= y.e_min and x.g_max <= y.g_max


def join_fw_bw(fw: EnergyProfile, bw: EnergyProfile, e_max: float) -> EnergyProfile | None:
    """Profile of a start->v path ``fw`` followed by a v->goal path ``bw``.

    Energy at v is ``min(e - g_fw, E_max - G_fw)`` and must reach ``e_min_bw``,
    so the concatenation needs ``e >= g_fw + e_min_bw`` and is infeasible
    outright when ``G_fw + e_min_bw > E_max``. Returns None when infeasible.
    """
    if fw.g_max + bw.e_min > e_max or not fw.is_feasible(e_max) or not bw.is_feasible(e_max):
        return None
    g = max(fw.g_min + bw.g_min, -e_max)
    e_min = max(fw.e_min, fw.g_min + bw.e_min, g)
    g_max = max(fw.g_max + bw.g_min, bw.g_max, g)
    return EnergyProfile(e_min, g, g_max)


def link_path(costs: Iterable[float], e_max: float, backward: bool = False) -> EnergyProfile:
    """Profile of an explicit edge-cost sequence, linked in either direction.

    A partial path that is infeasible even from a full battery makes the whole
    sequence infeasible, which later edges can hide in the three numbers, so
    the result is :data:`UNREACHABLE` as soon as that happens.
    """
    costs = list(costs)
    p = ZERO
    link = link_backward if backward else link_forward
    for c in (reversed(costs) if backward else costs):
        p = link(p, c, e_max)
        if not p.is_feasible(e_max):
            return UNREACHABLE
    return p


def simulate_soc(costs: Sequence[float], e_init: float, e_max: float) -> float:
    """Step the battery along ``costs``; returns the cost ``e_init - SoC_final`` or INFEASIBLE."""
    soc = e_init
    for c in costs:
        if soc - c < 0:
            return INFEASIBLE
        soc = min(soc - c, e_max)
    return e_init - soc


# -- lower envelopes ----------------------------------------------------------

class Segment(NamedTuple):
    e_from: float
    cost: float
    slope: int


@dataclass(frozen=True)
class Envelope:
    """Pointwise minimum of profiles over ``[feasible_from, e_max]``.

    Each segment runs from its ``e_from`` to the next segment's ``e_from``
    (the last one to ``e_max``) with slope 0 or 1. Below the first segment
    every profile is infeasible; no segments means infeasible everywhere.
    """

    e_max: float
    segments: tuple[Segment, ...] = ()

    @property
    def feasible_from(self) -> float | None:
        return self.segments[0].e_from if self.segments else None

    def __call__(self, e_init: float) -> float:
        if not 0.0 <= e_init <= self.e_max:
            raise ValueError(f"e_init={e_init} outside [0, {self.e_max}]")
        if not self.segments or e_init < self.segments[0].e_from:
            return INFEASIBLE
        seg = self.segments[0]
        for s in self.segments[1:]:
            if s.e_from > e_init:
                break
            seg = s
        return seg.cost + seg.slope * (e_init - seg.e_from)

    def to_json(self) -> dict:
        return {
            "e_max": self.e_max,
            "feasible_from": self.feasible_from,
            "segments": [{"e_from": s.e_from, "cost": s.cost, "slope": s.slope}
                         for s in self.segments],
        }

    def describe(self) -> str:
        if not self.segments:
            return "infeasible everywhere"
        parts = []
        if self.segments[0].e_from > 0:
            parts.append(f"infeasible <{_num(self.segments[0].e_from)}")
        for i, s in enumerate(self.segments):
            end = self.segments[i + 1].e_from if i + 1 < len(self.segments) else self.e_max
            if s.slope == 0:
                parts.append(f"{_num(s.cost)} on [{_num(s.e_from)},{_num(end)}]")
            else:
                hi = s.cost + (end - s.e_from)
                parts.append(f"rising to {_num(hi)} at {_num(end)}")
        return "; ".join(parts)


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else f"{x:.6g}"


def lower_envelope(profiles: Iterable[EnergyProfile], e_max: float) -> Envelope:
    ps = sorted({p for p in profiles if p.is_feasible(e_max)}, key=lambda p: (p.g_min, p.e_min, p.g_max))
    if not ps:
        return Envelope(e_max)

    # Between consecutive candidates the minimum is a single linear piece:
    # feasibility edges, flat->slope transitions and flat/slope crossings.
    cand = {0.0, float(e_max)}
    for p in ps:
        cand.add(float(p.e_min))
        cand.add(float(transition_point(p, e_max)))
        for q in ps:
            cand.add(float(q.g_min + e_max - p.g_max))
    pts = sorted(c for c in cand if 0.0 <= c <= e_max)

    raw: list[Segment] = []
    for a, b in zip(pts, pts[1:]):
        mid = 0.5 * (a + b)
        best, best_val = None, INFEASIBLE
        for p in ps:
            v = evaluate(p, mid, e_max)
            if v < best_val:
                best, best_val = p, v
        if best is None:
            continue
        if mid - e_max + best.g_max > best.g_min:
            raw.append(Segment(a, a - e_max + best.g_max, 1))
        else:
            raw.append(Segment(a, best.g_min, 0))
    # A profile with e_min == e_max is active only at that single point, which
    # no interval midpoint sees. Elsewhere, profiles feasible from a breakpoint
    # also win on the interval to its right.
    v_end = min(evaluate(p, e_max, e_max) for p in ps)
    if not raw:
        return Envelope(e_max, (Segment(float(e_max), v_end, 0),))
    last = raw[-1]
    if v_end < last.cost + last.slope * (e_max - last.e_from) - 1e-12:
        raw.append(Segment(float(e_max), v_end, 0))

    merged = [raw[0]]
    for s in raw[1:]:
        prev = merged[-1]
        expected = prev.cost + prev.slope * (s.e_from - prev.e_from)
        if s.slope == prev.slope and math.isclose(s.cost, expected, abs_tol=1e-9):
            continue
        merged.append(s)
    return Envelope(e_max, tuple(merged))
