"""Ground truth for small integer instances.

The main oracle keeps, for every integer initial energy at ``start``, the
highest state of charge reachable at each state. Transitions
``soc -> min(soc - cost, E_max)`` are monotone in ``soc``, so the highest
charge per state is all that matters and a fixpoint over edges is exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .graph import RoadGraph
from .profile import INFEASIBLE, Envelope

MAX_PRODUCT = 10_000_000


class OracleDomainError(ValueError):
    pass


@dataclass
class SocGridResult:
    e_max: int
    costs: list[float]
    final_soc: list[int | None]

    @property
    def grid(self) -> range:
        return range(self.e_max + 1)

    def feasible(self, e: int) -> bool:
        return self.costs[e] < INFEASIBLE

    def monotonicity_violations(self) -> list[int]:
        """Grid points e where feasibility or the slope <= 1 bound breaks vs. e - 1."""
        bad = []
        for e in range(1, self.e_max + 1):
            if self.feasible(e - 1):
                if not self.feasible(e) or self.costs[e] > self.costs[e - 1] + 1:
                    bad.append(e)
        return bad


def _check_integer_instance(g: RoadGraph, e_max) -> int:
    if e_max != int(e_max) or e_max < 0:
        raise OracleDomainError("E_max must be a non-negative integer")
    if not g.has_integer_costs():
        raise OracleDomainError("oracle needs integer edge costs")
    return int(e_max)


def soc_dp_oracle(g: RoadGraph, start: int, goal: int, e_max) -> SocGridResult:
    E = _check_integer_instance(g, e_max)
    n = g.n_states
    if n * (E + 1) > MAX_PRODUCT:
        raise OracleDomainError(f"product graph too large: {n} states x {E + 1} levels")
    grid = np.arange(E + 1, dtype=np.int64)
    soc = np.full((n, E + 1), -1, dtype=np.int64)
    soc[start] = grid
    src, dst = g.src, g.dst
    cost = g.cost.astype(np.int64)[:, None]
    while g.n_edges:
        here = soc[src]
        cand = np.minimum(here - cost, E)
        cand[(here < 0) | (cand < 0)] = -1
        new = soc.copy()
        np.maximum.at(new, dst, cand)
        if np.array_equal(new, soc):
            break
        soc = new
    final = soc[goal]
    costs = [float(e - s) if s >= 0 else INFEASIBLE for e, s in zip(grid.tolist(), final.tolist())]
    return SocGridResult(E, costs, [s if s >= 0 else None for s in final.tolist()])


def exhaustive_small_path_check(g: RoadGraph, start: int, goal: int, e_max, max_hops: int,
                                max_sequences: int = 2_000_000) -> SocGridResult:
    """Enumerate every edge sequence of at most ``max_hops`` edges and simulate the battery.

    Sound but possibly incomplete; branches die once no initial energy can
    continue them.
    """
    E = _check_integer_instance(g, e_max)
    if g.n_states > 12:
        raise OracleDomainError("exhaustive check is limited to 12 states")
    grid = np.arange(E + 1, dtype=np.int64)
    best = np.full(E + 1, -1, dtype=np.int64)
    fwd = g.fwd
    visited = 0
    stack = [(start, grid.copy(), 0)]
    while stack:
        u, soc, hops = stack.pop()
        visited += 1
        if visited > max_sequences:
            raise OracleDomainError(f"more than {max_sequences} edge sequences; lower max_hops")
        if u == goal:
            np.maximum(best, soc, out=best)
        if hops == max_hops:
            continue
        for v, c in fwd[u]:
            nxt = np.minimum(soc - int(c), E)
            nxt[(soc < 0) | (nxt < 0)] = -1
            if (nxt >= 0).any():
                stack.append((v, nxt, hops + 1))
    costs = [float(e - s) if s >= 0 else INFEASIBLE for e, s in zip(grid.tolist(), best.tolist())]
    return SocGridResult(E, costs, [s if s >= 0 else None for s in best.tolist()])


@dataclass
class EnvelopeDiff:
    e_max: int
    n_points: int = 0
    mismatches: list[tuple[int, float, float]] = field(default_factory=list)
    max_abs_diff: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.mismatches

    @property
    def first_mismatch(self) -> int | None:
        return self.mismatches[0][0] if self.mismatches else None

    def to_json(self) -> str:
        def enc(x):
            return None if math.isinf(x) else x

        return json.dumps({
            "e_max": self.e_max,
            "n_points": self.n_points,
            "passed": self.passed,
            "max_abs_diff": enc(self.max_abs_diff),
            "first_mismatch": self.first_mismatch,
            "mismatches": [[e, enc(a), enc(b)] for e, a, b in self.mismatches],
        })

    def to_text(self) -> str:
        if self.passed:
            return f"match at all {self.n_points} grid points"
        lines = [f"{len(self.mismatches)} of {self.n_points} grid points differ "
                 f"(max |diff| {self.max_abs_diff}); first at e_init={self.first_mismatch}"]
        for e, a, b in self.mismatches[:10]:
            lines.append(f"  e_init={e}: oracle {a} vs envelope {b}")
        return "\n".join(lines)


def compare_envelopes(a: SocGridResult, b: Envelope, tol: float = 0.0) -> EnvelopeDiff:
    """Grid-point comparison, infeasible treated as +inf; exact unless ``tol`` is given."""
    if a.e_max != b.e_max:
        raise ValueError(f"E_max differs: {a.e_max} vs {b.e_max}")
    diff = EnvelopeDiff(a.e_max)
    for e in a.grid:
        want = a.costs[e]
        got = b(float(e))
        diff.n_points += 1
        if want == got:
            continue
        d = math.inf if (math.isinf(want) or math.isinf(got)) else abs(want - got)
        if d > tol:
            diff.mismatches.append((e, want, got))
            diff.max_abs_diff = max(diff.max_abs_diff, d)
    return diff


def envelope_from_grid(res: SocGridResult) -> Envelope:
    """Piecewise-linear envelope through the oracle's grid values (for self-checks)."""
    from .profile import Segment

    feas = [e for e in res.grid if res.feasible(e)]
    if not feas:
        return Envelope(float(res.e_max))
    segs: list[Segment] = []
    for e in range(feas[0], res.e_max):
        slope = int(res.costs[e + 1] - res.costs[e])
        if not segs or segs[-1].slope != slope:
            segs.append(Segment(float(e), res.costs[e], slope))
    if not segs:
        segs.append(Segment(float(res.e_max), res.costs[res.e_max], 0))
    return Envelope(float(res.e_max), tuple(segs))
