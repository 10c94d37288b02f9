from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..profile import EnergyProfile, Envelope, INFEASIBLE, lower_envelope

# slack on feasibility pruning (Wh) and on the upper-bound cut
E_TOL = 1e-6
F_TOL = 1e-9


class SearchError(RuntimeError):
    pass


class SearchNode:
    __slots__ = ("state", "e_min", "g", "g_max", "f", "parent", "partner", "direction", "joined")

    def __init__(self, state, e_min, g, g_max, f, parent=None, direction="forward",
                 joined=False, partner=None):
        self.state = state
        self.e_min = e_min
        self.g = g
        self.g_max = g_max
        self.f = f
        self.parent = parent
        # joined nodes: parent is the forward half, partner the backward half
        self.partner = partner
        self.direction = direction
        self.joined = joined

    @property
    def g_min(self) -> float:
        return self.g

    @property
    def profile(self) -> EnergyProfile:
        return EnergyProfile(self.e_min, self.g, self.g_max)

    def __repr__(self):
        tag = "joined" if self.joined else self.direction
        return f"SearchNode(s={self.state}, {tuple(self.profile)}, f={self.f:.6g}, {tag})"


@dataclass
class SearchStats:
    expansions: int = 0
    generated: int = 0
    extractions: int = 0
    peak_open: int = 0
    runtime_s: float = 0.0
    expansions_fw: int = 0
    expansions_bw: int = 0

    @property
    def runtime_us(self) -> float:
        return self.runtime_s * 1e6


@dataclass
class SearchResult:
    algorithm: str
    e_max: float
    solutions: list[SearchNode] = field(default_factory=list)
    cost: float | None = None
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def feasible(self) -> bool:
        if self.cost is not None:
            return self.cost < INFEASIBLE
        return bool(self.solutions)

    def profiles(self) -> list[EnergyProfile]:
        return [n.profile for n in self.solutions]

    def envelope(self) -> Envelope:
        return lower_envelope(self.profiles(), self.e_max)

    def best(self, e_init: float) -> SearchNode | None:
        """Solution node with the lowest cost at ``e_init``."""
        from ..profile import evaluate

        best, best_v = None, INFEASIBLE
        for n in self.solutions:
            v = evaluate(n.profile, e_init, self.e_max)
            if v < best_v:
                best, best_v = n, v
        return best


class SearchTrace:
    """Optional hook recording extraction order and generated-profile invariants."""

    def __init__(self, e_max: float, keep_f: bool = False):
        self.e_max = e_max
        self.keep_f = keep_f
        self.f_values: list[float] = []
        self.f_violations = 0
        self.max_f_drop = 0.0
        self.n_extracted = 0
        self.n_generated = 0
        self.profile_violations: list[tuple[EnergyProfile, list[str]]] = []
        self.forward_g_le_emin_violations = 0
        self._last_f = -math.inf

    def extracted(self, f: float) -> None:
        self.n_extracted += 1
        if self.keep_f:
            self.f_values.append(f)
        drop = self._last_f - f
        if drop > 1e-9:
            self.f_violations += 1
        if drop > self.max_f_drop:
            self.max_f_drop = drop
        if f > self._last_f:
            self._last_f = f

    def generated(self, e_min: float, g: float, g_max: float) -> None:
        self.n_generated += 1
        p = EnergyProfile(e_min, g, g_max)
        bad = p.invariant_violations(self.e_max)
        if bad:
            self.profile_violations.append((p, bad))
        if g > e_min:
            self.forward_g_le_emin_violations += 1

    def child(self) -> "SearchTrace":
        return SearchTrace(self.e_max, self.keep_f)

    def absorb(self, other: "SearchTrace") -> None:
        self.f_values.extend(other.f_values)
        self.f_violations += other.f_violations
        self.max_f_drop = max(self.max_f_drop, other.max_f_drop)
        self.n_extracted += other.n_extracted
        self.n_generated += other.n_generated
        self.profile_violations.extend(other.profile_violations)
        self.forward_g_le_emin_violations += other.forward_g_le_emin_violations


def reconstruct_path(node: SearchNode) -> list[int]:
    """State sequence start -> goal for a solution node of any search."""
    if node.joined:
        head = _chain(node.parent)
        tail = _chain(node.partner)
        head.reverse()
        return head + tail[1:]
    states = _chain(node)
    if node.direction == "forward":
        states.reverse()
    return states


def _chain(node: SearchNode) -> list[int]:
    out = []
    seen = set()
    while node is not None:
        if id(node) in seen:
            raise SearchError("cyclic parent chain")
        seen.add(id(node))
        out.append(node.state)
        node = node.parent
    return out
