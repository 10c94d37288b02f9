"""Consistent energy heuristics: air-line distance term plus a height potential."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import EARTH_RADIUS_M, EnergyModelParams, RoadGraph, haversine

__all__ = [
    "haversine", "HeuristicConfig", "Heuristic", "ConsistencyReport", "InconsistentHeuristicError",
    "heuristic_coefficients", "lambda_bound", "calibrate_lambda", "make_heuristic", "h_value",
    "check_consistency", "reduced_cost", "edge_distances",
]

VARIANTS = ("potential", "dynamics", "zero")


class InconsistentHeuristicError(ValueError):
    pass


@dataclass(frozen=True)
class HeuristicConfig:
    """``h(u) = lam * efficiency * dist(u, target)/100 + potential_coef * dH``.

    ``efficiency`` is in Wh/100m and ``potential_coef`` in Wh per meter of
    height. ``dH`` is ``H(target) - H(u)`` for forward search (cost still to
    go) and ``H(u) - H(target)`` for backward search, where ``target`` is then
    the start state.
    """

    variant: str
    lam: float
    efficiency: float
    potential_coef: float
    target: int
    direction: str = "forward"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown heuristic variant {self.variant!r}")
        if self.direction not in ("forward", "backward"):
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")


def heuristic_coefficients(variant: str, model: EnergyModelParams | None,
                           patterns: Sequence[tuple[Sequence[float], Sequence[float]]] | None = None
                           ) -> tuple[float, float]:
    """(efficiency Wh/100m, potential Wh/m) for a heuristic family."""
    if variant == "zero":
        return 0.0, 0.0
    if model is None:
        raise ValueError(f"{variant} heuristic needs energy-model parameters")
    if variant == "potential":
        return model.avg_efficiency, model.total_mass * model.gravity / 3600.0
    if variant == "dynamics":
        pats = list(patterns) if patterns else [(model.alpha, model.beta)]
        m = model.extra_mass
        a1 = sum(p[0][1] for p in pats) / len(pats)
        b1 = sum(p[1][1] for p in pats) / len(pats)
        a0 = min(p[0][2] for p in pats)
        b0 = min(p[1][2] for p in pats)
        # s * l = dH / 100 when l is in 100 m units
        return m * a0 + b0, (m * a1 + b1) / 100.0
    raise ValueError(f"unknown heuristic variant {variant!r}")


def edge_distances(g: RoadGraph) -> np.ndarray:
    """Per-edge distance used in the lambda bound: max(edge length, air-line distance)."""
    lat = np.radians(g.coords[:, 0])
    lon = np.radians(g.coords[:, 1])
    air = _hav_vec(lat[g.src], lon[g.src], lat[g.dst], lon[g.dst])
    return np.maximum(g.length, air)


def _hav_vec(lat1, lon1, lat2, lon2):
    a = np.sin((lat2 - lat1) / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2) ** 2
    return 2 * EARTH_RADIUS_M * np.arcsin(np.minimum(1.0, np.sqrt(a)))


def lambda_bound(g: RoadGraph, efficiency: float, potential_coef: float) -> tuple[float, int | None]:
    """Largest lambda keeping the heuristic consistent, and the edge that binds it.

    The distance bound is direction-independent, so one scan serves both the
    forward and the backward heuristic.
    """
    if g.n_edges == 0 or efficiency <= 0:
        return 0.0, None
    red = g.cost - potential_coef * (g.heights[g.dst] - g.heights[g.src])
    denom = efficiency * edge_distances(g) / 100.0
    ok = denom > 0
    if not ok.any():
        return 0.0, None
    ratio = np.full(g.n_edges, np.inf)
    ratio[ok] = red[ok] / denom[ok]
    i = int(np.argmin(ratio))
    if ratio[i] < 0:
        return 0.0, i
    return float(ratio[i]), i


def calibrate_lambda(g: RoadGraph, variant: str, model: EnergyModelParams | None = None,
                     patterns=None) -> float:
    if variant == "zero":
        return 0.0
    model = model if model is not None else g.model
    eff, coef = heuristic_coefficients(variant, model, patterns)
    return lambda_bound(g, eff, coef)[0]


class Heuristic:
    """Per-state heuristic values for one target and direction, precomputed once."""

    def __init__(self, g: RoadGraph, cfg: HeuristicConfig):
        self.cfg = cfg
        self.target = cfg.target
        self.direction = cfg.direction
        n = g.n_states
        if n == 0:
            self.values = []
            return
        lat = np.radians(g.coords[:, 0])
        lon = np.radians(g.coords[:, 1])
        t = cfg.target
        dist = _hav_vec(lat, lon, lat[t], lon[t])
        dist[t] = 0.0
        dh = g.heights[t] - g.heights
        if cfg.direction == "backward":
            dh = -dh
        vals = cfg.lam * cfg.efficiency * dist / 100.0 + cfg.potential_coef * dh
        vals[t] = 0.0
        self.values = vals.tolist()

    def __call__(self, u: int) -> float:
        return self.values[u]

    def __repr__(self):
        return f"Heuristic({self.cfg})"


def make_heuristic(g: RoadGraph, target: int, direction: str = "forward", variant: str = "potential",
                   lam: float | None = None, model: EnergyModelParams | None = None,
                   patterns=None) -> Heuristic:
    """Build a heuristic toward ``target`` (forward) or from it (backward).

    ``lam=None`` calibrates the distance scaling on ``g``.
    """
    model = model if model is not None else g.model
    eff, coef = heuristic_coefficients(variant, model, patterns)
    if lam is None:
        lam = lambda_bound(g, eff, coef)[0] if variant != "zero" else 0.0
    return Heuristic(g, HeuristicConfig(variant, lam, eff, coef, target, direction))


def h_value(cfg: HeuristicConfig, g: RoadGraph, u: int) -> float:
    """Single heuristic value, computed directly from the config."""
    if u == cfg.target:
        return 0.0
    d = haversine(g.coord(u), g.coord(cfg.target))
    dh = float(g.heights[cfg.target] - g.heights[u])
    if cfg.direction == "backward":
        dh = -dh
    return cfg.lam * cfg.efficiency * d / 100.0 + cfg.potential_coef * dh


@dataclass
class ConsistencyReport:
    violations: list[tuple[int, int, int, float]] = field(default_factory=list)
    max_excess: float = 0.0
    anchor_ok: bool = True
    tol: float = 1e-6

    @property
    def consistent(self) -> bool:
        return self.anchor_ok and self.max_excess <= self.tol


def check_consistency(g: RoadGraph, h: Heuristic, tol: float = 1e-6) -> ConsistencyReport:
    """Excess ``h(tail) - h(head) - cost`` per edge in the heuristic's search direction."""
    vals = np.asarray(h.values, dtype=float)
    if h.direction == "forward":
        excess = vals[g.src] - vals[g.dst] - g.cost
    else:
        excess = vals[g.dst] - vals[g.src] - g.cost
    rep = ConsistencyReport(tol=tol)
    rep.anchor_ok = g.n_states == 0 or vals[h.target] == 0.0
    if g.n_edges:
        rep.max_excess = float(max(0.0, excess.max()))
        for i in np.flatnonzero(excess > tol):
            rep.violations.append((int(i), int(g.src[i]), int(g.dst[i]), float(excess[i])))
    return rep


def reduced_cost(h: Heuristic, u: int, v: int, cost: float, tol: float = 1e-6) -> float:
    """Johnson-style reduced cost ``cost + h(v) - h(u)`` of a forward edge (u, v)."""
    r = cost + h(v) - h(u)
    if r < -tol:
        raise InconsistentHeuristicError(f"reduced cost {r} < 0 on edge ({u}, {v})")
    return r
