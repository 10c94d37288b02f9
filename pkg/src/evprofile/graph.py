"""Road graph storage, DIMACS ingestion, the edge energy model and test-graph generation."""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

EARTH_RADIUS_M = 6_371_000.0
CACHE_FORMAT = "evprofile-graph/1"


class GraphFormatError(ValueError):
    """A malformed line in one of the input files."""

    def __init__(self, path, lineno: int, msg: str):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{self.path}:{lineno}: {msg}")


class GraphConsistencyError(ValueError):
    """Input files disagree with each other (state counts, ids)."""


@dataclass(frozen=True)
class EnergyModelParams:
    """Coefficients of the slope/load edge energy model.

    ``alpha`` couples to the extra mass ``extra_mass`` (Wh per kg per 100 m),
    ``beta`` is the base vehicle term (Wh per 100 m); both are ordered
    (quadratic, linear, constant) in the road slope sin(theta).
    """

    alpha: tuple[float, float, float] = (0.0, 0.3, 0.002)
    beta: tuple[float, float, float] = (0.0, 427.22, 14.0)
    extra_mass: float = 300.0
    total_mass: float = 1900.0
    gravity: float = 9.8
    avg_efficiency: float = 15.0
    battery_capacity: float = 85_000.0

    def __post_init__(self):
        if self.battery_capacity <= 0:
            raise ValueError("battery_capacity must be positive")
        if self.extra_mass < 0 or self.total_mass < 0:
            raise ValueError("masses must be non-negative")
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        if len(self.alpha) != 3 or len(self.beta) != 3:
            raise ValueError("alpha and beta need exactly three coefficients")

    @classmethod
    def from_dict(cls, d: dict) -> "EnergyModelParams":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def compute_edge_energy(model: EnergyModelParams, sin_theta: float, length_100m: float) -> float:
    """Energy in Wh to drive ``length_100m`` (100 m units) at slope ``sin_theta``.

    Negative results are recuperation.
    """
    s = sin_theta
    a2, a1, a0 = model.alpha
    b2, b1, b0 = model.beta
    m = model.extra_mass
    return m * (a2 * s * s + a1 * s + a0) * length_100m + (b2 * s * s + b1 * s + b0) * length_100m


def edge_slope(h_from: float, h_to: float, length_m: float) -> float:
    if length_m <= 0:
        return 0.0
    return min(1.0, max(-1.0, (h_to - h_from) / length_m))


def haversine(coord_u: Sequence[float], coord_v: Sequence[float]) -> float:
    """Great-circle distance in meters between two (lat, lon) pairs in degrees."""
    lat1, lon1 = coord_u
    lat2, lon2 = coord_v
    p1 = math.radians(lat1)
    p2 = math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(a)))


class RoadGraph:
    """Immutable directed graph with per-edge energy costs.

    ``fwd[u]`` lists ``(v, cost)`` for edges leaving ``u`` and ``bwd[v]``
    lists ``(u, cost)`` for edges entering ``v``; both are built from the
    same edge arrays so they are exact reversals of each other.
    """

    def __init__(self, n_states: int, src, dst, cost, length=None, heights=None, coords=None,
                 model: EnergyModelParams | None = None):
        if n_states < 0:
            raise ValueError("n_states must be non-negative")
        self.n_states = int(n_states)
        self.src = _frozen(np.asarray(src, dtype=np.int64))
        self.dst = _frozen(np.asarray(dst, dtype=np.int64))
        self.cost = _frozen(np.asarray(cost, dtype=np.float64))
        m = len(self.src)
        if not (len(self.dst) == len(self.cost) == m):
            raise ValueError("edge arrays differ in length")
        self.length = _frozen(np.zeros(m) if length is None else np.asarray(length, dtype=np.float64))
        self.heights = _frozen(np.zeros(n_states) if heights is None
                               else np.asarray(heights, dtype=np.float64))
        self.coords = _frozen(np.zeros((n_states, 2)) if coords is None
                              else np.asarray(coords, dtype=np.float64).reshape(n_states, 2))
        if m and (self.src.min() < 0 or self.dst.min() < 0
                  or self.src.max() >= n_states or self.dst.max() >= n_states):
            raise ValueError("edge endpoint out of range")
        if len(self.heights) != n_states:
            raise ValueError("heights must have one entry per state")
        self.model = model

        fwd: list[list[tuple[int, float]]] = [[] for _ in range(n_states)]
        bwd: list[list[tuple[int, float]]] = [[] for _ in range(n_states)]
        for u, v, c in zip(self.src.tolist(), self.dst.tolist(), self.cost.tolist()):
            fwd[u].append((v, c))
            bwd[v].append((u, c))
        self.fwd = tuple(tuple(a) for a in fwd)
        self.bwd = tuple(tuple(a) for a in bwd)

    @property
    def n_edges(self) -> int:
        return len(self.src)

    @property
    def e_max(self) -> float | None:
        return None if self.model is None else self.model.battery_capacity

    def edges(self) -> Iterable[tuple[int, int, float]]:
        return zip(self.src.tolist(), self.dst.tolist(), self.cost.tolist())

    def coord(self, u: int) -> tuple[float, float]:
        lat, lon = self.coords[u]
        return float(lat), float(lon)

    def has_integer_costs(self) -> bool:
        return bool(np.all(self.cost == np.round(self.cost)))

    def __repr__(self):
        return f"RoadGraph(n_states={self.n_states}, n_edges={self.n_edges})"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


# -- DIMACS ingestion ---------------------------------------------------------

def _data_lines(path: Path):
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line[0] in "c#":
                continue
            yield lineno, line.split()


def read_gr(path) -> tuple[int, list[tuple[int, int, float]]]:
    """Parse a DIMACS ``.gr`` file into (n_states, [(u, v, length)]) with 0-based ids."""
    path = Path(path)
    n = None
    arcs = []
    for lineno, tok in _data_lines(path):
        if tok[0] == "p":
            if len(tok) != 4 or tok[1] != "sp":
                raise GraphFormatError(path, lineno, "expected 'p sp N M'")
            try:
                n, m_decl = int(tok[2]), int(tok[3])
            except ValueError:
                raise GraphFormatError(path, lineno, "non-integer N or M") from None
        elif tok[0] == "a":
            if n is None:
                raise GraphFormatError(path, lineno, "arc before problem line")
            if len(tok) != 4:
                raise GraphFormatError(path, lineno, "expected 'a u v w'")
            try:
                u, v, w = int(tok[1]), int(tok[2]), float(tok[3])
            except ValueError:
                raise GraphFormatError(path, lineno, "bad arc fields") from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise GraphFormatError(path, lineno, f"arc endpoint outside 1..{n}")
            if w < 0:
                raise GraphFormatError(path, lineno, "negative arc length")
            arcs.append((u - 1, v - 1, w))
        else:
            raise GraphFormatError(path, lineno, f"unknown line type {tok[0]!r}")
    if n is None:
        raise GraphFormatError(path, 0, "missing problem line")
    if len(arcs) != m_decl:
        raise GraphConsistencyError(f"{path}: header declares {m_decl} arcs, found {len(arcs)}")
    return n, arcs


def read_co(path) -> np.ndarray:
    """Parse a DIMACS ``.co`` file into an (N, 2) array of (lat, lon) degrees."""
    path = Path(path)
    n = None
    coords = None
    seen = 0
    for lineno, tok in _data_lines(path):
        if tok[0] == "p":
            # p aux sp co N
            try:
                n = int(tok[-1])
            except ValueError:
                raise GraphFormatError(path, lineno, "bad problem line") from None
            coords = np.full((n, 2), np.nan)
        elif tok[0] == "v":
            if coords is None:
                raise GraphFormatError(path, lineno, "vertex before problem line")
            if len(tok) != 4:
                raise GraphFormatError(path, lineno, "expected 'v id lon lat'")
            try:
                i, lon, lat = int(tok[1]), int(tok[2]), int(tok[3])
            except ValueError:
                raise GraphFormatError(path, lineno, "bad vertex fields") from None
            if not 1 <= i <= n:
                raise GraphFormatError(path, lineno, f"vertex id outside 1..{n}")
            coords[i - 1] = (lat * 1e-6, lon * 1e-6)
            seen += 1
        else:
            raise GraphFormatError(path, lineno, f"unknown line type {tok[0]!r}")
    if coords is None:
        raise GraphFormatError(path, 0, "missing problem line")
    if seen != n:
        raise GraphConsistencyError(f"{path}: header declares {n} vertices, found {seen}")
    return coords


def read_elevation(path, n_states: int) -> np.ndarray:
    """Parse ``id height`` lines (1-based ids as in the ``.co`` file)."""
    path = Path(path)
    heights = np.full(n_states, np.nan)
    count = 0
    for lineno, tok in _data_lines(path):
        if len(tok) != 2:
            raise GraphFormatError(path, lineno, "expected 'id height'")
        try:
            i, h = int(tok[0]), float(tok[1])
        except ValueError:
            raise GraphFormatError(path, lineno, "bad elevation fields") from None
        if not 1 <= i <= n_states:
            raise GraphConsistencyError(f"{path}:{lineno}: id {i} outside 1..{n_states}")
        heights[i - 1] = h
        count += 1
    if count != n_states or np.isnan(heights).any():
        raise GraphConsistencyError(f"{path}: expected {n_states} heights, found {count}")
    return heights


def load_graph(gr_file, co_file, elev_file, model: EnergyModelParams) -> RoadGraph:
    """Build an energy-weighted graph from DIMACS distance/coordinate files plus elevations."""
    for p in (gr_file, co_file, elev_file):
        if not Path(p).exists():
            raise FileNotFoundError(p)
    n, arcs = read_gr(gr_file)
    coords = read_co(co_file)
    if len(coords) != n:
        raise GraphConsistencyError(f"{gr_file} has {n} states but {co_file} has {len(coords)}")
    heights = read_elevation(elev_file, n)
    src = np.fromiter((a[0] for a in arcs), dtype=np.int64, count=len(arcs))
    dst = np.fromiter((a[1] for a in arcs), dtype=np.int64, count=len(arcs))
    length = np.fromiter((a[2] for a in arcs), dtype=np.float64, count=len(arcs))
    cost = edge_costs(model, heights, src, dst, length)
    return RoadGraph(n, src, dst, cost, length, heights, coords, model)


def edge_costs(model: EnergyModelParams, heights, src, dst, length) -> np.ndarray:
    dh = heights[dst] - heights[src]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(length > 0, dh / np.where(length > 0, length, 1.0), 0.0)
    s = np.clip(s, -1.0, 1.0)
    a2, a1, a0 = model.alpha
    b2, b1, b0 = model.beta
    l = length / 100.0
    m = model.extra_mass
    return m * (a2 * s * s + a1 * s + a0) * l + (b2 * s * s + b1 * s + b0) * l


# -- enriched-graph cache -----------------------------------------------------

def save_graph_cache(graph: RoadGraph, path) -> None:
    header = {
        "format": CACHE_FORMAT,
        "n_states": graph.n_states,
        "n_edges": graph.n_edges,
        "e_max": graph.e_max,
        "model_hash": None if graph.model is None else graph.model.digest(),
        "model": None if graph.model is None else graph.model.to_dict(),
    }
    with open(path, "wb") as fh:
        np.savez(fh, header=np.array(json.dumps(header)), src=graph.src, dst=graph.dst,
                 cost=graph.cost, length=graph.length, heights=graph.heights, coords=graph.coords)


def load_graph_cache(path) -> RoadGraph:
    with np.load(path, allow_pickle=False) as z:
        header = json.loads(str(z["header"]))
        if header.get("format") != CACHE_FORMAT:
            raise GraphConsistencyError(f"{path}: not an evprofile graph cache")
        model = None if header["model"] is None else EnergyModelParams.from_dict(header["model"])
        if model is not None and model.digest() != header["model_hash"]:
            raise GraphConsistencyError(f"{path}: model hash mismatch")
        g = RoadGraph(header["n_states"], z["src"], z["dst"], z["cost"], z["length"],
                      z["heights"], z["coords"], model)
    if g.n_edges != header["n_edges"]:
        raise GraphConsistencyError(f"{path}: edge count mismatch")
    return g


# -- synthetic graphs ---------------------------------------------------------

@dataclass(frozen=True)
class GraphGenSpec:
    """Parameters for a random negative-cycle-free graph.

    Edge cost is ``w + H(v) - H(u)`` with ``w >= 0``, so every cycle costs
    the sum of its ``w`` values. ``efficiency`` adds a distance-proportional
    part (Wh per 100 m) to ``w`` so distance heuristics have something to
    bite on; ``strongly_connected`` threads a random Hamiltonian cycle
    through all states first.

    ``layout="grid"`` instead places states on a jittered square grid with
    two-way links between grid neighbours over smooth terrain, which is closer
    to a road network; ``avg_degree`` then only adds random diagonals.
    """

    seed: int
    n_states: int
    avg_degree: float = 2.5
    base_cost_range: tuple[float, float] = (0.0, 20.0)
    height_range: tuple[float, float] = (0.0, 50.0)
    integer_costs: bool = True
    e_max: float = 100.0
    efficiency: float = 0.0
    strongly_connected: bool = False
    box_deg: float = 0.01
    layout: str = "random"

    def __post_init__(self):
        if self.layout not in ("random", "grid"):
            raise ValueError(f"unknown layout {self.layout!r}")
        if self.n_states <= 0:
            raise ValueError("n_states must be positive")
        if self.base_cost_range[0] < 0 or self.base_cost_range[1] < self.base_cost_range[0]:
            raise ValueError("base_cost_range must satisfy 0 <= lo <= hi")
        if self.avg_degree < 0 or self.efficiency < 0 or self.e_max <= 0:
            raise ValueError("avg_degree, efficiency must be >= 0 and e_max > 0")
        if self.integer_costs and self.e_max != int(self.e_max):
            raise ValueError("integer_costs requires an integer e_max")


def synthetic_model(e_max: float, efficiency: float) -> EnergyModelParams:
    """Model whose potential and dynamics terms both equal exactly 1 Wh per meter of climb.

    Generated graphs charge ``H(v) - H(u)`` Wh per edge for height, so this is
    the coefficient set that makes both heuristic families coincide with it.
    """
    eff = efficiency if efficiency > 0 else 1.0
    return EnergyModelParams(alpha=(0.0, 0.0, 0.0), beta=(0.0, 100.0, eff), extra_mass=0.0,
                             total_mass=3600.0, gravity=1.0, avg_efficiency=eff,
                             battery_capacity=e_max)


def generate_test_graph(spec: GraphGenSpec) -> RoadGraph:
    rng = random.Random(spec.seed)
    n = spec.n_states
    h_lo, h_hi = spec.height_range
    w_lo, w_hi = spec.base_cost_range
    if spec.layout == "grid":
        heights, coords, pairs = _grid_layout(spec, rng)
        return _finish_graph(spec, rng, heights, coords, pairs)
    if spec.integer_costs:
        heights = [rng.randint(int(h_lo), int(h_hi)) for _ in range(n)]
    else:
        heights = [rng.uniform(h_lo, h_hi) for _ in range(n)]
    coords = [(rng.uniform(0, spec.box_deg), rng.uniform(0, spec.box_deg)) for _ in range(n)]

    pairs: list[tuple[int, int]] = []
    seen = set()
    if spec.strongly_connected and n > 1:
        perm = list(range(n))
        rng.shuffle(perm)
        for i in range(n):
            e = (perm[i], perm[(i + 1) % n])
            seen.add(e)
            pairs.append(e)
    target = min(int(round(n * spec.avg_degree)), n * (n - 1))
    attempts = 0
    while len(pairs) < target and attempts < 20 * target + 100:
        attempts += 1
        u, v = rng.randrange(n), rng.randrange(n)
        if u == v or (u, v) in seen:
            continue
        seen.add((u, v))
        pairs.append((u, v))
    return _finish_graph(spec, rng, heights, coords, pairs)


def _grid_layout(spec: GraphGenSpec, rng: random.Random):
    n = spec.n_states
    side = math.ceil(math.sqrt(n))
    step = spec.box_deg / side
    h_lo, h_hi = spec.height_range
    # two random sinusoidal ridges give rolling terrain
    k1, k2 = rng.uniform(1, 3), rng.uniform(1, 3)
    ph1, ph2 = rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi)
    coords, heights = [], []
    for i in range(n):
        r, c = divmod(i, side)
        x, y = r / side, c / side
        coords.append(((r + rng.uniform(0.1, 0.9)) * step, (c + rng.uniform(0.1, 0.9)) * step))
        t = 0.5 + 0.25 * math.sin(2 * math.pi * k1 * x + ph1) + 0.25 * math.sin(2 * math.pi * k2 * y + ph2)
        h = h_lo + (h_hi - h_lo) * t
        heights.append(int(round(h)) if spec.integer_costs else h)
    pairs, seen = [], set()

    def link(u, v):
        for e in ((u, v), (v, u)):
            if e not in seen:
                seen.add(e)
                pairs.append(e)

    for i in range(n):
        r, c = divmod(i, side)
        if c + 1 < side and i + 1 < n:
            link(i, i + 1)
        if i + side < n:
            link(i, i + side)
    target = int(round(n * spec.avg_degree))
    diag = [i for i in range(n) if i % side + 1 < side and i + side + 1 < n]
    rng.shuffle(diag)
    for i in diag:
        if len(pairs) >= target:
            break
        link(i, i + side + 1)
    return heights, coords, pairs


def _finish_graph(spec: GraphGenSpec, rng: random.Random, heights, coords, pairs) -> RoadGraph:
    w_lo, w_hi = spec.base_cost_range
    src, dst, cost, length = [], [], [], []
    for u, v in pairs:
        d = haversine(coords[u], coords[v]) * (1.0 + rng.uniform(0.0, 0.5)) + 1.0
        if spec.integer_costs:
            w = rng.randint(int(w_lo), int(w_hi)) + math.ceil(spec.efficiency * d / 100.0)
        else:
            w = rng.uniform(w_lo, w_hi) + spec.efficiency * d / 100.0
        src.append(u)
        dst.append(v)
        length.append(d)
        cost.append(w + heights[v] - heights[u])
    model = synthetic_model(spec.e_max, spec.efficiency)
    return RoadGraph(spec.n_states, src, dst, cost, length, heights, coords, model)


def validate_no_negative_cycle(g: RoadGraph, tol: float = 1e-9) -> bool:
    """Bellman-Ford from a virtual source linked to every state at zero cost."""
    n = g.n_states
    if g.n_edges == 0:
        return True
    dist = np.zeros(n)
    src, dst, cost = g.src, g.dst, g.cost
    for _ in range(n):
        cand = dist[src] + cost
        new = dist.copy()
        np.minimum.at(new, dst, cand)
        if not np.any(new < dist - tol):
            return True
        dist = new
    return False


def graph_from_edges(n_states: int, edges: Sequence[tuple[int, int, float]], heights=None,
                     coords=None, length=None, model: EnergyModelParams | None = None) -> RoadGraph:
    """Convenience constructor from ``(u, v, cost)`` triples."""
    src = [e[0] for e in edges]
    dst = [e[1] for e in edges]
    cost = [e[2] for e in edges]
    return RoadGraph(n_states, src, dst, cost, length, heights, coords, model)


def path_graph(costs: Sequence[float], e_max: float | None = None) -> RoadGraph:
    """A simple chain 0 -> 1 -> ... -> len(costs) with the given edge costs.

    Heights are the running cost sum, so each edge is pure climb or descent
    and the potential heuristic is exact.
    """
    n = len(costs) + 1
    model = None if e_max is None else synthetic_model(e_max, 0.0)
    heights = [0.0]
    for c in costs:
        heights.append(heights[-1] + c)
    return graph_from_edges(n, [(i, i + 1, c) for i, c in enumerate(costs)], heights=heights,
                            model=model)
