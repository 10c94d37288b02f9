import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evprofile.graph import EnergyModelParams, GraphGenSpec, generate_test_graph, graph_from_edges
from evprofile.heuristic import (Heuristic, HeuristicConfig, InconsistentHeuristicError,
                                 calibrate_lambda, check_consistency, edge_distances, h_value,
                                 haversine, heuristic_coefficients, lambda_bound, make_heuristic,
                                 reduced_cost)


def gen(seed=42, n=50, **kw):
    base = dict(seed=seed, n_states=n, base_cost_range=(0, 5), height_range=(0, 30),
                efficiency=5.0, e_max=200, strongly_connected=True)
    base.update(kw)
    return generate_test_graph(GraphGenSpec(**base))


def test_haversine_basics():
    assert haversine((0, 0), (0, 0)) == 0
    assert haversine((0, 0), (0, 1)) == pytest.approx(111_195, abs=1)
    a, b = (40.7, -74.0), (34.05, -118.25)
    assert haversine(a, b) == haversine(b, a)


@settings(max_examples=100)
@given(st.tuples(st.floats(-80, 80), st.floats(-180, 180)),
       st.tuples(st.floats(-80, 80), st.floats(-180, 180)))
def test_haversine_symmetric_and_bounded(a, b):
    d = haversine(a, b)
    assert d == pytest.approx(haversine(b, a), abs=1e-6)
    assert 0 <= d <= math.pi * 6_371_000 + 1


def flat_graph(eff=12.0):
    coords = [(0.0, 0.0), (0.0, 0.01), (0.01, 0.01), (0.01, 0.0)]
    edges = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]
    length = [haversine(coords[u], coords[v]) for u, v in edges]
    cost = [eff * d / 100 for d in length]
    model = EnergyModelParams(avg_efficiency=eff)
    return graph_from_edges(4, [(u, v, c) for (u, v), c in zip(edges, cost)], heights=[7.0] * 4,
                            coords=coords, length=length, model=model)


def test_flat_graph_lambda_is_one():
    assert calibrate_lambda(flat_graph(), "potential") == pytest.approx(1.0, abs=1e-12)


def test_negative_reduced_cost_gives_zero_lambda():
    g = flat_graph()
    # a free descent steeper than the potential term allows
    g2 = graph_from_edges(4, list(g.edges())[:-1] + [(0, 2, -50.0)], heights=[7, 7, 0, 7],
                          coords=g.coords, length=list(g.length), model=g.model)
    assert calibrate_lambda(g2, "potential") == 0.0


def test_seed42_lambda_matches_bruteforce_scan():
    g = gen()
    for variant in ("potential", "dynamics"):
        eff, coef = heuristic_coefficients(variant, g.model)
        best = math.inf
        for i, (u, v, c) in enumerate(g.edges()):
            d = max(g.length[i], haversine(g.coord(u), g.coord(v)))
            best = min(best, (c - coef * (g.heights[v] - g.heights[u])) / (eff * d / 100))
        assert calibrate_lambda(g, variant) == pytest.approx(max(best, 0.0), rel=1e-12)


def test_no_edges_lambda_zero():
    g = graph_from_edges(3, [], model=EnergyModelParams())
    assert lambda_bound(g, 15.0, 5.0) == (0.0, None)


def test_h_value_examples():
    g = gen()
    for variant in ("potential", "dynamics"):
        h = make_heuristic(g, 3, "forward", variant)
        assert h(3) == 0 and h_value(h.cfg, g, 3) == 0
    flat = graph_from_edges(3, [(0, 1, 1.0)], model=EnergyModelParams())
    cfg = HeuristicConfig("potential", 0.0, 15.0, 5.0, target=2)
    assert all(h_value(cfg, flat, u) == 0 for u in range(3))
    hilly = graph_from_edges(2, [(0, 1, 1.0)], heights=[10.0, 0.0], model=EnergyModelParams())
    cfg = HeuristicConfig("potential", 0.0, 15.0, 2.5, target=1)
    assert h_value(cfg, hilly, 0) == pytest.approx(-25.0)


def test_precomputed_values_match_direct_formula():
    g = gen(seed=9)
    for direction in ("forward", "backward"):
        h = make_heuristic(g, 5, direction, "dynamics")
        for u in range(g.n_states):
            assert h(u) == pytest.approx(h_value(h.cfg, g, u), abs=1e-9)


def test_potential_coefficients_from_model():
    m = EnergyModelParams(total_mass=1800, gravity=10, avg_efficiency=14)
    assert heuristic_coefficients("potential", m) == (14, pytest.approx(5.0))
    assert heuristic_coefficients("zero", None) == (0.0, 0.0)
    with pytest.raises(ValueError):
        heuristic_coefficients("potential", None)


def test_zero_heuristic_consistent_on_nonnegative_graph():
    g = gen(height_range=(0, 0))
    assert g.cost.min() >= 0
    assert check_consistency(g, make_heuristic(g, 0, variant="zero")).consistent


@pytest.mark.parametrize("seed", range(10))
def test_calibrated_heuristics_consistent(seed):
    g = gen(seed=seed, box_deg=0.05)
    for variant in ("potential", "dynamics"):
        for direction in ("forward", "backward"):
            rep = check_consistency(g, make_heuristic(g, seed % g.n_states, direction, variant))
            assert rep.consistent and rep.max_excess <= 1e-6 and rep.anchor_ok


def test_inflated_lambda_breaks_binding_edge():
    g = gen(box_deg=0.05)
    eff, coef = heuristic_coefficients("potential", g.model)
    lam, i = lambda_bound(g, eff, coef)
    assert lam > 0 and i is not None
    head = int(g.dst[i])
    h = make_heuristic(g, head, "forward", "potential", lam=2 * lam)
    rep = check_consistency(g, h)
    assert not rep.consistent
    assert i in [v[0] for v in rep.violations]


def test_reduced_cost_examples():
    g = gen()
    z = make_heuristic(g, 0, variant="zero")
    for u, v, c in list(g.edges())[:10]:
        assert reduced_cost(z, u, v, c) == c
    assert reduced_cost(z, 0, 0, 0.0) == 0
    h = make_heuristic(g, 0, "forward", "potential")
    assert all(reduced_cost(h, u, v, c) >= -1e-6 for u, v, c in g.edges())
    bad = make_heuristic(g, 0, "forward", "potential", lam=50 * h.cfg.lam + 10)
    with pytest.raises(InconsistentHeuristicError):
        for u, v, c in g.edges():
            reduced_cost(bad, u, v, c)


def test_edge_distances_take_the_longer():
    g = gen()
    d = edge_distances(g)
    assert np.all(d >= g.length)


def test_config_validation():
    with pytest.raises(ValueError):
        HeuristicConfig("other", 1.0, 1.0, 1.0, 0)
    with pytest.raises(ValueError):
        HeuristicConfig("potential", -1.0, 1.0, 1.0, 0)
    with pytest.raises(ValueError):
        HeuristicConfig("potential", 1.0, 1.0, 1.0, 0, direction="sideways")


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 5000), target=st.integers(0, 19),
       variant=st.sampled_from(["potential", "dynamics"]),
       direction=st.sampled_from(["forward", "backward"]))
def test_calibrated_heuristic_always_consistent(seed, target, variant, direction):
    g = gen(seed=seed, n=20)
    h = make_heuristic(g, target, direction, variant)
    assert isinstance(h, Heuristic)
    assert check_consistency(g, h).consistent
