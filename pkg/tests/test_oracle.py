import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from evprofile.graph import GraphGenSpec, generate_test_graph, graph_from_edges, path_graph
from evprofile.oracle import (OracleDomainError, compare_envelopes, envelope_from_grid,
                              exhaustive_small_path_check, soc_dp_oracle)
from evprofile.profile import INFEASIBLE, EnergyProfile, evaluate, link_path, lower_envelope

INF = INFEASIBLE


def test_start_equals_goal():
    g = path_graph([1, 2], 5)
    assert soc_dp_oracle(g, 1, 1, 5).costs == [0.0] * 6


def test_single_edge():
    res = soc_dp_oracle(path_graph([3], 5), 0, 1, 5)
    assert res.costs == [INF, INF, INF, 3, 3, 3]
    assert res.final_soc == [None, None, None, 0, 1, 2]


def test_example_path(example_graph):
    res = soc_dp_oracle(example_graph, 0, 4, 5)
    assert res.costs == [INF, INF, 1, 1, 1, 2]
    assert res.monotonicity_violations() == []


def test_domain_checks():
    g = graph_from_edges(2, [(0, 1, 0.5)])
    with pytest.raises(OracleDomainError):
        soc_dp_oracle(g, 0, 1, 5)
    with pytest.raises(OracleDomainError):
        soc_dp_oracle(path_graph([1], 5), 0, 1, 4.5)
    big = generate_test_graph(GraphGenSpec(seed=0, n_states=15, avg_degree=1))
    with pytest.raises(OracleDomainError):
        exhaustive_small_path_check(big, 0, 1, 5, 3)


def test_compare_own_grid_envelope():
    g = generate_test_graph(GraphGenSpec(seed=3, n_states=20, base_cost_range=(0, 3),
                                         height_range=(0, 15), e_max=20, strongly_connected=True))
    res = soc_dp_oracle(g, 0, 11, 20)
    assert compare_envelopes(res, envelope_from_grid(res)).passed


def test_compare_example_envelope(example_graph):
    res = soc_dp_oracle(example_graph, 0, 4, 5)
    diff = compare_envelopes(res, lower_envelope([EnergyProfile(2, 1, 2)], 5))
    assert diff.passed and diff.n_points == 6
    assert diff.to_text() == "match at all 6 grid points"


def test_compare_perturbed_envelope(example_graph):
    res = soc_dp_oracle(example_graph, 0, 4, 5)
    diff = compare_envelopes(res, lower_envelope([EnergyProfile(2, 0, 2)], 5))
    assert not diff.passed and diff.first_mismatch == 2
    d = json.loads(diff.to_json())
    assert d["first_mismatch"] == 2 and not d["passed"]
    assert "first at e_init=2" in diff.to_text()


def test_compare_rejects_other_capacity(example_graph):
    res = soc_dp_oracle(example_graph, 0, 4, 5)
    with pytest.raises(ValueError):
        compare_envelopes(res, lower_envelope([], 6))


def test_exhaustive_single_edge_and_example(example_graph):
    g = path_graph([3], 5)
    assert exhaustive_small_path_check(g, 0, 1, 5, 1).costs == soc_dp_oracle(g, 0, 1, 5).costs
    assert (exhaustive_small_path_check(example_graph, 0, 4, 5, 4).costs
            == soc_dp_oracle(example_graph, 0, 4, 5).costs)


def test_exhaustive_explosion_guard():
    g = generate_test_graph(GraphGenSpec(seed=1, n_states=8, avg_degree=4, height_range=(0, 0),
                                         base_cost_range=(0, 0), e_max=10))
    with pytest.raises(OracleDomainError):
        exhaustive_small_path_check(g, 0, 1, 10, 30, max_sequences=1000)


@pytest.mark.parametrize("seed", range(12))
def test_exhaustive_never_beats_oracle(seed):
    rng = random.Random(seed)
    g = generate_test_graph(GraphGenSpec(seed=seed, n_states=8, avg_degree=1.6,
                                         base_cost_range=(0, 2), height_range=(0, 8), e_max=10))
    s, t = rng.sample(range(8), 2)
    full = soc_dp_oracle(g, s, t, 10).costs
    part = exhaustive_small_path_check(g, s, t, 10, 16).costs
    assert all(p >= f for p, f in zip(part, full))


@settings(max_examples=200)
@given(costs=st.lists(st.integers(-6, 6), max_size=8), e_max=st.integers(1, 15))
def test_oracle_agrees_with_linked_profile_on_paths(costs, e_max):
    g = path_graph(costs, e_max)
    res = soc_dp_oracle(g, 0, len(costs), e_max)
    p = link_path(costs, e_max)
    assert res.costs == [evaluate(p, e, e_max) for e in range(e_max + 1)]


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 30), e_max=st.integers(1, 30), data=st.data())
def test_oracle_monotone_and_slope_bounded(seed, n, e_max, data):
    g = generate_test_graph(GraphGenSpec(seed=seed, n_states=n, base_cost_range=(0, 3),
                                         height_range=(0, e_max), e_max=e_max))
    s = data.draw(st.integers(0, n - 1))
    t = data.draw(st.integers(0, n - 1))
    assert soc_dp_oracle(g, s, t, e_max).monotonicity_violations() == []
