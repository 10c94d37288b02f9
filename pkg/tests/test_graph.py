import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evprofile.graph import (EnergyModelParams, GraphConsistencyError, GraphFormatError,
                             GraphGenSpec, compute_edge_energy, edge_slope, generate_test_graph,
                             graph_from_edges, load_graph, load_graph_cache, read_co, read_gr,
                             save_graph_cache, validate_no_negative_cycle)
from conftest import write_dimacs

CONST10 = EnergyModelParams(alpha=(0, 0, 0), beta=(0, 0, 10), extra_mass=0, total_mass=1000)


def test_edge_energy_constant_term():
    assert compute_edge_energy(CONST10, 0.0, 1.0) == 10


def test_edge_energy_zero_length():
    m = EnergyModelParams()
    for s in (-0.3, 0.0, 0.2):
        assert compute_edge_energy(m, s, 0.0) == 0


def test_edge_energy_polynomial():
    m = EnergyModelParams(alpha=(0, 1, 0.5), beta=(0, 0, 10), extra_mass=100, total_mass=1000)
    assert compute_edge_energy(m, 0.1, 1.0) == pytest.approx(70.0, abs=1e-12)


def test_edge_slope_clamped_and_zero_length():
    assert edge_slope(0, 10, 100) == pytest.approx(0.1)
    assert edge_slope(0, 50, 10) == 1.0
    assert edge_slope(0, 5, 0) == 0.0


def test_model_rejects_bad_capacity():
    with pytest.raises(ValueError):
        EnergyModelParams(battery_capacity=0)


def test_model_roundtrip_and_digest():
    m = EnergyModelParams(extra_mass=120)
    m2 = EnergyModelParams.from_dict(m.to_dict())
    assert m2 == m and m2.digest() == m.digest()
    assert EnergyModelParams().digest() != m.digest()


def test_load_two_state_flat(tmp_path):
    files = write_dimacs(tmp_path, 2, [(1, 2, 100)], [(0, 0), (0, 900)], [5, 5])
    g = load_graph(*files, CONST10)
    assert g.n_states == 2 and g.n_edges == 1
    assert g.cost[0] == pytest.approx(10.0)
    assert g.fwd[0] == ((1, g.cost[0]),) and g.bwd[1] == ((0, g.cost[0]),)


def test_load_empty_edge_section(tmp_path):
    files = write_dimacs(tmp_path, 3, [], [(0, 0), (1, 1), (2, 2)], [0, 0, 0])
    g = load_graph(*files, CONST10)
    assert g.n_states == 3 and g.n_edges == 0


def test_co_units_are_microdegrees(tmp_path):
    _, co, _ = write_dimacs(tmp_path, 1, [], [(-73985000, 40748000)], [0])
    lat, lon = read_co(co)[0]
    assert lat == pytest.approx(40.748) and lon == pytest.approx(-73.985)


def test_missing_file_is_named(tmp_path):
    gr, co, el = write_dimacs(tmp_path, 2, [(1, 2, 100)], [(0, 0), (0, 1)], [0, 0])
    el.unlink()
    with pytest.raises(FileNotFoundError) as exc:
        load_graph(gr, co, el, CONST10)
    assert str(el) in str(exc.value)


def test_malformed_line_reports_lineno(tmp_path):
    p = tmp_path / "bad.gr"
    p.write_text("p sp 2 1\na 1 x 3\n")
    with pytest.raises(GraphFormatError) as exc:
        read_gr(p)
    assert exc.value.lineno == 2 and "bad.gr" in str(exc.value)


def test_arc_count_mismatch(tmp_path):
    p = tmp_path / "short.gr"
    p.write_text("p sp 2 2\na 1 2 3\n")
    with pytest.raises(GraphConsistencyError):
        read_gr(p)


def test_cache_roundtrip(tmp_path):
    files = write_dimacs(tmp_path, 3, [(1, 2, 120), (2, 3, 80), (3, 1, 200)],
                         [(0, 0), (1000, 0), (0, 1000)], [10, 25, 5])
    g = load_graph(*files, EnergyModelParams())
    save_graph_cache(g, tmp_path / "g.npz")
    h = load_graph_cache(tmp_path / "g.npz")
    for a in ("src", "dst", "cost", "length", "heights", "coords"):
        assert np.array_equal(getattr(g, a), getattr(h, a))
    assert h.model == g.model and h.fwd == g.fwd and h.bwd == g.bwd


def test_cache_rejects_foreign_npz(tmp_path):
    p = tmp_path / "x.npz"
    np.savez(p, header=np.array('{"format": "other"}'))
    with pytest.raises(GraphConsistencyError):
        load_graph_cache(p)


def test_graph_arrays_are_read_only():
    g = graph_from_edges(2, [(0, 1, 3.0)])
    with pytest.raises(ValueError):
        g.cost[0] = 1.0


def test_endpoint_out_of_range():
    with pytest.raises(ValueError):
        graph_from_edges(2, [(0, 2, 1.0)])


def test_generate_single_state():
    g = generate_test_graph(GraphGenSpec(seed=1, n_states=1, avg_degree=4))
    assert g.n_states == 1 and g.n_edges == 0


def test_generate_deterministic():
    spec = GraphGenSpec(seed=7, n_states=30, efficiency=0.5)
    a, b = generate_test_graph(spec), generate_test_graph(spec)
    assert list(a.edges()) == list(b.edges())


def test_generate_seed42_cycle_free():
    g = generate_test_graph(GraphGenSpec(seed=42, n_states=50, base_cost_range=(0, 20),
                                         height_range=(0, 50)))
    assert validate_no_negative_cycle(g)
    assert g.has_integer_costs()


def test_grid_layout_strongly_connected():
    g = generate_test_graph(GraphGenSpec(seed=3, n_states=50, layout="grid", efficiency=1.0))
    seen, stack = {0}, [0]
    while stack:
        u = stack.pop()
        for v, _ in g.fwd[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    assert len(seen) == 50
    assert validate_no_negative_cycle(g)


def test_negative_cycle_examples():
    assert validate_no_negative_cycle(graph_from_edges(3, [(0, 1, 1), (1, 2, -2), (2, 0, 3)]))
    assert not validate_no_negative_cycle(graph_from_edges(2, [(0, 1, -1), (1, 0, 0)]))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 40), deg=st.floats(0, 4),
       hi=st.integers(0, 30), layout=st.sampled_from(["random", "grid"]))
def test_generated_graphs_are_cycle_free(seed, n, deg, hi, layout):
    g = generate_test_graph(GraphGenSpec(seed=seed, n_states=n, avg_degree=deg,
                                         height_range=(0, hi), layout=layout))
    assert validate_no_negative_cycle(g)
    assert all(0 <= u < n and 0 <= v < n and u != v for u, v, _ in g.edges())


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5), st.integers(-5, 5)), max_size=20))
def test_backward_lists_reverse_forward(edges):
    g = graph_from_edges(6, edges)
    fw = sorted((u, v, c) for u in range(6) for v, c in g.fwd[u])
    bw = sorted((u, v, c) for v in range(6) for u, c in g.bwd[v])
    assert fw == bw == sorted((u, v, float(c)) for u, v, c in edges)


def test_downhill_edge_recuperates():
    m = EnergyModelParams()
    assert compute_edge_energy(m, -0.05, 1.0) < 0 < compute_edge_energy(m, 0.05, 1.0)
    assert not math.isnan(compute_edge_energy(m, -1.0, 10.0))
