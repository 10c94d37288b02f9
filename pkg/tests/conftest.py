import pytest

from evprofile.graph import path_graph, save_graph_cache

# edge costs of the worked linking example and its battery size
EXAMPLE_COSTS = (1, -2, 3, -1)
EXAMPLE_E_MAX = 5


def write_dimacs(tmp_path, n, arcs, coords, heights, name="tiny"):
    """Write a .gr/.co/elevation triple; ``arcs`` and ``coords`` use 1-based ids."""
    gr = tmp_path / f"{name}.gr"
    co = tmp_path / f"{name}.co"
    el = tmp_path / f"{name}.elev"
    lines = ["c tiny fixture", f"p sp {n} {len(arcs)}"] + [f"a {u} {v} {w}" for u, v, w in arcs]
    gr.write_text("\n".join(lines) + "\n")
    lines = [f"p aux sp co {n}"] + [f"v {i} {lon} {lat}" for i, (lon, lat) in enumerate(coords, 1)]
    co.write_text("\n".join(lines) + "\n")
    el.write_text("\n".join(f"{i} {h}" for i, h in enumerate(heights, 1)) + "\n")
    return gr, co, el


@pytest.fixture
def example_graph():
    return path_graph(EXAMPLE_COSTS, EXAMPLE_E_MAX)


@pytest.fixture
def example_cache(tmp_path, example_graph):
    p = tmp_path / "example.npz"
    save_graph_cache(example_graph, p)
    return p
