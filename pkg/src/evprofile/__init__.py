"""Energy-optimal point and profile route search for electric vehicles."""

from .graph import (EnergyModelParams, GraphGenSpec, RoadGraph, compute_edge_energy,
                    generate_test_graph, load_graph, validate_no_negative_cycle)
from .heuristic import calibrate_lambda, check_consistency, haversine, make_heuristic
from .profile import (INFEASIBLE, EnergyProfile, Envelope, dominates, dominates_ordered, evaluate,
                      join_fw_bw, link_backward, link_forward, lower_envelope)
from .search import (astar_energy, dijkstra_energy, pr_astar_bw, pr_astar_fw, pr_bastar,
                     pr_bastar_par, reconstruct_path)

__version__ = "0.1.0"
