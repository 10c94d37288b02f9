"""The search algorithms: point queries (known initial energy) and profile queries."""

from ._core import (E_TOL, F_TOL, SearchError, SearchNode, SearchResult, SearchStats, SearchTrace,
                    reconstruct_path)
from .bidirectional import pr_bastar, pr_bastar_par
from .point import astar_energy, dijkstra_energy
from .profile_search import pr_astar_bw, pr_astar_fw

PROFILE_ALGORITHMS = ("pr-fw", "pr-bw", "pr-ba", "pr-ba-par")
POINT_ALGORITHMS = ("dijkstra", "astar")
ALGORITHMS = POINT_ALGORITHMS + PROFILE_ALGORITHMS

__all__ = [
    "E_TOL", "F_TOL", "SearchError", "SearchNode", "SearchResult", "SearchStats", "SearchTrace",
    "reconstruct_path", "astar_energy", "dijkstra_energy", "pr_astar_fw", "pr_astar_bw",
    "pr_bastar", "pr_bastar_par", "ALGORITHMS", "PROFILE_ALGORITHMS", "POINT_ALGORITHMS",
]
