"""Sniffer placement on road graphs: vertex covers pruned by centrality rank."""

from .baselines import (
    GreedyMode,
    greedy_budget_sweep,
    greedy_placement,
    random_placement,
    strength_apriori,
    trajectory_weights,
)
from .centrality import MEASURES, CentralityParams, CentralityVector, compute
from .evaluation import LostRule, EvaluationReport, efficiency, evaluate, sweep_k
from .graph_model import (
    RoadGraph,
    Trajectory,
    TrajectorySet,
    generate_geometric_graph,
    generate_grid_graph,
    generate_trajectories,
    hop_distances,
    load_graph,
    load_trajectories,
    save_graph,
    save_trajectories,
)
from .placement import Placement, place, rank_coefficient
from .vertex_cover import (
    CoverSet,
    cover_bar_yehuda_even,
    cover_exact,
    cover_gavril_yannakakis,
    verify_cover,
)

__version__ = "0.1.0"
