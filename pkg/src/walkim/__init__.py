"""Walk-score influence maximization.

Greedy seed selection where each vertex is scored by the total
probability of the bounded-length walks leaving it; removing a selected
seed triggers an incremental, lazily evaluated score correction instead
of a full recomputation. Exact enumeration oracles and a Monte-Carlo
spread evaluator back every production path with independent checks.
"""

from .errors import CapacityError, DomainError, EdgeListParseError
from .evaluate import SpreadEstimate, mc_spread, robustness_bench
from .graph import (
    InfluenceGraph,
    ProbabilityModel,
    assign_probabilities,
    load_edge_list,
    load_graph,
    random_graph,
    read_binary_cache,
    write_binary_cache,
    write_edge_list,
)
from .scores import ScoreVectors, WalkColumnSet, score_est, walk_pro
from .select import SeedSelection, mc_greedy, walk_greedy
from .update import BasicGreedy, LazyEngine, apply_basic_update

__all__ = [
    "CapacityError", "DomainError", "EdgeListParseError",
    "InfluenceGraph", "ProbabilityModel", "assign_probabilities",
    "load_edge_list", "load_graph", "random_graph",
    "read_binary_cache", "write_binary_cache", "write_edge_list",
    "ScoreVectors", "WalkColumnSet", "score_est", "walk_pro",
    "SeedSelection", "mc_greedy", "walk_greedy",
    "BasicGreedy", "LazyEngine", "apply_basic_update",
    "SpreadEstimate", "mc_spread", "robustness_bench",
]

__version__ = "0.1.0"
