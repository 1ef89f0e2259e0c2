from .adjacency import AdjacencyOperator
from .distance import ground_distance
from .exceptions import (
    CycleError,
    DuplicateNodeError,
    MultipleRootsError,
    NegativeWeightError,
    SchemeError,
    TooFewLeavesError,
    TreeError,
    TreeLossError,
    UnknownParentError,
    WeightsUnassignedError,
)
from .models import DistanceMatrix, EdgeWeightScheme, LabelTree, SchemeKind, TreeNode
from .tree import build_tree, dump_tree, level_frontier, node_levels, parse_tree
from .weights import assign_weights, edge_levels

__all__ = [
    "AdjacencyOperator",
    "DistanceMatrix",
    "EdgeWeightScheme",
    "LabelTree",
    "SchemeKind",
    "TreeNode",
    "assign_weights",
    "build_tree",
    "dump_tree",
    "edge_levels",
    "ground_distance",
    "level_frontier",
    "node_levels",
    "parse_tree",
    "CycleError",
    "DuplicateNodeError",
    "MultipleRootsError",
    "NegativeWeightError",
    "SchemeError",
    "TooFewLeavesError",
    "TreeError",
    "TreeLossError",
    "UnknownParentError",
    "WeightsUnassignedError",
]
