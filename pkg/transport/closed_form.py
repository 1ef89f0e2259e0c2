"""Closed-form Wasserstein distances for crisp targets and tree metrics."""

import numpy as np

from hierarchy.exceptions import WeightsUnassignedError
from hierarchy.models import DistanceMatrix, LabelTree

from .exceptions import DimensionMismatchError
from .simplex import as_prob_vector, hot_index


def _entries(M: DistanceMatrix | np.ndarray) -> np.ndarray:
    return np.asarray(M.entries if isinstance(M, DistanceMatrix) else M, dtype=np.float64)


def wasserstein_crisp(p, g, M: DistanceMatrix | np.ndarray) -> float:
    """W^M(p, g) = p^T M g for a one-hot g."""
    entries = _entries(M)
    C = entries.shape[0]
    p = as_prob_vector(p, size=C, name="p")
    hot = hot_index(g, size=C)
    return float(p @ entries[:, hot])


def wasserstein_crisp_gradient(g, M: DistanceMatrix | np.ndarray) -> np.ndarray:
    """d/dp of p^T M g: the column M g, independent of p."""
    entries = _entries(M)
    hot = hot_index(g, size=entries.shape[0])
    return entries[:, hot].copy()


def wasserstein_tree(p, q, tree: LabelTree) -> float:
    """Tree-metric transport cost: sum over edges of w_e * |mass_p(below e) - mass_q(below e)|.

    Equal to the LP optimum with M = ground_distance(tree), in O(#nodes) through
    a single bottom-up pass accumulating subtree mass differences.
    """
    if not tree.weights_assigned:
        raise WeightsUnassignedError("wasserstein_tree needs edge weights; apply a scheme first")
    p = as_prob_vector(p, size=tree.C, name="p")
    q = as_prob_vector(q, size=tree.C, name="q")
    if p.shape != q.shape:
        raise DimensionMismatchError("p and q differ in length", expected=p.shape[0], actual=q.shape[0])

    mass = np.zeros(len(tree.nodes), dtype=np.float64)
    mass[tree.leaf_index] = p - q
    parents = tree.parent_index
    for i in tree.bottom_up_order:
        if parents[i] >= 0:
            mass[parents[i]] += mass[i]
    return float(tree.node_weights @ np.abs(mass))
