"""Tree-induced ground distances between leaves."""

import numpy as np

from .exceptions import WeightsUnassignedError
from .models import DistanceMatrix, LabelTree


def ground_distance(tree: LabelTree) -> DistanceMatrix:
    """M[l, l'] = sum of edge weights on the unique path between leaves l and l'.

    The edge into node v lies on that path iff exactly one of the two leaves is in
    v's subtree, so with D the subtree-leaf matrix and w the node weights
    M = s 1^T + 1 s^T - 2 D^T diag(w) D, where s = D^T w.
    """
    if not tree.weights_assigned:
        raise WeightsUnassignedError("ground_distance needs edge weights; apply a scheme first")

    D = tree.subtree_leaf_matrix
    w = tree.node_weights
    depth = D.T @ w
    shared = D.T @ (w[:, None] * D)
    entries = depth[:, None] + depth[None, :] - 2.0 * shared
    # Exact zeros on the diagonal and no negative round-off
    np.fill_diagonal(entries, 0.0)
    np.maximum(entries, 0.0, out=entries)
    entries = 0.5 * (entries + entries.T)
    entries.setflags(write=False)
    return DistanceMatrix(entries=entries, leaf_names=tree.leaf_names, scheme=tree.scheme)
