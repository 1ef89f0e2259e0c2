"""Per-pixel loss functions on leaf probability vectors.

These operate on single vectors and are the readable reference for the
vectorized kernels in ``losses.kernels``.
"""

from dataclasses import dataclass

import numpy as np

from hierarchy.models import DistanceMatrix, LabelTree
from transport.closed_form import wasserstein_crisp
from transport.exceptions import DimensionMismatchError
from transport.simplex import hot_index

from .config import DEFAULT_EPSILON, LossConfig
from .exceptions import NonFiniteError


@dataclass(frozen=True)
class AggregatedProb:
    """p† over all nodes in ascending node-id order."""

    values: np.ndarray
    tree: LabelTree

    def __getitem__(self, node_id: int) -> float:
        return float(self.values[self.tree.index_of[node_id]])

    @property
    def root_mass(self) -> float:
        return self[self.tree.root_id]


def softmax(logits) -> np.ndarray:
    """Softmax over the last axis with max-subtraction."""
    z = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise NonFiniteError("softmax received non-finite logits")
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_backward(probs: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """Jacobian-transpose product of softmax: p * (u - <p, u>)."""
    return probs * (upstream - np.sum(probs * upstream, axis=-1, keepdims=True))


def cross_entropy(p, g, epsilon: float = DEFAULT_EPSILON) -> float:
    """-log p[l*] with p clamped to [epsilon, 1]."""
    p = np.asarray(p, dtype=np.float64)
    hot = hot_index(g, size=p.shape[0])
    return float(-np.log(np.clip(p[hot], epsilon, 1.0)))


def wasserstein_ce(p, g, M: DistanceMatrix | np.ndarray, cfg: LossConfig) -> float:
    """alpha * CE(p, g) + beta * W^M(p, g), mixed per pixel."""
    return cfg.alpha * cross_entropy(p, g, cfg.epsilon) + cfg.beta * wasserstein_crisp(p, g, M)


def aggregate(p, tree: LabelTree) -> AggregatedProb:
    """p† by bottom-up subtree summation of the zero-padded leaf vector."""
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (tree.C,):
        raise DimensionMismatchError(
            f"p has shape {p.shape}, tree has {tree.C} leaves", expected=tree.C, actual=p.size
        )
    values = np.zeros(len(tree.nodes), dtype=np.float64)
    values[tree.leaf_index] = p
    parents = tree.parent_index
    for i in tree.bottom_up_order:
        if parents[i] >= 0:
            values[parents[i]] += values[i]
    return AggregatedProb(values=values, tree=tree)


def aggregate_by_powers(p, tree: LabelTree) -> AggregatedProb:
    """p† = (sum_{k>=0} A^k) p~ evaluated literally with adjacency powers."""
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (tree.C,):
        raise DimensionMismatchError(
            f"p has shape {p.shape}, tree has {tree.C} leaves", expected=tree.C, actual=p.size
        )
    padded = np.zeros(len(tree.nodes), dtype=np.float64)
    padded[tree.leaf_index] = p
    total = padded.copy()
    term = padded
    for _ in range(tree.K):
        term = tree.adjacency.apply(term)
        total = total + term
    return AggregatedProb(values=total, tree=tree)


def tree_ce(p, g, tree: LabelTree, epsilon: float = DEFAULT_EPSILON) -> float:
    """-sum_v w_v g†_v log p†_v over non-root nodes, p† clamped to [epsilon, 1]."""
    hot_index(g, size=tree.C)
    weights = tree.node_weights
    p_dag = aggregate(p, tree).values
    g_dag = aggregate(np.asarray(g, dtype=np.float64), tree).values
    on_path = g_dag > 0
    terms = weights[on_path] * g_dag[on_path] * np.log(np.clip(p_dag[on_path], epsilon, 1.0))
    return float(-terms.sum())
