"""
Vectorized loss kernels: CE, Wasserstein, Wasserstein+CE and tree-based semantic CE.
"""

import numpy as np

from hierarchy.distance import ground_distance
from hierarchy.models import LabelTree

from .base import BaseLoss
from .config import LossConfig
from .functional import softmax


class CrossEntropyLoss(BaseLoss):
    """Standard CE; ignores the tree weights."""

    def pixel_values(self, probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
        targets = self._check_targets(probs, targets)
        hot = probs[np.arange(probs.shape[0]), targets]
        return -np.log(np.clip(hot, self.config.epsilon, 1.0))

    def prob_gradient(self, probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
        targets = self._check_targets(probs, targets)
        rows = np.arange(probs.shape[0])
        hot = probs[rows, targets]
        grad = np.zeros_like(probs)
        # The clamped log is flat below epsilon
        grad[rows, targets] = np.divide(-1.0, hot, out=np.zeros_like(hot), where=hot > self.config.epsilon)
        return grad

    def logit_gradient(self, logits: np.ndarray, targets: np.ndarray) -> np.ndarray:
        # softmax-CE simplification: p - g
        probs = softmax(logits)
        targets = self._check_targets(probs, targets)
        grad = probs.copy()
        grad[np.arange(probs.shape[0]), targets] -= 1.0
        return grad


class WassersteinLoss(BaseLoss):
    """Crisp Wasserstein p^T M g with M induced by the weighted tree."""

    def __init__(self, tree: LabelTree, config: LossConfig):
        super().__init__(tree, config)
        self.distance = ground_distance(tree)

    def pixel_values(self, probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
        targets = self._check_targets(probs, targets)
        columns = self.distance.entries[:, targets].T
        return np.sum(probs * columns, axis=1)

    def prob_gradient(self, probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
        targets = self._check_targets(probs, targets)
        return np.ascontiguousarray(self.distance.entries[:, targets].T)


class WassersteinCELoss(BaseLoss):
    """alpha * CE + beta * Wasserstein, mixed per pixel."""

    def __init__(self, tree: LabelTree, config: LossConfig):
        super().__init__(tree, config)
        self.ce = CrossEntropyLoss(tree, config)
        self.wasserstein = WassersteinLoss(tree, config)

    def pixel_values(self, probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
        return (
            self.config.alpha * self.ce.pixel_values(probs, targets)
            + self.config.beta * self.wasserstein.pixel_values(probs, targets)
        )

    def prob_gradient(self, probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
        return (
            self.config.alpha * self.ce.prob_gradient(probs, targets)
            + self.config.beta * self.wasserstein.prob_gradient(probs, targets)
        )

    def logit_gradient(self, logits: np.ndarray, targets: np.ndarray) -> np.ndarray:
        return (
            self.config.alpha * self.ce.logit_gradient(logits, targets)
            + self.config.beta * self.wasserstein.logit_gradient(logits, targets)
        )


class TreeCELoss(BaseLoss):
    """Weighted CE over the aggregated probabilities of every non-root node.

    With D the (#nodes x C) subtree-leaf matrix, p† = D p and g† = D g, so the
    gradient w.r.t. p is -D^T (w * g† / p†).
    """

    def __init__(self, tree: LabelTree, config: LossConfig):
        super().__init__(tree, config)
        self.weights = tree.node_weights
        self.subtree = tree.subtree_leaf_matrix
        leaf_only = np.zeros_like(self.weights)
        leaf_only[tree.leaf_index] = 1.0
        # Unit leaf weights and nothing else: the loss is CE
        self.reduces_to_ce = bool(np.array_equal(self.weights, leaf_only))
        self._ce = CrossEntropyLoss(tree, config)

    def aggregated(self, probs: np.ndarray) -> np.ndarray:
        return probs @ self.subtree.T

    def pixel_values(self, probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
        targets = self._check_targets(probs, targets)
        on_path = self.subtree[:, targets].T
        log_p = np.log(np.clip(self.aggregated(probs), self.config.epsilon, 1.0))
        return -np.sum(on_path * log_p * self.weights, axis=1)

    def prob_gradient(self, probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
        targets = self._check_targets(probs, targets)
        on_path = self.subtree[:, targets].T
        p_dag = self.aggregated(probs)
        # Only the lower clamp is active; p† above 1 is round-off, not saturation
        active = p_dag > self.config.epsilon
        coef = np.divide(on_path * self.weights, p_dag, out=np.zeros_like(p_dag), where=active)
        return -(coef @ self.subtree)

    def logit_gradient(self, logits: np.ndarray, targets: np.ndarray) -> np.ndarray:
        if self.reduces_to_ce:
            return self._ce.logit_gradient(logits, targets)
        return super().logit_gradient(logits, targets)
