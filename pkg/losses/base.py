"""
Base interfaces and types for loss kernels
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from hierarchy.models import LabelTree
from transport.exceptions import DimensionMismatchError

from .config import LossConfig
from .functional import softmax, softmax_backward


@dataclass(frozen=True)
class PixelBatch:
    """Logits for B pixels with sparse positive-only supervision.

    ``targets`` are 0-based leaf indices; entries where ``mask`` is False are
    never read.
    """
    logits: np.ndarray
    targets: np.ndarray
    mask: np.ndarray

    @property
    def annotated(self) -> int:
        return int(np.count_nonzero(self.mask))


@dataclass(frozen=True)
class BatchLoss:
    """Masked mean loss and its gradient w.r.t. the batch logits"""
    value: float
    grad: np.ndarray
    annotated: int


@runtime_checkable
class LossKernel(Protocol):
    """Protocol every loss kernel implements"""

    config: LossConfig

    def pixel_values(self, probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
        """Per-pixel loss for (N, C) probabilities and N leaf indices"""
        ...

    def logit_gradient(self, logits: np.ndarray, targets: np.ndarray) -> np.ndarray:
        """Per-pixel gradient w.r.t. (N, C) logits"""
        ...


class BaseLoss(ABC):
    """Common plumbing: a loss is a function of leaf probabilities composed with softmax"""

    def __init__(self, tree: LabelTree, config: LossConfig):
        self.tree = tree
        self.config = config

    def _check_targets(self, probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
        targets = np.asarray(targets, dtype=np.intp)
        if probs.ndim != 2 or probs.shape[1] != self.tree.C or targets.shape != (probs.shape[0],):
            raise DimensionMismatchError(
                f"Expected (N, {self.tree.C}) probabilities and N targets, "
                f"got {probs.shape} and {targets.shape}",
                expected=self.tree.C,
                actual=probs.shape[-1] if probs.ndim else None,
            )
        if targets.size and (targets.min() < 0 or targets.max() >= self.tree.C):
            raise DimensionMismatchError(f"Target leaf indices out of range [0, {self.tree.C})")
        return targets

    @abstractmethod
    def pixel_values(self, probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def prob_gradient(self, probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
        """dLoss/dp for each pixel, shape (N, C)"""
        pass

    def logit_gradient(self, logits: np.ndarray, targets: np.ndarray) -> np.ndarray:
        probs = softmax(logits)
        return softmax_backward(probs, self.prob_gradient(probs, targets))
