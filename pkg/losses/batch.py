"""Masked batch reduction and single-pixel gradients."""

import numpy as np

from hierarchy.models import LabelTree
from transport.simplex import hot_index

from .base import BatchLoss, PixelBatch
from .config import LossConfig
from .factory import create_loss
from .functional import softmax


def loss_gradient(logits, g, cfg: LossConfig, tree: LabelTree) -> np.ndarray:
    """Exact gradient of the selected loss w.r.t. one pixel's logits."""
    logits = np.asarray(logits, dtype=np.float64)
    target = hot_index(g, size=tree.C)
    kernel = create_loss(cfg, tree)
    return kernel.logit_gradient(logits[None, :], np.array([target]))[0]


def pixel_loss(logits, g, cfg: LossConfig, tree: LabelTree) -> float:
    """Selected loss of one pixel's logits, through softmax."""
    logits = np.asarray(logits, dtype=np.float64)
    target = hot_index(g, size=tree.C)
    kernel = create_loss(cfg, tree)
    return float(kernel.pixel_values(softmax(logits[None, :]), np.array([target]))[0])


def batch_loss(batch: PixelBatch, cfg: LossConfig, tree: LabelTree) -> BatchLoss:
    """Mean loss over annotated pixels and its gradient; unannotated rows get zero gradient.

    An all-unannotated batch is not an error: value and gradient are zero.
    """
    logits = np.asarray(batch.logits, dtype=np.float64)
    mask = np.asarray(batch.mask, dtype=bool)
    grad = np.zeros_like(logits)
    count = int(np.count_nonzero(mask))
    if count == 0:
        return BatchLoss(value=0.0, grad=grad, annotated=0)

    kernel = create_loss(cfg, tree)
    selected = logits[mask]
    targets = np.asarray(batch.targets)[mask]
    values = kernel.pixel_values(softmax(selected), targets)
    grad[mask] = kernel.logit_gradient(selected, targets) / count
    return BatchLoss(value=float(values.mean()), grad=grad, annotated=count)
