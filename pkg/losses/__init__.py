"""
Tree-based semantic loss kernels
"""

from .base import BaseLoss, BatchLoss, LossKernel, PixelBatch
from .batch import batch_loss, loss_gradient, pixel_loss
from .config import LossConfig, LossKind
from .exceptions import LossConfigError, LossError, NonFiniteError, UnsupportedLossError
from .factory import LossFactory, create_loss
from .functional import (
    AggregatedProb,
    aggregate,
    aggregate_by_powers,
    cross_entropy,
    softmax,
    softmax_backward,
    tree_ce,
    wasserstein_ce,
)
from .kernels import CrossEntropyLoss, TreeCELoss, WassersteinCELoss, WassersteinLoss

__all__ = [
    "AggregatedProb",
    "BaseLoss",
    "BatchLoss",
    "CrossEntropyLoss",
    "LossConfig",
    "LossFactory",
    "LossKernel",
    "LossKind",
    "PixelBatch",
    "TreeCELoss",
    "WassersteinCELoss",
    "WassersteinLoss",
    "aggregate",
    "aggregate_by_powers",
    "batch_loss",
    "create_loss",
    "cross_entropy",
    "loss_gradient",
    "pixel_loss",
    "softmax",
    "softmax_backward",
    "tree_ce",
    "wasserstein_ce",
    "LossConfigError",
    "LossError",
    "NonFiniteError",
    "UnsupportedLossError",
]
