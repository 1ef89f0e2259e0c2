"""
Desk-scale per-pixel spectral classifier
"""

from .checkpoint import CheckpointHeader, load_checkpoint, save_checkpoint
from .config import TrainConfig
from .exceptions import (
    CacheMismatchError,
    CheckpointError,
    DivergenceError,
    NoAnnotationsError,
    TrainConfigError,
    TrainingError,
)
from .loop import EpochStats, TrainResult, predict_probabilities, train
from .model import ForwardCache, Gradients, Model, backward, forward
from .normalize import l1_normalize
from .optimizer import OptimizerState, adam_step, learning_rate

__all__ = [
    "CheckpointHeader",
    "EpochStats",
    "ForwardCache",
    "Gradients",
    "Model",
    "OptimizerState",
    "TrainConfig",
    "TrainResult",
    "adam_step",
    "backward",
    "forward",
    "l1_normalize",
    "learning_rate",
    "load_checkpoint",
    "predict_probabilities",
    "save_checkpoint",
    "train",
    "CacheMismatchError",
    "CheckpointError",
    "DivergenceError",
    "NoAnnotationsError",
    "TrainConfigError",
    "TrainingError",
]
