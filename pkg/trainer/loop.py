"""Mini-batch training over annotated pixels only."""

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from hierarchy.models import LabelTree
from losses.base import PixelBatch
from losses.batch import batch_loss
from losses.functional import softmax
from transport.exceptions import DimensionMismatchError

from .config import TrainConfig
from .exceptions import NoAnnotationsError
from .model import Model, backward, forward
from .normalize import l1_normalize
from .optimizer import OptimizerState, adam_step, learning_rate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    lr: float
    loss: float
    pixels: int
    steps: int


@dataclass
class TrainResult:
    model: Model
    trace: list[EpochStats] = field(default_factory=list)
    steps: int = 0
    # Pixels without a positive label that reached a gradient; must stay 0
    unannotated_seen: int = 0
    degenerate_pixels: int = 0

    @property
    def losses(self) -> list[float]:
        return [stats.loss for stats in self.trace]


@dataclass(frozen=True)
class PixelPool:
    """Normalized spectra and 0-based leaf targets of one image's annotated pixels."""

    features: np.ndarray
    targets: np.ndarray
    labels: np.ndarray


def build_pools(
    cubes: Sequence[np.ndarray],
    labels: Sequence[np.ndarray],
    n_classes: int,
) -> tuple[list[PixelPool], int]:
    """Keep only pixels labelled 1..C; returns the pools and the all-zero pixel count."""
    pools, degenerate = [], 0
    for cube, label in zip(cubes, labels, strict=True):
        flat_labels = np.asarray(label).reshape(-1)
        annotated = np.flatnonzero((flat_labels >= 1) & (flat_labels <= n_classes))
        spectra = np.asarray(cube, dtype=np.float64).reshape(flat_labels.size, -1)[annotated]
        features, zeros = l1_normalize(spectra)
        degenerate += zeros
        pools.append(
            PixelPool(
                features=features,
                targets=flat_labels[annotated].astype(np.intp) - 1,
                labels=flat_labels[annotated],
            )
        )
    return pools, degenerate


def train(
    cubes: Sequence[np.ndarray],
    labels: Sequence[np.ndarray],
    tree: LabelTree,
    cfg: TrainConfig,
) -> TrainResult:
    """Train a fresh model; fully determined by (cfg.seed, cfg, data).

    Raises:
        NoAnnotationsError: no image carries an annotated pixel
    """
    if not cubes:
        raise NoAnnotationsError("No training images given")
    bands = np.asarray(cubes[0]).shape[-1]
    for cube in cubes:
        if np.asarray(cube).shape[-1] != bands:
            raise DimensionMismatchError("Training cubes differ in band count", expected=bands)

    pools, degenerate = build_pools(cubes, labels, tree.C)
    total_annotated = sum(pool.targets.size for pool in pools)
    if total_annotated == 0:
        raise NoAnnotationsError("Training images contain no annotated pixel")
    if degenerate:
        logger.warning("%d annotated pixels have an all-zero spectrum; left unnormalized", degenerate)

    rng = np.random.default_rng(cfg.seed)
    model = Model.initialize((bands, *cfg.hidden_sizes, tree.C), rng)
    state = OptimizerState.for_model(model)
    result = TrainResult(model=model, degenerate_pixels=degenerate)

    logger.info(
        "Training %s on %d images (%d annotated pixels) for %d epochs",
        cfg.loss.label, len(pools), total_annotated, cfg.epochs,
    )

    for epoch in range(cfg.epochs):
        order = rng.permutation(len(pools))
        loss_sum, pixel_count, steps = 0.0, 0, 0
        for start in range(0, len(order), cfg.batch_size):
            features, targets = [], []
            for image_index in order[start:start + cfg.batch_size]:
                pool = pools[image_index]
                if pool.targets.size == 0:
                    continue
                take = min(cfg.pixels_per_image, pool.targets.size)
                chosen = np.sort(rng.choice(pool.targets.size, size=take, replace=False))
                result.unannotated_seen += int(np.count_nonzero(pool.labels[chosen] < 1))
                features.append(pool.features[chosen])
                targets.append(pool.targets[chosen])
            if not features:
                continue

            x = np.concatenate(features)
            y = np.concatenate(targets)
            logits, cache = forward(model, x)
            loss = batch_loss(PixelBatch(logits, y, np.ones(y.size, dtype=bool)), cfg.loss, tree)
            grads = backward(model, cache, loss.grad)
            model, state = adam_step(model, state, grads, cfg, epoch)

            loss_sum += loss.value * loss.annotated
            pixel_count += loss.annotated
            steps += 1

        stats = EpochStats(
            epoch=epoch,
            lr=learning_rate(cfg, epoch),
            loss=loss_sum / pixel_count,
            pixels=pixel_count,
            steps=steps,
        )
        result.trace.append(stats)
        result.steps += steps
        logger.info("Epoch %d/%d: loss=%.6f lr=%.3g", epoch + 1, cfg.epochs, stats.loss, stats.lr)

    result.model = model
    return result


def predict_probabilities(model: Model, cube: np.ndarray) -> np.ndarray:
    """Leaf softmax for every pixel of an (H, W, bands) cube, shape (H*W, C)."""
    spectra = np.asarray(cube, dtype=np.float64).reshape(-1, np.asarray(cube).shape[-1])
    features, _ = l1_normalize(spectra)
    logits, _ = forward(model, features)
    return softmax(logits)
