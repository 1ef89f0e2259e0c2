"""The confidence-threshold OOD rule and threshold selection."""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from hierarchy.models import LabelTree
from trainer.loop import predict_probabilities
from trainer.model import Model

from .exceptions import EmptyGridError, EvaluationError
from .levels import level_labels, level_scores, resolve_level
from .metrics import one_vs_rest_metrics

logger = logging.getLogger(__name__)

DEFAULT_GRID = tuple(round(i / 100, 2) for i in range(101))


def decide(scores, tau: float):
    """Argmax class code (1-based) where the max score exceeds ``tau``, else 0 (OOD).

    Ties go to the lowest class index. One vector gives an int, a batch an array.
    """
    scores = np.asarray(scores, dtype=np.float64)
    best = np.argmax(scores, axis=-1)
    top = np.take_along_axis(scores, np.expand_dims(best, -1), axis=-1)[..., 0]
    decision = np.where(top > tau, best + 1, 0)
    return int(decision) if decision.ndim == 0 else decision


def as_grid(grid: Sequence[float] | None = None) -> np.ndarray:
    """Sorted unique thresholds; the default grid is 0, 0.01, ..., 1."""
    values = np.asarray(DEFAULT_GRID if grid is None else grid, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise EmptyGridError("Threshold grid is empty")
    if np.any((values < 0) | (values > 1)):
        raise EvaluationError("Threshold grid values must lie in [0, 1]")
    return np.unique(values)


@dataclass(frozen=True)
class TauSweep:
    grid: np.ndarray
    macro_f1: np.ndarray
    ood_fraction: np.ndarray

    @property
    def best_index(self) -> int:
        # NaN (no ID class present) never wins; first maximum is the smallest tau
        f1 = np.where(np.isnan(self.macro_f1), -np.inf, self.macro_f1)
        return int(np.argmax(f1))

    @property
    def tau(self) -> float:
        return float(self.grid[self.best_index])


def sweep_tau(scores: np.ndarray, truth: np.ndarray, grid: Sequence[float] | None = None) -> TauSweep:
    """Macro-F1 on ID pixels and OOD fraction for every threshold of the grid.

    ``scores`` is (N, n_k); ``truth`` holds level codes. Only pixels with
    truth >= 1 enter the F1; the OOD fraction counts every evaluated pixel.
    """
    values = as_grid(grid)
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth).reshape(-1)
    evaluated = truth >= 0
    in_dist = truth >= 1
    n_eval = int(np.count_nonzero(evaluated))

    n_classes = scores.shape[-1]
    macro_f1 = np.empty(values.size)
    ood_fraction = np.empty(values.size)
    for i, tau in enumerate(values):
        pred = decide(scores, tau)
        report = one_vs_rest_metrics(pred[in_dist], truth[in_dist], n_classes, tau=float(tau))
        macro_f1[i] = report.macro_f1
        ood_fraction[i] = np.count_nonzero(pred[evaluated] == 0) / n_eval if n_eval else 0.0
    return TauSweep(grid=values, macro_f1=macro_f1, ood_fraction=ood_fraction)


def select_tau(
    model: Model,
    cubes: Sequence[np.ndarray],
    labels: Sequence[np.ndarray],
    tree: LabelTree,
    level: int | str,
    grid: Sequence[float] | None = None,
) -> TauSweep:
    """Pick tau_m as the grid value with the highest validation macro-F1 (ties: smallest)."""
    level = resolve_level(tree, level)
    values = as_grid(grid)
    scores, truth = [], []
    for cube, label in zip(cubes, labels, strict=True):
        scores.append(level_scores(predict_probabilities(model, cube), tree, level))
        truth.append(level_labels(np.asarray(label).reshape(-1), tree, level))
    if not scores:
        raise EvaluationError("No validation images to select a threshold on")
    sweep = sweep_tau(np.concatenate(scores), np.concatenate(truth), values)
    logger.info(
        "Selected tau_m=%.2f at level %d (macro F1 %.4f)",
        sweep.tau, level, sweep.macro_f1[sweep.best_index],
    )
    return sweep
