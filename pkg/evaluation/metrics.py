"""One-vs-rest TPR/BACC/F1 and confusion matrices with an OOD column."""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.metrics import confusion_matrix as sk_confusion_matrix

from hierarchy.models import LabelTree
from transport.exceptions import DimensionMismatchError

from .exceptions import EvaluationError
from .levels import level_view

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClassCounts:
    """Per-class one-vs-rest tallies over evaluated (annotated) pixels."""

    tp: np.ndarray
    fp: np.ndarray
    fn: np.ndarray
    tn: np.ndarray

    @property
    def support(self) -> np.ndarray:
        return self.tp + self.fn


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with rows = truth, cols = prediction; index 0 is OOD in both."""

    counts: np.ndarray
    names: tuple[str, ...]

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0] - 1

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def row_normalized(self) -> np.ndarray:
        sums = self.counts.sum(axis=1, keepdims=True).astype(np.float64)
        return np.divide(self.counts, sums, out=np.zeros(self.counts.shape), where=sums > 0)

    def class_counts(self) -> ClassCounts:
        counts = self.counts.astype(np.int64)
        diag = np.diag(counts)[1:]
        fn = counts[1:, :].sum(axis=1) - diag
        fp = counts[:, 1:].sum(axis=0) - diag
        tn = counts.sum() - diag - fn - fp
        return ClassCounts(tp=diag, fp=fp, fn=fn, tn=tn)


@dataclass(frozen=True)
class MetricReport:
    level: int
    tau: float
    tpr: np.ndarray
    tnr: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    # Class codes (1-based) without positives; NaN in the per-class arrays
    excluded: tuple[int, ...]
    n_pixels: int
    ood_predicted: int
    # Fraction of truth-0 pixels predicted OOD; None when there are none
    ood_recall: float | None = None
    confusion: ConfusionMatrix | None = None

    @property
    def bacc(self) -> np.ndarray:
        return (self.tpr + self.tnr) / 2.0

    @property
    def n_classes(self) -> int:
        return self.tpr.shape[0]

    def _macro(self, values: np.ndarray) -> float:
        if len(self.excluded) == self.n_classes:
            return float("nan")
        return float(np.nanmean(values))

    @property
    def macro_tpr(self) -> float:
        return self._macro(self.tpr)

    @property
    def macro_bacc(self) -> float:
        return self._macro(self.bacc)

    @property
    def macro_f1(self) -> float:
        return self._macro(self.f1)

    @property
    def ood_fraction(self) -> float:
        return self.ood_predicted / self.n_pixels if self.n_pixels else 0.0


def _check_pair(pred, truth) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred).reshape(-1)
    truth = np.asarray(truth).reshape(-1)
    if pred.shape != truth.shape:
        raise DimensionMismatchError(
            "Prediction and truth differ in pixel count", expected=truth.size, actual=pred.size
        )
    evaluated = truth >= 0
    return pred[evaluated].astype(np.int64), truth[evaluated].astype(np.int64)


def _report_from_counts(
    counts: ClassCounts,
    level: int,
    tau: float,
    n_pixels: int,
    ood_predicted: int,
    ood_recall: float | None,
    confusion: ConfusionMatrix | None,
) -> MetricReport:
    support = counts.support
    negatives = counts.tn + counts.fp
    present = support > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        tpr = np.where(present, counts.tp / support, np.nan)
        # No negatives means no false positive was possible
        tnr = np.where(negatives > 0, counts.tn / negatives, 1.0)
        tnr = np.where(present, tnr, np.nan)
        f1 = np.where(present, 2 * counts.tp / (2 * counts.tp + counts.fp + counts.fn), np.nan)
    excluded = tuple(int(c) + 1 for c in np.flatnonzero(~present))
    if excluded:
        logger.debug("Classes without annotated pixels excluded from macro means: %s", excluded)
    return MetricReport(
        level=level,
        tau=tau,
        tpr=tpr,
        tnr=tnr,
        f1=f1,
        support=support,
        excluded=excluded,
        n_pixels=n_pixels,
        ood_predicted=ood_predicted,
        ood_recall=ood_recall,
        confusion=confusion,
    )


def _ood_recall(pred: np.ndarray, truth: np.ndarray) -> float | None:
    ood_truth = truth == 0
    if not ood_truth.any():
        return None
    return float(np.count_nonzero(pred[ood_truth] == 0)) / int(np.count_nonzero(ood_truth))


def one_vs_rest_metrics(pred, truth, n_classes: int, level: int = 0, tau: float = 0.0) -> MetricReport:
    """Per-class metrics tallied pixel by pixel.

    ``truth`` uses level codes: -1 unannotated (skipped), 0 OOD, 1..n_classes.
    Positives of class c are its truth pixels; every other evaluated pixel,
    truth-0 included, is a negative. An OOD prediction is a miss for its truth class.
    """
    pred, truth = _check_pair(pred, truth)
    tp, fp, fn, tn = (np.zeros(n_classes, dtype=np.int64) for _ in range(4))
    for c in range(1, n_classes + 1):
        positive = truth == c
        predicted = pred == c
        tp[c - 1] = np.count_nonzero(positive & predicted)
        fn[c - 1] = np.count_nonzero(positive & ~predicted)
        fp[c - 1] = np.count_nonzero(~positive & predicted)
        tn[c - 1] = np.count_nonzero(~positive & ~predicted)
    return _report_from_counts(
        ClassCounts(tp=tp, fp=fp, fn=fn, tn=tn),
        level=level,
        tau=tau,
        n_pixels=truth.size,
        ood_predicted=int(np.count_nonzero(pred == 0)),
        ood_recall=_ood_recall(pred, truth),
        confusion=None,
    )


def confusion_counts(pred, truth, n_classes: int) -> np.ndarray:
    """(n+1) x (n+1) integer counts, index 0 = OOD."""
    pred, truth = _check_pair(pred, truth)
    labels = np.arange(n_classes + 1)
    if truth.size == 0:
        return np.zeros((n_classes + 1, n_classes + 1), dtype=np.int64)
    return sk_confusion_matrix(truth, pred, labels=labels).astype(np.int64)


def confusion_matrix(pred, truth, tree: LabelTree, level: int) -> ConfusionMatrix:
    view = level_view(tree, level)
    return ConfusionMatrix(
        counts=confusion_counts(pred, truth, view.n_classes),
        names=("OOD", *view.names),
    )


def metrics_from_confusion(confusion: ConfusionMatrix, level: int = 0, tau: float = 0.0) -> MetricReport:
    """Same report as ``one_vs_rest_metrics``, derived from the confusion matrix."""
    counts = confusion.counts
    ood_truth = int(counts[0].sum())
    ood_recall = counts[0, 0] / ood_truth if ood_truth else None
    return _report_from_counts(
        confusion.class_counts(),
        level=level,
        tau=tau,
        n_pixels=confusion.total,
        ood_predicted=int(counts[:, 0].sum()),
        ood_recall=None if ood_recall is None else float(ood_recall),
        confusion=confusion,
    )


def evaluate(pred, truth, tree: LabelTree, level: int, tau: float) -> MetricReport:
    """Metrics plus confusion matrix for one set of level-coded predictions."""
    return metrics_from_confusion(confusion_matrix(pred, truth, tree, level), level=level, tau=tau)


@dataclass(frozen=True)
class FoldAveragedConfusion:
    names: tuple[str, ...]
    # Mean of per-fold row-normalized matrices
    mean_normalized: np.ndarray
    raw_sum: np.ndarray
    folds: int


def average_confusion(matrices: Sequence[ConfusionMatrix]) -> FoldAveragedConfusion:
    """Average row-normalized matrices over folds; raw counts are summed alongside."""
    if not matrices:
        raise EvaluationError("No confusion matrices to average")
    shapes = {m.counts.shape for m in matrices}
    if len(shapes) != 1:
        raise DimensionMismatchError("Confusion matrices differ in shape")
    return FoldAveragedConfusion(
        names=matrices[0].names,
        mean_normalized=np.mean([m.row_normalized for m in matrices], axis=0),
        raw_sum=np.sum([m.counts for m in matrices], axis=0),
        folds=len(matrices),
    )


def cross_branch_error(normalized: np.ndarray, support: np.ndarray | None = None) -> float:
    """Mean over ID truth rows of the mass predicted as another ID class.

    ``normalized`` is a row-normalized matrix with index 0 = OOD. Rows without
    support (all zero, or zero in ``support``) are skipped.
    """
    id_block = np.asarray(normalized, dtype=np.float64)[1:, 1:]
    if support is None:
        rows = np.asarray(normalized)[1:].sum(axis=1) > 0
    else:
        rows = np.asarray(support)[1:] > 0
    if not rows.any():
        return 0.0
    off_diagonal = id_block.sum(axis=1) - np.diag(id_block)
    return float(off_diagonal[rows].mean())
