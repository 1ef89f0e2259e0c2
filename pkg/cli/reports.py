"""CSV writers with fixed column orders."""

import csv
import logging
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from evaluation import MetricReport, TauSweep
from evaluation.metrics import FoldAveragedConfusion
from hierarchy.models import DistanceMatrix
from services.evaluation import ThresholdResult
from services.experiment import ConfusionSummary, ExperimentReport
from trainer.loop import EpochStats

logger = logging.getLogger(__name__)

TRACE_HEADER = ("epoch", "lr", "loss", "pixels", "steps")
METRICS_HEADER = (
    "fold", "class", "level", "tau_name", "tau", "support", "TPR", "BACC", "F1", "ood_recall", "ood_fraction",
)
CONFUSION_HEADER = ("fold", "level", "tau_name", "truth", "predicted", "count", "row_normalized")
AVERAGED_CONFUSION_HEADER = ("label", "seed", "truth", "predicted", "mean_row_normalized", "raw_sum")
SWEEP_HEADER = ("fold", "level", "tau", "macro_F1", "ood_fraction")
TABLE_HEADER = (
    "seed", "loss", "scheme", "level", "metric",
    "tau0_mean", "tau0_std", "tau_m_mean", "tau_m_std", "tau_m",
)
TTEST_HEADER = ("seed", "a", "b", "n", "t", "p", "mean_difference", "degenerate")
CROSS_BRANCH_HEADER = ("seed", "label", "cross_branch_error")
FAILURE_HEADER = ("seed", "fold", "label", "error")

MACRO = "macro"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return "nan" if np.isnan(value) else f"{float(value):.6f}"
    return str(value)


def emit_csv(stream: TextIO, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        emit_csv(f, header, rows)
    logger.info("Wrote %s", path)
    return path


def trace_rows(trace: Sequence[EpochStats]):
    for stats in trace:
        yield stats.epoch, stats.lr, stats.loss, stats.pixels, stats.steps


def metric_rows(fold: int | str, result: ThresholdResult, names: Sequence[str]):
    report: MetricReport = result.report
    for c in range(report.n_classes):
        yield (
            fold, names[c], result.level, result.tau_name, result.tau,
            int(report.support[c]), report.tpr[c], report.bacc[c], report.f1[c], None, None,
        )
    yield (
        fold, MACRO, result.level, result.tau_name, result.tau,
        int(report.support.sum()), report.macro_tpr, report.macro_bacc, report.macro_f1,
        report.ood_recall, report.ood_fraction,
    )


def confusion_rows(fold: int | str, result: ThresholdResult):
    confusion = result.report.confusion
    normalized = confusion.row_normalized
    for i, truth in enumerate(confusion.names):
        for j, predicted in enumerate(confusion.names):
            yield (
                fold, result.level, result.tau_name, truth, predicted,
                int(confusion.counts[i, j]), normalized[i, j],
            )


def averaged_confusion_rows(label: str, seed: str, names: Sequence[str], mean_normalized: np.ndarray, raw_sum: np.ndarray):
    for i, truth in enumerate(names):
        for j, predicted in enumerate(names):
            yield label, seed, truth, predicted, mean_normalized[i, j], int(raw_sum[i, j])


def fold_averaged_rows(label: str, averaged: FoldAveragedConfusion):
    return averaged_confusion_rows(label, "-", averaged.names, averaged.mean_normalized, averaged.raw_sum)


def summary_rows(summaries: Sequence[ConfusionSummary]):
    for summary in summaries:
        yield from averaged_confusion_rows(
            summary.label, summary.seed, summary.names, summary.mean_normalized, summary.raw_sum
        )


def sweep_rows(fold: int | str, level: int, sweep: TauSweep):
    for tau, f1, ood in zip(sweep.grid, sweep.macro_f1, sweep.ood_fraction):
        yield fold, level, tau, f1, ood


def distance_rows(distance: DistanceMatrix):
    for name, row in zip(distance.leaf_names, distance.entries):
        yield (name, *row)


def write_experiment(report: ExperimentReport, directory: str | Path) -> list[Path]:
    root = Path(directory)
    written = [
        write_csv(
            root / "table.csv",
            TABLE_HEADER,
            (
                (r.seed, r.loss, r.scheme, r.level, r.metric, r.tau0_mean, r.tau0_std,
                 r.tau_m_mean, r.tau_m_std, r.tau_m_value)
                for r in report.rows
            ),
        ),
        write_csv(
            root / "ttests.csv",
            TTEST_HEADER,
            ((t.seed, t.a, t.b, t.n, t.t, t.p, t.mean_difference, t.degenerate) for t in report.t_tests),
        ),
        write_csv(root / "confusion_top.csv", AVERAGED_CONFUSION_HEADER, summary_rows(report.confusions)),
        write_csv(
            root / "cross_branch.csv",
            CROSS_BRANCH_HEADER,
            ((s.seed, s.label, s.cross_branch_error) for s in report.confusions),
        ),
        write_csv(
            root / "failures.csv",
            FAILURE_HEADER,
            ((c.seed, c.fold, c.label, c.error) for c in report.failures),
        ),
    ]
    return written


EXPERIMENT_FILES = ("table.csv", "ttests.csv", "confusion_top.csv", "cross_branch.csv", "failures.csv")
