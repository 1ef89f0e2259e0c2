from .exceptions import EmptyGridError, EvaluationError, InvalidLevelError, LengthMismatchError
from .levels import LevelView, level_labels, level_scores, level_view, resolve_level
from .metrics import (
    ConfusionMatrix,
    FoldAveragedConfusion,
    MetricReport,
    average_confusion,
    confusion_counts,
    confusion_matrix,
    cross_branch_error,
    evaluate,
    metrics_from_confusion,
    one_vs_rest_metrics,
)
from .ood import DEFAULT_GRID, TauSweep, as_grid, decide, select_tau, sweep_tau
from .stats import TTestResult, paired_t_test

__all__ = [
    "DEFAULT_GRID",
    "ConfusionMatrix",
    "FoldAveragedConfusion",
    "LevelView",
    "MetricReport",
    "TTestResult",
    "TauSweep",
    "as_grid",
    "average_confusion",
    "confusion_counts",
    "confusion_matrix",
    "cross_branch_error",
    "decide",
    "evaluate",
    "level_labels",
    "level_scores",
    "level_view",
    "metrics_from_confusion",
    "one_vs_rest_metrics",
    "paired_t_test",
    "resolve_level",
    "select_tau",
    "sweep_tau",
    "EmptyGridError",
    "EvaluationError",
    "InvalidLevelError",
    "LengthMismatchError",
]
