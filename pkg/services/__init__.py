"""Services module - orchestration on top of the library packages."""

from .evaluation import EvaluationService, FoldEvaluation, LevelScores, ThresholdResult
from .experiment import ExperimentReport, ExperimentService, ExperimentSettings, ExperimentSpec, run_cell

__all__ = [
    "EvaluationService",
    "ExperimentReport",
    "ExperimentService",
    "ExperimentSettings",
    "ExperimentSpec",
    "FoldEvaluation",
    "LevelScores",
    "ThresholdResult",
    "run_cell",
]
