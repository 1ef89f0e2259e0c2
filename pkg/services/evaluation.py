"""Evaluation service - scores images once, picks tau_m and reports at tau_0 and tau_m."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from evaluation import (
    MetricReport,
    TauSweep,
    decide,
    evaluate,
    level_labels,
    level_scores,
    level_view,
    one_vs_rest_metrics,
    resolve_level,
    sweep_tau,
)
from hierarchy.models import LabelTree
from trainer.loop import predict_probabilities
from trainer.model import Model

logger = logging.getLogger(__name__)

TAU_ZERO = "tau0"
TAU_SELECTED = "tau_m"


@dataclass(frozen=True)
class LevelScores:
    """Scores and level-coded truth of the evaluated pixels of several images."""

    level: int
    scores: np.ndarray
    truth: np.ndarray
    # offsets[i]:offsets[i+1] are the pixels of image i
    offsets: np.ndarray

    @property
    def n_images(self) -> int:
        return self.offsets.size - 1

    def image(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        window = slice(self.offsets[i], self.offsets[i + 1])
        return self.scores[window], self.truth[window]


@dataclass(frozen=True)
class ThresholdResult:
    level: int
    tau_name: str
    tau: float
    report: MetricReport
    # Macro F1 of every evaluated image, NaN where no ID class is annotated
    per_image_f1: np.ndarray


@dataclass
class FoldEvaluation:
    fold: int
    sweeps: dict[int, TauSweep] = field(default_factory=dict)
    results: list[ThresholdResult] = field(default_factory=list)

    def result(self, level: int, tau_name: str) -> ThresholdResult:
        for result in self.results:
            if result.level == level and result.tau_name == tau_name:
                return result
        raise KeyError(f"No result for level {level} at {tau_name}")


class EvaluationService:
    """Runs the threshold protocol for one trained model."""

    def __init__(
        self,
        tree: LabelTree,
        levels: Sequence[int | str] = ("top", "leaf"),
        grid: Sequence[float] | None = None,
        workers: int = 1,
    ):
        self.tree = tree
        # Duplicates collapse on trees where top and leaf coincide
        self.levels = tuple(dict.fromkeys(resolve_level(tree, level) for level in levels))
        self.grid = grid
        self.workers = max(1, workers)

    def score(
        self,
        model: Model,
        cubes: Sequence[np.ndarray],
        labels: Sequence[np.ndarray],
    ) -> dict[int, LevelScores]:
        """Per-level scores of every annotated pixel (truth 0 included)."""

        def one_image(i: int) -> tuple[np.ndarray, np.ndarray]:
            flat = np.asarray(labels[i]).reshape(-1)
            keep = flat >= 0
            return predict_probabilities(model, cubes[i])[keep], flat[keep]

        # map keeps input order, so the merge is deterministic for any worker count
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            per_image = list(pool.map(one_image, range(len(cubes))))

        sizes = [truth.size for _, truth in per_image]
        offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        C = self.tree.C
        probs = np.concatenate([p for p, _ in per_image]) if per_image else np.zeros((0, C))
        truth = np.concatenate([t for _, t in per_image]) if per_image else np.zeros(0, dtype=np.int64)

        return {
            level: LevelScores(
                level=level,
                scores=level_scores(probs, self.tree, level),
                truth=level_labels(truth, self.tree, level),
                offsets=offsets,
            )
            for level in self.levels
        }

    def select(self, scored: dict[int, LevelScores]) -> dict[int, TauSweep]:
        return {level: sweep_tau(s.scores, s.truth, self.grid) for level, s in scored.items()}

    def report(self, scored: LevelScores, tau: float, tau_name: str) -> ThresholdResult:
        pred = decide(scored.scores, tau)
        report = evaluate(pred, scored.truth, self.tree, scored.level, tau)
        n_classes = level_view(self.tree, scored.level).n_classes
        per_image = np.empty(scored.n_images)
        for i in range(scored.n_images):
            scores, truth = scored.image(i)
            per_image[i] = one_vs_rest_metrics(decide(scores, tau), truth, n_classes).macro_f1
        return ThresholdResult(
            level=scored.level,
            tau_name=tau_name,
            tau=tau,
            report=report,
            per_image_f1=per_image,
        )

    def evaluate_fold(
        self,
        model: Model,
        tuning: tuple[Sequence[np.ndarray], Sequence[np.ndarray]],
        validation: tuple[Sequence[np.ndarray], Sequence[np.ndarray]],
        fold: int = 0,
        tau: float | None = None,
    ) -> FoldEvaluation:
        """Select tau_m on the tuning images, then report on the validation images.

        A fixed ``tau`` skips the selection and is reported as tau_m.
        """
        result = FoldEvaluation(fold=fold)
        if tau is None:
            result.sweeps = self.select(self.score(model, *tuning))
        scored = self.score(model, *validation)

        for level, level_scored in scored.items():
            tau_m = tau if tau is not None else result.sweeps[level].tau
            result.results.append(self.report(level_scored, 0.0, TAU_ZERO))
            result.results.append(self.report(level_scored, tau_m, TAU_SELECTED))
            logger.info(
                "Fold %d level %d: macro F1 %.4f at tau0, %.4f at tau_m=%.2f",
                fold, level,
                result.results[-2].report.macro_f1, result.results[-1].report.macro_f1, tau_m,
            )
        return result
