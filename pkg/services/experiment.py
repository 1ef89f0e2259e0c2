"""Experiment service - generate, cross-validate every loss configuration, and summarise."""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Any, Sequence

import numpy as np

from datagen import Dataset, GenSpec, gen_dataset, gen_tree, split
from evaluation import average_confusion, cross_branch_error, paired_t_test, resolve_level
from hierarchy.exceptions import TreeLossError
from losses.config import LossConfig
from trainer.config import TrainConfig
from trainer.loop import train

from .evaluation import TAU_SELECTED, TAU_ZERO, EvaluationService, ThresholdResult

logger = logging.getLogger(__name__)

METRICS = ("TPR", "BACC", "F1")
# Reported only when the generator holds leaves out of training
OOD_METRICS = ("OOD_recall", "OOD_fraction")
ALL_SEEDS = "mean"
DEFAULT_PAIRS = (("tce-hier", "tce-leaf"), ("wce-hier", "wce-leaf"))


@dataclass
class ExperimentSettings:
    """Process-level settings taken from the environment."""
    workers: int = 1

    @classmethod
    def from_env(cls) -> "ExperimentSettings":
        raw = os.getenv("TREELOSS_WORKERS", "1")
        try:
            workers = int(raw)
        except ValueError:
            logger.warning("Ignoring non-integer TREELOSS_WORKERS=%r", raw)
            workers = 1
        return cls(workers=max(1, workers))


@dataclass(frozen=True)
class ExperimentSpec:
    gen: GenSpec = field(default_factory=GenSpec)
    seeds: tuple[int, ...] = (0,)
    train: TrainConfig = field(default_factory=TrainConfig)
    losses: tuple[LossConfig, ...] = ()
    levels: tuple[str, ...] = ("top", "leaf")
    grid: tuple[float, ...] | None = None
    pairs: tuple[tuple[str, str], ...] = DEFAULT_PAIRS
    baseline: str = "ce-leaf"

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentSpec":
        known = {"gen", "seeds", "train", "losses", "levels", "grid", "pairs", "baseline"}
        unknown = set(data) - known
        if unknown:
            raise TreeLossError(f"Unknown experiment keys: {sorted(unknown)}")
        losses = tuple(LossConfig.from_dict(entry) for entry in data.get("losses", []))
        if not losses:
            raise TreeLossError("Experiment needs at least one loss configuration")
        grid = data.get("grid")
        return cls(
            gen=GenSpec.from_dict(data.get("gen", {})),
            seeds=tuple(int(s) for s in data.get("seeds", [0])),
            train=TrainConfig.from_dict(data.get("train", {})),
            losses=losses,
            levels=tuple(str(level) for level in data.get("levels", ["top", "leaf"])),
            grid=None if grid is None else tuple(float(t) for t in grid),
            pairs=tuple((str(a), str(b)) for a, b in data.get("pairs", DEFAULT_PAIRS)),
            baseline=str(data.get("baseline", "ce-leaf")),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "gen": self.gen.to_dict(),
            "seeds": list(self.seeds),
            "train": self.train.to_dict(),
            "losses": [loss.to_dict() for loss in self.losses],
            "levels": list(self.levels),
            "grid": None if self.grid is None else list(self.grid),
            "pairs": [list(pair) for pair in self.pairs],
            "baseline": self.baseline,
        }


@dataclass(frozen=True)
class CellTask:
    seed: int
    fold: int
    loss: LossConfig
    spec: ExperimentSpec


@dataclass
class CellResult:
    seed: int
    fold: int
    label: str
    results: list[ThresholdResult] = field(default_factory=list)
    final_loss: float | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def result(self, level: int, tau_name: str) -> ThresholdResult:
        for result in self.results:
            if result.level == level and result.tau_name == tau_name:
                return result
        raise KeyError(f"No result for level {level} at {tau_name}")


@dataclass(frozen=True)
class TableRow:
    seed: str
    loss: str
    scheme: str
    level: int
    metric: str
    tau0_mean: float
    tau0_std: float
    tau_m_mean: float
    tau_m_std: float
    tau_m_value: float


@dataclass(frozen=True)
class TTestRow:
    seed: str
    a: str
    b: str
    n: int
    t: float
    p: float
    mean_difference: float
    degenerate: bool


@dataclass(frozen=True)
class ConfusionSummary:
    seed: str
    label: str
    names: tuple[str, ...]
    mean_normalized: np.ndarray
    raw_sum: np.ndarray
    cross_branch_error: float


@dataclass
class ExperimentReport:
    rows: list[TableRow] = field(default_factory=list)
    t_tests: list[TTestRow] = field(default_factory=list)
    confusions: list[ConfusionSummary] = field(default_factory=list)
    failures: list[CellResult] = field(default_factory=list)
    cells: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures

    def row(self, seed: str, label: str, level: int, metric: str) -> TableRow:
        for row in self.rows:
            if row.seed == seed and f"{row.loss}-{row.scheme}" == label and row.level == level and row.metric == metric:
                return row
        raise KeyError(f"No row for {label} level {level} {metric} (seed {seed})")


@lru_cache(maxsize=4)
def _dataset(gen: GenSpec) -> tuple[Dataset, tuple]:
    """Dataset and folds for one generation spec; cached per worker process."""
    tree = gen_tree(gen)
    dataset = gen_dataset(tree, gen)
    return dataset, tuple(split(dataset, gen.folds, gen.seed))


def run_cell(task: CellTask) -> CellResult:
    """Train one loss configuration on one fold and evaluate it; errors are captured."""
    label = task.loss.label
    result = CellResult(seed=task.seed, fold=task.fold, label=label)
    try:
        dataset, folds = _dataset(replace(task.spec.gen, seed=task.seed))
        fold = folds[task.fold]
        cfg = replace(task.spec.train, loss=task.loss, seed=task.seed)
        trained = train(dataset.cubes(fold.train), dataset.labels(fold.train), dataset.tree, cfg)

        tuning = fold.tuning or fold.validation
        # Top level always runs: t-tests and confusion summaries read it
        service = EvaluationService(dataset.tree, ("top", *task.spec.levels), task.spec.grid)
        evaluation = service.evaluate_fold(
            trained.model,
            tuning=(dataset.cubes(tuning), dataset.labels(tuning, ood=True)),
            validation=(dataset.cubes(fold.validation), dataset.labels(fold.validation, ood=True)),
            fold=task.fold,
        )
        result.results = evaluation.results
        result.final_loss = trained.losses[-1] if trained.trace else None
    except TreeLossError as e:
        logger.error("Cell seed=%d fold=%d %s failed: %s", task.seed, task.fold, label, e)
        result.error = f"{type(e).__name__}: {e}"
    except Exception as e:
        # Numerical failures (e.g. LinAlgError) must not sink the whole run
        logger.exception("Cell seed=%d fold=%d %s crashed", task.seed, task.fold, label)
        result.error = f"{type(e).__name__}: {e}"
    return result


class ExperimentService:
    """Runs every (seed, fold, loss) cell and assembles the cross-validation report."""

    def __init__(self, spec: ExperimentSpec, settings: ExperimentSettings | None = None):
        self.spec = spec
        self.settings = settings or ExperimentSettings.from_env()

    @property
    def metrics(self) -> tuple[str, ...]:
        return METRICS + OOD_METRICS if self.spec.gen.held_out_leaves else METRICS

    def tasks(self) -> list[CellTask]:
        return [
            CellTask(seed=seed, fold=fold, loss=loss, spec=self.spec)
            for seed in self.spec.seeds
            for fold in range(self.spec.gen.folds)
            for loss in self.spec.losses
        ]

    def run(self) -> ExperimentReport:
        tasks = self.tasks()
        logger.info("Running %d experiment cells with %d workers", len(tasks), self.settings.workers)
        if self.settings.workers > 1:
            with ProcessPoolExecutor(max_workers=self.settings.workers) as pool:
                cells = list(pool.map(run_cell, tasks))
        else:
            cells = [run_cell(task) for task in tasks]
        return self.assemble(cells)

    def assemble(self, cells: Sequence[CellResult]) -> ExperimentReport:
        report = ExperimentReport(cells=len(cells))
        report.failures = [cell for cell in cells if not cell.ok]
        done = [cell for cell in cells if cell.ok]
        if not done:
            return report

        tree = gen_tree(self.spec.gen)
        levels = tuple(dict.fromkeys(resolve_level(tree, level) for level in self.spec.levels))
        top = tree.K - 1
        labels = [loss.label for loss in self.spec.losses]
        seeds = [str(seed) for seed in self.spec.seeds]

        by_key: dict[tuple[str, str], list[CellResult]] = {}
        for cell in done:
            by_key.setdefault((str(cell.seed), cell.label), []).append(cell)
        for group in by_key.values():
            group.sort(key=lambda c: c.fold)

        for loss in self.spec.losses:
            for level in levels:
                for metric in self.metrics:
                    seed_means = []
                    for seed in seeds:
                        group = by_key.get((seed, loss.label), [])
                        if not group:
                            continue
                        row = self._row(seed, loss, level, metric, group)
                        report.rows.append(row)
                        seed_means.append(row)
                    if len(seeds) > 1 and seed_means:
                        report.rows.append(self._seed_average(loss, level, metric, seed_means))

        for a, b in self.spec.pairs:
            if a not in labels or b not in labels:
                logger.warning("Skipping t-test %s vs %s: not both configured", a, b)
                continue
            pooled_a, pooled_b = [], []
            for seed in seeds:
                scores_a = self._per_image_f1(by_key.get((seed, a), []), top)
                scores_b = self._per_image_f1(by_key.get((seed, b), []), top)
                if scores_a.size != scores_b.size or scores_a.size == 0:
                    continue
                pooled_a.append(scores_a)
                pooled_b.append(scores_b)
                test = self._t_test(seed, a, b, scores_a, scores_b)
                if test is not None:
                    report.t_tests.append(test)
            if len(seeds) > 1 and pooled_a:
                test = self._t_test(ALL_SEEDS, a, b, np.concatenate(pooled_a), np.concatenate(pooled_b))
                if test is not None:
                    report.t_tests.append(test)

        for label in labels:
            summaries = []
            for seed in seeds:
                group = by_key.get((seed, label), [])
                if not group:
                    continue
                matrices = [cell.result(top, TAU_SELECTED).report.confusion for cell in group]
                averaged = average_confusion(matrices)
                summaries.append(
                    ConfusionSummary(
                        seed=seed,
                        label=label,
                        names=averaged.names,
                        mean_normalized=averaged.mean_normalized,
                        raw_sum=averaged.raw_sum,
                        cross_branch_error=cross_branch_error(averaged.mean_normalized, averaged.raw_sum.sum(axis=1)),
                    )
                )
            report.confusions.extend(summaries)
            if len(seeds) > 1 and summaries:
                mean_normalized = np.mean([s.mean_normalized for s in summaries], axis=0)
                raw_sum = np.sum([s.raw_sum for s in summaries], axis=0)
                report.confusions.append(
                    ConfusionSummary(
                        seed=ALL_SEEDS,
                        label=label,
                        names=summaries[0].names,
                        mean_normalized=mean_normalized,
                        raw_sum=raw_sum,
                        cross_branch_error=float(np.mean([s.cross_branch_error for s in summaries])),
                    )
                )
        return report

    @staticmethod
    def _metric(result: ThresholdResult, metric: str) -> float:
        report = result.report
        if metric == "OOD_recall":
            return float("nan") if report.ood_recall is None else report.ood_recall
        if metric == "OOD_fraction":
            return report.ood_fraction
        return {"TPR": report.macro_tpr, "BACC": report.macro_bacc, "F1": report.macro_f1}[metric]

    def _row(self, seed: str, loss: LossConfig, level: int, metric: str, group: list[CellResult]) -> TableRow:
        zero = np.array([self._metric(c.result(level, TAU_ZERO), metric) for c in group])
        selected = np.array([self._metric(c.result(level, TAU_SELECTED), metric) for c in group])
        taus = np.array([c.result(level, TAU_SELECTED).tau for c in group])
        return TableRow(
            seed=seed,
            loss=loss.loss_kind.value,
            scheme=loss.scheme.name,
            level=level,
            metric=metric,
            tau0_mean=float(np.nanmean(zero)),
            tau0_std=float(np.nanstd(zero)),
            tau_m_mean=float(np.nanmean(selected)),
            tau_m_std=float(np.nanstd(selected)),
            tau_m_value=float(taus.mean()),
        )

    @staticmethod
    def _seed_average(loss: LossConfig, level: int, metric: str, rows: list[TableRow]) -> TableRow:
        zero = np.array([r.tau0_mean for r in rows])
        selected = np.array([r.tau_m_mean for r in rows])
        return TableRow(
            seed=ALL_SEEDS,
            loss=loss.loss_kind.value,
            scheme=loss.scheme.name,
            level=level,
            metric=metric,
            tau0_mean=float(zero.mean()),
            tau0_std=float(zero.std()),
            tau_m_mean=float(selected.mean()),
            tau_m_std=float(selected.std()),
            tau_m_value=float(np.mean([r.tau_m_value for r in rows])),
        )

    @staticmethod
    def _per_image_f1(group: list[CellResult], level: int) -> np.ndarray:
        if not group:
            return np.zeros(0)
        return np.concatenate([cell.result(level, TAU_SELECTED).per_image_f1 for cell in group])

    @staticmethod
    def _t_test(seed: str, a: str, b: str, scores_a: np.ndarray, scores_b: np.ndarray) -> TTestRow | None:
        keep = ~(np.isnan(scores_a) | np.isnan(scores_b))
        try:
            test = paired_t_test(scores_a[keep], scores_b[keep])
        except TreeLossError as e:
            logger.warning("t-test %s vs %s (seed %s) skipped: %s", a, b, seed, e)
            return None
        return TTestRow(
            seed=seed,
            a=a,
            b=b,
            n=test.n,
            t=test.t,
            p=test.p,
            mean_difference=test.mean_difference,
            degenerate=test.degenerate,
        )
