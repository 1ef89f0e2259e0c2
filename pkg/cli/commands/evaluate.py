"""eval and ood-sweep: threshold protocol on trained checkpoints."""

import argparse
import logging
import math
from pathlib import Path

from datagen import Dataset, DatasetRepository
from evaluation import average_confusion
from hierarchy.models import LabelTree
from hierarchy.tree import parse_tree
from services.evaluation import TAU_SELECTED, EvaluationService
from services.experiment import ExperimentSettings
from trainer.checkpoint import load_checkpoint
from trainer.exceptions import CheckpointError
from trainer.model import Model

from .. import reports
from ..errors import UsageError
from .base import Command, manifest_run, require_path

logger = logging.getLogger(__name__)

DEFAULT_LEVELS = ["top", "leaf"]


def grid_from_step(step: float) -> list[float]:
    if not 0 < step <= 1:
        raise UsageError(f"--grid-step must lie in (0, 1], got {step}")
    n = math.floor(1.0 / step + 1e-9)
    grid = [min(round(i * step, 10), 1.0) for i in range(n + 1)]
    # Steps that do not divide 1 still end the sweep at tau = 1
    if grid[-1] < 1.0:
        grid.append(1.0)
    return grid


def _common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", required=True, help="dataset directory")
    parser.add_argument("--tree", help="tree JSON; defaults to the dataset's tree")
    parser.add_argument("--level", action="append", help="evaluation level: top, leaf or an integer (repeatable)")
    parser.add_argument("--grid-step", type=float, default=0.01, help="tau grid spacing")


def _load(args: argparse.Namespace) -> tuple[Dataset, LabelTree]:
    data_dir = require_path(args.data, "dataset directory")
    dataset = DatasetRepository.load(data_dir)
    if args.tree:
        tree = parse_tree(require_path(args.tree, "tree file").read_text(encoding="utf-8"))
    else:
        tree = dataset.tree
    return dataset, tree


def _load_model(path: Path, tree: LabelTree) -> Model:
    model, header = load_checkpoint(path)
    if header.tree_digest != tree.digest():
        raise CheckpointError(f"{path} was trained on a different label tree", path=str(path))
    if model.n_outputs != tree.C:
        raise CheckpointError(f"{path} predicts {model.n_outputs} classes, tree has {tree.C}", path=str(path))
    return model


def _fold_images(dataset: Dataset, fold: int | None) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(tuning, validation) image indices; without a fold both are every image."""
    if fold is None:
        everything = tuple(range(len(dataset.images)))
        return everything, everything
    if not 0 <= fold < len(dataset.splits):
        raise UsageError(f"Fold {fold} does not exist ({len(dataset.splits)} folds)")
    split = dataset.splits[fold]
    return split.tuning or split.validation, split.validation


def configure_eval(parser: argparse.ArgumentParser) -> None:
    _common_arguments(parser)
    parser.add_argument("--checkpoint", nargs="+", required=True, help="one checkpoint per fold")
    parser.add_argument("--fold", type=int, nargs="*", help="fold of each checkpoint, in the same order")
    parser.add_argument("--tau", type=float, help="fixed tau_m instead of selecting it")
    parser.add_argument("--out", required=True, help="output directory for CSV reports")


def run_eval(args: argparse.Namespace) -> int:
    checkpoints = [require_path(path, "checkpoint") for path in args.checkpoint]
    folds = args.fold if args.fold else [None] * len(checkpoints)
    if len(folds) != len(checkpoints):
        raise UsageError("--fold must list one fold per --checkpoint")
    if args.tau is not None and not 0 <= args.tau <= 1:
        raise UsageError("--tau must lie in [0, 1]")
    grid = grid_from_step(args.grid_step)
    levels = args.level or DEFAULT_LEVELS

    out = Path(args.out)
    config = {
        "checkpoints": [str(p) for p in checkpoints],
        "folds": folds,
        "levels": levels,
        "tau": args.tau,
        "grid_step": args.grid_step,
    }
    inputs = [Path(args.data), *checkpoints] + ([Path(args.tree)] if args.tree else [])
    with manifest_run("eval", config, out, inputs=inputs) as manifest:
        dataset, tree = _load(args)
        settings = ExperimentSettings.from_env()
        service = EvaluationService(tree, levels, grid, workers=settings.workers)

        metric_rows, confusion_rows, sweep_rows = [], [], []
        selected: dict[int, list] = {}
        for path, fold in zip(checkpoints, folds):
            model = _load_model(path, tree)
            tuning, validation = _fold_images(dataset, fold)
            label = "all" if fold is None else fold
            evaluation = service.evaluate_fold(
                model,
                tuning=(dataset.cubes(tuning), dataset.labels(tuning, ood=True)),
                validation=(dataset.cubes(validation), dataset.labels(validation, ood=True)),
                fold=-1 if fold is None else fold,
                tau=args.tau,
            )
            sweeps = evaluation.sweeps or service.select(
                service.score(model, dataset.cubes(validation), dataset.labels(validation, ood=True))
            )
            for result in evaluation.results:
                names = result.report.confusion.names[1:]
                metric_rows.extend(reports.metric_rows(label, result, names))
                confusion_rows.extend(reports.confusion_rows(label, result))
                if result.tau_name == TAU_SELECTED:
                    selected.setdefault(result.level, []).append(result.report.confusion)
            for level, sweep in sweeps.items():
                sweep_rows.extend(reports.sweep_rows(label, level, sweep))

        outputs = [
            reports.write_csv(out / "metrics.csv", reports.METRICS_HEADER, metric_rows),
            reports.write_csv(out / "confusion.csv", reports.CONFUSION_HEADER, confusion_rows),
            reports.write_csv(out / "sweep.csv", reports.SWEEP_HEADER, sweep_rows),
        ]
        if len(checkpoints) > 1:
            averaged_rows = []
            for level, matrices in selected.items():
                averaged_rows.extend(reports.fold_averaged_rows(f"level{level}", average_confusion(matrices)))
            outputs.append(
                reports.write_csv(out / "confusion_averaged.csv", reports.AVERAGED_CONFUSION_HEADER, averaged_rows)
            )
        for path in outputs:
            manifest.declare_output(path)
    return 0


def configure_sweep(parser: argparse.ArgumentParser) -> None:
    _common_arguments(parser)
    parser.add_argument("--checkpoint", required=True)
    parser.add_argument("--fold", type=int, help="sweep on this fold's validation images")
    parser.add_argument("--out", required=True, help="sweep CSV to write")


def run_sweep(args: argparse.Namespace) -> int:
    checkpoint = require_path(args.checkpoint, "checkpoint")
    grid = grid_from_step(args.grid_step)
    levels = args.level or DEFAULT_LEVELS
    out = Path(args.out)
    config = {"checkpoint": str(checkpoint), "fold": args.fold, "levels": levels, "grid_step": args.grid_step}
    with manifest_run("ood-sweep", config, out, inputs=[Path(args.data), checkpoint]) as manifest:
        manifest.declare_output(out)
        dataset, tree = _load(args)
        model = _load_model(checkpoint, tree)
        _, validation = _fold_images(dataset, args.fold)
        service = EvaluationService(tree, levels, grid, workers=ExperimentSettings.from_env().workers)
        sweeps = service.select(
            service.score(model, dataset.cubes(validation), dataset.labels(validation, ood=True))
        )
        label = "all" if args.fold is None else args.fold
        rows = [row for level, sweep in sweeps.items() for row in reports.sweep_rows(label, level, sweep)]
        reports.write_csv(out, reports.SWEEP_HEADER, rows)
    return 0


eval_command = Command("eval", "evaluate checkpoints at tau_0 and tau_m", configure_eval, run_eval)
ood_sweep_command = Command("ood-sweep", "macro F1 and OOD fraction over a tau grid", configure_sweep, run_sweep)
