"""experiment: the full cross-validation protocol over loss configurations."""

import argparse
import logging
from dataclasses import replace
from pathlib import Path

from services.experiment import ALL_SEEDS, ExperimentReport, ExperimentService, ExperimentSettings, ExperimentSpec

from .. import reports
from .base import Command, load_json, manifest_run, require_path

logger = logging.getLogger(__name__)

DEFAULT_SPEC = Path("configs") / "benchmark.json"


def configure(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--spec", default=str(DEFAULT_SPEC), help="experiment spec JSON")
    parser.add_argument("--seeds", type=int, nargs="+", help="override the experiment file's seeds")
    parser.add_argument("--epochs", type=int, help="override the experiment file's training epochs")
    parser.add_argument("--out", required=True, help="output directory for the report")


def run(args: argparse.Namespace) -> int:
    spec_path = require_path(args.spec, "experiment spec")
    spec = ExperimentSpec.from_dict(load_json(spec_path, "experiment spec"))
    if args.seeds:
        spec = replace(spec, seeds=tuple(args.seeds))
    if args.epochs is not None:
        spec = replace(spec, train=replace(spec.train, epochs=args.epochs))

    out = Path(args.out)
    seed = spec.seeds[0] if len(spec.seeds) == 1 else None
    with manifest_run("experiment", spec.to_dict(), out, seed=seed, inputs=[spec_path]) as manifest:
        for name in reports.EXPERIMENT_FILES:
            manifest.declare_output(out / name)
        service = ExperimentService(spec, ExperimentSettings.from_env())
        report = service.run()
        reports.write_experiment(report, out)

    _log_summary(spec, report)
    if not report.ok:
        logger.error("%d of %d cells failed; see %s", len(report.failures), report.cells, out / "failures.csv")
        return 1
    return 0


def _log_summary(spec: ExperimentSpec, report: ExperimentReport) -> None:
    seed = ALL_SEEDS if len(spec.seeds) > 1 else str(spec.seeds[0])
    top = max(row.level for row in report.rows) if report.rows else None
    if top is None:
        return
    try:
        baseline = report.row(seed, spec.baseline, top, "F1")
    except KeyError:
        return
    for loss in spec.losses:
        try:
            row = report.row(seed, loss.label, top, "F1")
        except KeyError:
            continue
        logger.info(
            "%s top-level F1 at tau_m: %.3f +- %.3f (baseline %s %.3f)",
            loss.label, row.tau_m_mean, row.tau_m_std, spec.baseline, baseline.tau_m_mean,
        )


experiment_command = Command("experiment", "cross-validate every loss configuration", configure, run)
