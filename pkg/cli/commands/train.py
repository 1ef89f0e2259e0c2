"""train: fit the per-pixel classifier with one loss configuration."""

import argparse
import logging
from pathlib import Path

from datagen import DatasetRepository
from hierarchy.tree import parse_tree
from losses.config import LossKind
from trainer.checkpoint import save_checkpoint
from trainer.config import TrainConfig
from trainer.loop import train

from .. import reports
from ..errors import UsageError
from .base import Command, add_scheme_arguments, load_custom_weights, load_json, manifest_run, require_path

logger = logging.getLogger(__name__)

LOSS_KEYS = ("loss", "scheme", "alpha", "beta", "epsilon", "custom_weights")


def configure(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", required=True, help="dataset directory")
    parser.add_argument("--tree", help="tree JSON; defaults to the dataset's tree")
    parser.add_argument("--fold", type=int, help="train on this fold's training images only")
    parser.add_argument("--config", help="training config JSON; flags override it")
    parser.add_argument("--loss", choices=[kind.value for kind in LossKind])
    add_scheme_arguments(parser)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--lr", type=float)
    parser.add_argument("--gamma", type=float, help="exponential learning-rate decay per epoch")
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--batch-size", type=int)
    parser.add_argument("--pixels-per-image", type=int)
    parser.add_argument("--hidden", type=int, nargs="*", help="hidden layer sizes")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", required=True, help="checkpoint file to write")
    parser.add_argument("--trace", help="loss-trace CSV; defaults to <out>.trace.csv")


def resolve_config(args: argparse.Namespace) -> TrainConfig:
    """Flags > config file > defaults."""
    data = load_json(args.config)
    section = data.pop("loss", None)
    loss = dict(section) if isinstance(section, dict) else {}
    if section is not None and not isinstance(section, dict):
        loss["loss"] = section
    for key in LOSS_KEYS[1:]:
        if key in data:
            loss[key] = data.pop(key)

    if args.loss is not None:
        loss["loss"] = args.loss
    if args.custom_weights is not None:
        loss["custom_weights"] = load_custom_weights(args.custom_weights)
        loss.pop("scheme", None)
    elif args.scheme is not None:
        if args.scheme == "custom":
            raise UsageError("--scheme custom needs --custom-weights")
        loss["scheme"] = args.scheme
        loss.pop("custom_weights", None)
    for key in ("alpha", "beta"):
        if getattr(args, key) is not None:
            loss[key] = getattr(args, key)

    cfg = TrainConfig.from_dict({**data, "loss": loss})
    return cfg.with_overrides(
        lr=args.lr,
        lr_gamma=args.gamma,
        epochs=args.epochs,
        batch_size=args.batch_size,
        pixels_per_image=args.pixels_per_image,
        hidden_sizes=None if args.hidden is None else tuple(args.hidden),
        seed=args.seed,
    )


def run(args: argparse.Namespace) -> int:
    data_dir = require_path(args.data, "dataset directory")
    tree_path = require_path(args.tree, "tree file") if args.tree else None
    cfg = resolve_config(args)
    if cfg.loss.loss_kind == LossKind.CE and (args.scheme not in (None, "leaf") or args.custom_weights):
        logger.warning("--loss ce ignores edge weights; scheme %s is unused", cfg.loss.scheme.name)

    out = Path(args.out)
    trace_path = Path(args.trace) if args.trace else out.with_name(out.name + ".trace.csv")
    inputs = [data_dir] + ([tree_path] if tree_path else [])
    with manifest_run("train", cfg.to_dict(), out, seed=cfg.seed, inputs=inputs) as manifest:
        manifest.declare_output(out)
        manifest.declare_output(trace_path)

        dataset = DatasetRepository.load(data_dir)
        tree = parse_tree(tree_path.read_text(encoding="utf-8")) if tree_path else dataset.tree
        indices = None
        if args.fold is not None:
            if not 0 <= args.fold < len(dataset.splits):
                raise UsageError(f"Fold {args.fold} does not exist ({len(dataset.splits)} folds)")
            indices = dataset.splits[args.fold].train

        result = train(dataset.cubes(indices), dataset.labels(indices), tree, cfg)
        save_checkpoint(out, result.model, cfg, tree.digest(), epochs_trained=cfg.epochs)
        reports.write_csv(trace_path, reports.TRACE_HEADER, reports.trace_rows(result.trace))
    logger.info("Checkpoint written to %s", out)
    return 0


train_command = Command("train", "train a per-pixel classifier", configure, run)
