"""gen-tree and gen-data: synthetic label trees and datasets."""

import argparse
import logging
from pathlib import Path

from datagen import DatasetRepository, GenSpec, gen_dataset, gen_tree, split
from hierarchy.tree import dump_tree
from hierarchy.weights import assign_weights

from .base import Command, add_scheme_arguments, load_json, manifest_run, parse_scheme

logger = logging.getLogger(__name__)

# Flag destination -> GenSpec field
SPEC_FLAGS = {
    "tops": "tops",
    "mids": "mids_per_top",
    "leaves": "leaves_per_mid",
    "extra_tops": "extra_tops",
    "bands": "bands",
    "height": "height",
    "width": "width",
    "images": "n_images",
    "folds": "folds",
    "fraction": "annotated_fraction",
    "noise": "noise_scale",
    "seed": "seed",
}


def _add_shape_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--spec", help="generation spec JSON; flags override it")
    parser.add_argument("--tops", type=int)
    parser.add_argument("--mids", type=int, help="mid nodes per top node")
    parser.add_argument("--leaves", type=int, help="leaves per mid node")
    parser.add_argument("--extra-tops", type=int, help="extra single-leaf top categories")
    parser.add_argument("--seed", type=int)


def resolve_spec(args: argparse.Namespace) -> GenSpec:
    """Flags > spec file > defaults."""
    data = load_json(args.spec, "spec file")
    for flag, name in SPEC_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            data[name] = value
    if getattr(args, "illumination", None) is not None:
        data["illumination_range"] = args.illumination
    if getattr(args, "held_out", None):
        data["held_out_leaves"] = args.held_out
    return GenSpec.from_dict(data)


def configure_gen_tree(parser: argparse.ArgumentParser) -> None:
    _add_shape_arguments(parser)
    add_scheme_arguments(parser)
    parser.add_argument("--out", required=True, help="tree JSON to write")


def run_gen_tree(args: argparse.Namespace) -> int:
    spec = resolve_spec(args)
    tree = gen_tree(spec)
    scheme = parse_scheme(args.scheme, args.custom_weights)
    if scheme is not None:
        tree = assign_weights(tree, scheme)

    out = Path(args.out)
    config = {"spec": spec.to_dict(), "scheme": None if scheme is None else scheme.name}
    with manifest_run("gen-tree", config, out, seed=spec.seed) as manifest:
        out.parent.mkdir(parents=True, exist_ok=True)
        manifest.declare_output(out)
        out.write_text(dump_tree(tree) + "\n", encoding="utf-8")
    logger.info("Wrote tree with %d leaves (K=%d) to %s", tree.C, tree.K, out)
    return 0


def configure_gen_data(parser: argparse.ArgumentParser) -> None:
    _add_shape_arguments(parser)
    parser.add_argument("--bands", type=int)
    parser.add_argument("--height", type=int)
    parser.add_argument("--width", type=int)
    parser.add_argument("--images", type=int)
    parser.add_argument("--folds", type=int)
    parser.add_argument("--fraction", type=float, help="annotated pixel fraction")
    parser.add_argument("--noise", type=float, help="per-pixel noise scale")
    parser.add_argument("--illumination", type=float, nargs=2, metavar=("LOW", "HIGH"))
    parser.add_argument("--held-out", type=int, nargs="*", help="leaf class codes kept out of training")
    parser.add_argument("--out", required=True, help="dataset directory")


def run_gen_data(args: argparse.Namespace) -> int:
    spec = resolve_spec(args)
    out = Path(args.out)
    with manifest_run("gen-data", {"spec": spec.to_dict()}, out, seed=spec.seed) as manifest:
        tree = gen_tree(spec)
        dataset = gen_dataset(tree, spec)
        dataset.splits = split(dataset, spec.folds, spec.seed)
        for path in DatasetRepository.save(dataset, out):
            manifest.declare_output(path)
    return 0


gen_tree_command = Command("gen-tree", "generate a balanced synthetic label tree", configure_gen_tree, run_gen_tree)
gen_data_command = Command("gen-data", "generate a synthetic spectral dataset", configure_gen_data, run_gen_data)
