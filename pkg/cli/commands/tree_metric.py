"""dump-distance and wasserstein: look at the tree metric directly."""

import argparse
import json
import logging
import sys
from pathlib import Path

from hierarchy.distance import ground_distance
from hierarchy.models import LabelTree
from hierarchy.tree import parse_tree
from hierarchy.weights import assign_weights
from transport import one_hot, wasserstein_crisp, wasserstein_lp, wasserstein_tree

from .. import reports
from ..errors import UsageError
from .base import Command, add_scheme_arguments, manifest_run, parse_floats, parse_scheme, require_path

logger = logging.getLogger(__name__)

METHODS = ("lp", "tree", "crisp")


def _weighted_tree(args: argparse.Namespace) -> LabelTree:
    tree = parse_tree(require_path(args.tree, "tree file").read_text(encoding="utf-8"))
    scheme = parse_scheme(args.scheme, args.custom_weights)
    if scheme is not None:
        return assign_weights(tree, scheme)
    if not tree.weights_assigned:
        raise UsageError("Tree file has no edge weights; pass --scheme or --custom-weights")
    return tree


def configure_distance(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tree", required=True)
    add_scheme_arguments(parser)
    parser.add_argument("--out", help="CSV file; stdout when omitted")


def run_distance(args: argparse.Namespace) -> int:
    tree = _weighted_tree(args)
    distance = ground_distance(tree)
    if distance.is_zero:
        logger.warning("All ground distances are zero under this scheme")
    header = ("leaf", *distance.leaf_names)
    if args.out is None:
        reports.emit_csv(sys.stdout, header, reports.distance_rows(distance))
        return 0

    out = Path(args.out)
    config = {"scheme": None if tree.scheme is None else tree.scheme.name}
    with manifest_run("dump-distance", config, out, inputs=[Path(args.tree)]) as manifest:
        manifest.declare_output(out)
        reports.write_csv(out, header, reports.distance_rows(distance))
    return 0


def configure_wasserstein(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tree", required=True)
    add_scheme_arguments(parser)
    parser.add_argument("--p", required=True, help="comma-separated probability vector")
    target = parser.add_mutually_exclusive_group(required=True)
    target.add_argument("--q", help="comma-separated probability vector")
    target.add_argument("--target", type=int, help="one-hot target class code (1..C)")
    parser.add_argument("--method", choices=[*METHODS, "all"], default="all")
    parser.add_argument("--plan", action="store_true", help="include the LP transport plan")


def run_wasserstein(args: argparse.Namespace) -> int:
    tree = _weighted_tree(args)
    p = parse_floats(args.p)
    if args.target is not None:
        if not 1 <= args.target <= tree.C:
            raise UsageError(f"--target must be a class code in 1..{tree.C}")
        q = one_hot(args.target - 1, tree.C)
    else:
        q = parse_floats(args.q)

    methods = METHODS if args.method == "all" else (args.method,)
    distance = ground_distance(tree)
    result: dict = {"C": tree.C, "leaf_names": list(tree.leaf_names)}
    for method in methods:
        if method == "lp":
            lp = wasserstein_lp(p, q, distance, with_plan=args.plan)
            result["lp"] = lp.cost
            if args.plan:
                result["plan"] = lp.plan.flows.tolist()
        elif method == "tree":
            result["tree"] = wasserstein_tree(p, q, tree)
        elif args.target is not None:
            result["crisp"] = wasserstein_crisp(p, q, distance)
        elif args.method == "crisp":
            raise UsageError("--method crisp needs a one-hot --target")
    sys.stdout.write(json.dumps(result, indent=2) + "\n")
    return 0


dump_distance_command = Command(
    "dump-distance", "print the leaf ground-distance matrix", configure_distance, run_distance
)
wasserstein_command = Command(
    "wasserstein", "Wasserstein distance between two label distributions", configure_wasserstein, run_wasserstein
)
