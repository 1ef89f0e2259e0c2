"""Shared plumbing for subcommands."""

import argparse
import json
import logging
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterator, Sequence

from hierarchy.exceptions import SchemeError
from hierarchy.models import EdgeWeightScheme

from ..errors import UsageError
from ..manifest import RunManifest, manifest_path_for

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Command:
    """A subcommand: its name, how to add its arguments, and the handler to call."""

    name: str
    help: str
    configure: Callable[[argparse.ArgumentParser], None]
    handler: Callable[[argparse.Namespace], int]

    def register(self, subparsers) -> None:
        parser = subparsers.add_parser(self.name, help=self.help)
        self.configure(parser)
        parser.set_defaults(handler=self.handler)


def require_path(path: str | Path | None, what: str) -> Path:
    if path is None:
        raise UsageError(f"{what} is required")
    path = Path(path)
    if not path.exists():
        raise UsageError(f"{what} not found: {path}")
    return path


def load_json(path: str | Path | None, what: str = "config file") -> dict[str, Any]:
    if path is None:
        return {}
    path = require_path(path, what)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise UsageError(f"{what} {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise UsageError(f"{what} {path} must hold a JSON object")
    return data


def parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError as e:
        raise UsageError(f"Expected comma-separated numbers, got {text!r}") from e


def load_custom_weights(text: str) -> dict[int, float]:
    try:
        weights = json.loads(text)
        return {int(k): float(v) for k, v in weights.items()}
    except (json.JSONDecodeError, AttributeError, TypeError, ValueError) as e:
        raise UsageError(f"--custom-weights must be a JSON object of level: weight, got {text!r}") from e


def parse_scheme(name: str | None, custom: str | None) -> EdgeWeightScheme | None:
    """``--scheme`` name or ``--custom-weights`` JSON ({"level": weight}); None when neither is given."""
    if custom is not None:
        return EdgeWeightScheme.custom(load_custom_weights(custom))
    if name is None:
        return None
    if name == "custom":
        raise UsageError("--scheme custom needs --custom-weights")
    try:
        return EdgeWeightScheme.from_name(name)
    except SchemeError as e:
        raise UsageError(str(e)) from e


def add_scheme_arguments(parser: argparse.ArgumentParser, default: str | None = None) -> None:
    parser.add_argument("--scheme", choices=["leaf", "top", "equal", "hier", "custom"], default=default,
                        help="edge weight scheme")
    parser.add_argument("--custom-weights", help='JSON object mapping edge level to weight, e.g. \'{"0": 1, "1": 2}\'')


@contextmanager
def manifest_run(
    command: str,
    config: dict[str, Any],
    output: str | Path,
    seed: int | None = None,
    inputs: Sequence[str | Path] = (),
) -> Iterator[RunManifest]:
    """Write the manifest before the body runs and finalize it afterwards, failed or not."""
    manifest = RunManifest(command=command, config=config, seed=seed)
    for path in inputs:
        manifest.add_input(path)
    path = manifest_path_for(output)
    manifest.write(path)
    try:
        yield manifest
    except Exception as e:
        manifest.finalize(path, e)
        raise
    manifest.finalize(path)
    logger.info("Manifest written to %s", path)
