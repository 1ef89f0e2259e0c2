"""Run manifests: written before a command runs and finalized after."""

import hashlib
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from . import __version__

logger = logging.getLogger(__name__)

MANIFEST_NAME = "run_manifest.json"


def file_digest(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def manifest_path_for(output: str | Path) -> Path:
    """Directories get ``run_manifest.json`` inside; files get ``<file>.manifest.json``."""
    output = Path(output)
    if output.is_dir() or not output.suffix:
        return output / MANIFEST_NAME
    return output.with_name(output.name + ".manifest.json")


@dataclass
class RunManifest:
    command: str
    config: dict[str, Any]
    seed: int | None = None
    version: str = __version__
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    status: str = "running"
    started_at: float = field(default_factory=time.time)
    wall_clock_seconds: float | None = None
    error: str | None = None

    def add_input(self, path: str | Path) -> None:
        path = Path(path)
        if path.is_dir():
            for child in sorted(p for p in path.rglob("*") if p.is_file()):
                self.inputs[str(child)] = file_digest(child)
        else:
            self.inputs[str(path)] = file_digest(path)

    def declare_output(self, path: str | Path) -> None:
        self.outputs[str(path)] = ""

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    def finalize(self, path: str | Path, error: Exception | None = None) -> Path:
        """Record output digests and the outcome; missing outputs keep an empty digest."""
        self.wall_clock_seconds = round(time.time() - self.started_at, 3)
        for output in list(self.outputs):
            if Path(output).is_file():
                self.outputs[output] = file_digest(output)
        if error is None:
            self.status = "ok"
        else:
            self.status = "failed"
            self.error = f"{type(error).__name__}: {error}"
        logger.debug("Finalizing manifest %s (%s)", path, self.status)
        return self.write(path)
