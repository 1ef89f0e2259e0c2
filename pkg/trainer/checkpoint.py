"""Checkpoint files: JSON header followed by a little-endian float64 parameter blob.

Layout: magic ``b"TLCK"``, uint32 (little-endian) header length, UTF-8 JSON
header, then every layer's weights (row-major) and biases.
"""

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from transport.exceptions import DimensionMismatchError

from .config import TrainConfig
from .exceptions import CheckpointError
from .model import Model

MAGIC = b"TLCK"


@dataclass(frozen=True)
class CheckpointHeader:
    layer_sizes: tuple[int, ...]
    config: dict[str, Any]
    config_hash: str
    tree_digest: str
    epochs_trained: int

    @classmethod
    def from_record(cls, record: dict) -> "CheckpointHeader":
        return cls(
            layer_sizes=tuple(record["layer_sizes"]),
            config=record["config"],
            config_hash=record["config_hash"],
            tree_digest=record["tree_digest"],
            epochs_trained=int(record["epochs_trained"]),
        )

    def to_record(self) -> dict:
        return {
            "layer_sizes": list(self.layer_sizes),
            "config": self.config,
            "config_hash": self.config_hash,
            "tree_digest": self.tree_digest,
            "epochs_trained": self.epochs_trained,
        }


def save_checkpoint(path: str | Path, model: Model, cfg: TrainConfig, tree_digest: str, epochs_trained: int) -> Path:
    header = CheckpointHeader(
        layer_sizes=model.layer_sizes,
        config=cfg.to_dict(),
        config_hash=cfg.config_hash(),
        tree_digest=tree_digest,
        epochs_trained=epochs_trained,
    )
    header_bytes = json.dumps(header.to_record(), sort_keys=True).encode("utf-8")
    blob = model.flat().astype("<f8").tobytes()

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(MAGIC + struct.pack("<I", len(header_bytes)) + header_bytes + blob)
    return path


def load_checkpoint(path: str | Path) -> tuple[Model, CheckpointHeader]:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}", path=str(path), original_error=e) from e

    if len(data) < 8 or data[:4] != MAGIC:
        raise CheckpointError(f"{path} is not a checkpoint file", path=str(path))
    (header_length,) = struct.unpack("<I", data[4:8])
    try:
        header = CheckpointHeader.from_record(json.loads(data[8:8 + header_length].decode("utf-8")))
    except (ValueError, KeyError) as e:
        raise CheckpointError(f"Corrupt checkpoint header in {path}: {e}", path=str(path), original_error=e) from e

    blob = data[8 + header_length:]
    if len(blob) % 8:
        raise CheckpointError(f"Truncated parameter blob in {path}", path=str(path))
    flat = np.frombuffer(blob, dtype="<f8").astype(np.float64)
    try:
        model = Model.from_flat(header.layer_sizes, flat)
    except DimensionMismatchError as e:
        raise CheckpointError(f"Parameter blob does not match layers: {e}", path=str(path), original_error=e) from e
    return model, header
