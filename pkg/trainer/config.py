"""
Configuration for the per-pixel classifier and its optimiser
"""

import hashlib
import json
from dataclasses import dataclass, field, fields, replace
from typing import Any

from losses.config import LossConfig

from .exceptions import TrainConfigError


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters; defaults: Adam at 1e-4, exponential decay 0.999, 50 epochs"""
    lr: float = 1e-4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    lr_gamma: float = 0.999
    # Images per optimisation step
    batch_size: int = 5
    # Annotated pixels sampled from each image per step
    pixels_per_image: int = 1024
    epochs: int = 50
    seed: int = 0
    hidden_sizes: tuple[int, ...] = (64, 64)
    loss: LossConfig = field(default_factory=LossConfig)

    def __post_init__(self):
        if self.lr < 0:
            raise TrainConfigError(f"lr must be non-negative, got {self.lr}", field_name="lr")
        for name in ("adam_beta1", "adam_beta2"):
            value = getattr(self, name)
            if not 0 <= value < 1:
                raise TrainConfigError(f"{name} must lie in [0, 1), got {value}", field_name=name)
        if not 0 < self.lr_gamma <= 1:
            raise TrainConfigError(f"lr_gamma must lie in (0, 1], got {self.lr_gamma}", field_name="lr_gamma")
        if self.adam_epsilon <= 0:
            raise TrainConfigError("adam_epsilon must be positive", field_name="adam_epsilon")
        if self.batch_size < 1:
            raise TrainConfigError("batch_size must be at least 1", field_name="batch_size")
        if self.pixels_per_image < 1:
            raise TrainConfigError("pixels_per_image must be at least 1", field_name="pixels_per_image")
        if self.epochs < 0:
            raise TrainConfigError("epochs must be non-negative", field_name="epochs")
        if any(size < 1 for size in self.hidden_sizes):
            raise TrainConfigError("hidden sizes must be positive", field_name="hidden_sizes")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TrainConfig":
        """Build from a config-file section. Loss settings may sit under ``loss`` or at top level."""
        names = {f.name for f in fields(cls)} - {"loss"}
        loss_keys = {"loss", "scheme", "alpha", "beta", "epsilon", "custom_weights"}
        unknown = set(data) - names - loss_keys
        if unknown:
            raise TrainConfigError(f"Unknown train config keys: {sorted(unknown)}")

        loss_section = data.get("loss")
        if isinstance(loss_section, dict):
            loss = LossConfig.from_dict(loss_section)
        else:
            loss = LossConfig.from_dict({k: v for k, v in data.items() if k in loss_keys})

        values = {k: v for k, v in data.items() if k in names}
        if "hidden_sizes" in values:
            values["hidden_sizes"] = tuple(int(s) for s in values["hidden_sizes"])
        return cls(loss=loss, **values)

    def to_dict(self) -> dict[str, Any]:
        data = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "loss"}
        data["hidden_sizes"] = list(self.hidden_sizes)
        data["loss"] = self.loss.to_dict()
        return data

    def with_overrides(self, **overrides: Any) -> "TrainConfig":
        """Apply non-None overrides (CLI flags win over file and defaults)."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def config_hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()
