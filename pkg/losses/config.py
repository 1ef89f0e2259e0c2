"""
Configuration for loss selection and mixing
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from hierarchy.exceptions import SchemeError
from hierarchy.models import EdgeWeightScheme, SchemeKind

from .exceptions import LossConfigError


class LossKind(str, Enum):
    """Supported training losses"""
    CE = "ce"
    WASSERSTEIN = "w"
    WASSERSTEIN_CE = "wce"
    TREE_CE = "tce"


# Default mixing weights for Wasserstein+CE
DEFAULT_ALPHA = 0.5
DEFAULT_BETA = 0.5
DEFAULT_EPSILON = 1e-12


@dataclass(frozen=True)
class LossConfig:
    """Which loss to train with and how its terms are weighted"""
    loss_kind: LossKind = LossKind.CE
    scheme: EdgeWeightScheme = field(default_factory=lambda: EdgeWeightScheme(SchemeKind.LEAF_ONLY))
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise LossConfigError(
                f"alpha and beta must be non-negative (alpha={self.alpha}, beta={self.beta})",
                field_name="alpha" if self.alpha < 0 else "beta",
            )
        if self.loss_kind == LossKind.WASSERSTEIN_CE and self.alpha == 0 and self.beta == 0:
            raise LossConfigError("alpha and beta cannot both be zero for wce", field_name="alpha")
        if not self.epsilon > 0:
            raise LossConfigError(f"epsilon must be positive, got {self.epsilon}", field_name="epsilon")

    @property
    def uses_scheme(self) -> bool:
        """CE never looks at tree weights."""
        return self.loss_kind != LossKind.CE

    @property
    def label(self) -> str:
        return f"{self.loss_kind.value}-{self.scheme.name}"

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "LossConfig":
        """Build from a config-file section; unknown keys are rejected."""
        known = {"loss", "scheme", "alpha", "beta", "epsilon", "custom_weights"}
        unknown = set(data) - known
        if unknown:
            raise LossConfigError(f"Unknown loss config keys: {sorted(unknown)}")

        try:
            if "custom_weights" in data:
                scheme = EdgeWeightScheme.custom({int(k): v for k, v in data["custom_weights"].items()})
            else:
                scheme = EdgeWeightScheme.from_name(data.get("scheme", SchemeKind.LEAF_ONLY.value))
        except SchemeError as e:
            raise LossConfigError(str(e), field_name="scheme") from e
        except (AttributeError, TypeError, ValueError) as e:
            raise LossConfigError(f"custom_weights must map edge levels to weights: {e}", field_name="custom_weights") from e

        try:
            kind = LossKind(data.get("loss", LossKind.CE.value))
        except ValueError as e:
            raise LossConfigError(f"Unknown loss kind: {data.get('loss')}", field_name="loss") from e

        try:
            mixing = {
                "alpha": float(data.get("alpha", DEFAULT_ALPHA)),
                "beta": float(data.get("beta", DEFAULT_BETA)),
                "epsilon": float(data.get("epsilon", DEFAULT_EPSILON)),
            }
        except (TypeError, ValueError) as e:
            raise LossConfigError(f"alpha, beta and epsilon must be numbers: {e}") from e
        return cls(loss_kind=kind, scheme=scheme, **mixing)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "loss": self.loss_kind.value,
            "scheme": self.scheme.kind.value,
            "alpha": self.alpha,
            "beta": self.beta,
            "epsilon": self.epsilon,
        }
        if self.scheme.kind == SchemeKind.CUSTOM:
            data["custom_weights"] = {str(k): v for k, v in self.scheme.custom_weights}
        return data
