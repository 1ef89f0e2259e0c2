"""Data models for synthetic spectral datasets."""

from dataclasses import asdict, dataclass, field, fields
from typing import Any

import numpy as np

from hierarchy.models import LabelTree

from .exceptions import InvalidSpecError

# Label codes in annotation fields
UNANNOTATED = -1
OOD = 0


@dataclass(frozen=True)
class GenSpec:
    """Shape of the synthetic label tree and of the images drawn from it."""

    tops: int = 4
    mids_per_top: int = 3
    leaves_per_mid: int = 2
    # Additional top-level categories with a single mid and leaf each
    extra_tops: int = 0
    bands: int = 16
    height: int = 64
    width: int = 64
    n_images: int = 40
    folds: int = 5
    base_level: float = 2.0
    # Std of the random offsets added at each tree level, top to leaf
    top_spread: float = 0.8
    mid_spread: float = 0.35
    leaf_spread: float = 0.15
    noise_scale: float = 0.2
    # Per-pixel multiplicative brightness; (1, 1) disables it
    illumination_range: tuple[float, float] = (1.0, 1.0)
    regions_per_image: int = 12
    blob_radius_range: tuple[float, float] = (2.0, 6.0)
    annotated_fraction: float = 0.3
    # Class codes (1..C) of leaves whose pixels are never annotated for training
    held_out_leaves: tuple[int, ...] = ()
    seed: int = 0

    def __post_init__(self):
        for name in ("tops", "mids_per_top", "leaves_per_mid", "height", "width",
                     "n_images", "regions_per_image"):
            if getattr(self, name) < 1:
                raise InvalidSpecError(f"{name} must be at least 1", field_name=name)
        if self.extra_tops < 0:
            raise InvalidSpecError("extra_tops must be non-negative", field_name="extra_tops")
        if self.bands < 2:
            raise InvalidSpecError("bands must be at least 2", field_name="bands")
        if self.folds < 2:
            raise InvalidSpecError("folds must be at least 2", field_name="folds")
        if not 0 < self.annotated_fraction <= 1:
            raise InvalidSpecError("annotated_fraction must lie in (0, 1]", field_name="annotated_fraction")
        if self.noise_scale < 0:
            raise InvalidSpecError("noise_scale must be non-negative", field_name="noise_scale")
        low, high = self.illumination_range
        if not 0 < low <= high:
            raise InvalidSpecError("illumination_range must satisfy 0 < low <= high", field_name="illumination_range")
        r_low, r_high = self.blob_radius_range
        if not 0 < r_low <= r_high:
            raise InvalidSpecError("blob_radius_range must satisfy 0 < low <= high", field_name="blob_radius_range")
        if any(not 1 <= code <= self.n_leaves for code in self.held_out_leaves):
            raise InvalidSpecError(
                f"held_out_leaves must be class codes in 1..{self.n_leaves}", field_name="held_out_leaves"
            )
        if len(set(self.held_out_leaves)) >= self.n_leaves:
            raise InvalidSpecError("At least one leaf must stay in distribution", field_name="held_out_leaves")

    @property
    def n_leaves(self) -> int:
        return self.tops * self.mids_per_top * self.leaves_per_mid + self.extra_tops

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "GenSpec":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise InvalidSpecError(f"Unknown generation spec keys: {sorted(unknown)}")
        values = dict(data)
        for key in ("illumination_range", "blob_radius_range"):
            if key in values:
                values[key] = tuple(float(v) for v in values[key])
        if "held_out_leaves" in values:
            values["held_out_leaves"] = tuple(int(v) for v in values["held_out_leaves"])
        return cls(**values)

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        for key in ("illumination_range", "blob_radius_range", "held_out_leaves"):
            data[key] = list(data[key])
        return data


@dataclass(frozen=True)
class SpectralImage:
    """H x W x B nonnegative spectra stored as float32."""

    values: np.ndarray

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def bands(self) -> int:
        return self.values.shape[2]


@dataclass(frozen=True)
class AnnotationField:
    """H x W int32 labels: -1 unannotated, 1..C leaf class, 0 OOD (evaluation only)."""

    labels: np.ndarray

    @property
    def annotated_fraction(self) -> float:
        return float(np.count_nonzero(self.labels != UNANNOTATED)) / self.labels.size


@dataclass(frozen=True)
class GeneratedImage:
    image: SpectralImage
    annotation: AnnotationField
    # Evaluation annotation with held-out leaves labelled OOD; None without held-out leaves
    ood_annotation: AnnotationField | None = None


@dataclass(frozen=True)
class Fold:
    """Image indices of one cross-validation fold."""

    index: int
    train: tuple[int, ...]
    validation: tuple[int, ...]
    # Images removed from training and used to select the OOD threshold
    tuning: tuple[int, ...] = ()

    @classmethod
    def from_record(cls, record: dict) -> "Fold":
        return cls(
            index=int(record["index"]),
            train=tuple(record["train"]),
            validation=tuple(record["validation"]),
            tuning=tuple(record.get("tuning", ())),
        )

    def to_record(self) -> dict:
        return {
            "index": self.index,
            "train": list(self.train),
            "validation": list(self.validation),
            "tuning": list(self.tuning),
        }


@dataclass(frozen=True)
class ImageRecord:
    """One manifest entry: file names are relative to the dataset directory."""

    cube: str
    labels: str
    height: int
    width: int
    bands: int
    ood_labels: str | None = None

    @classmethod
    def from_record(cls, record: dict) -> "ImageRecord":
        return cls(
            cube=record["cube"],
            labels=record["labels"],
            height=int(record["height"]),
            width=int(record["width"]),
            bands=int(record["bands"]),
            ood_labels=record.get("ood_labels"),
        )

    def to_record(self) -> dict:
        record = {
            "cube": self.cube,
            "labels": self.labels,
            "height": self.height,
            "width": self.width,
            "bands": self.bands,
        }
        if self.ood_labels is not None:
            record["ood_labels"] = self.ood_labels
        return record


@dataclass
class Dataset:
    tree: LabelTree
    images: list[GeneratedImage]
    spec: GenSpec | None = None
    splits: list[Fold] = field(default_factory=list)

    def cubes(self, indices: tuple[int, ...] | list[int] | None = None) -> list[np.ndarray]:
        chosen = range(len(self.images)) if indices is None else indices
        return [self.images[i].image.values for i in chosen]

    def labels(self, indices: tuple[int, ...] | list[int] | None = None, ood: bool = False) -> list[np.ndarray]:
        chosen = range(len(self.images)) if indices is None else indices
        result = []
        for i in chosen:
            image = self.images[i]
            annotation = image.ood_annotation if ood and image.ood_annotation is not None else image.annotation
            result.append(annotation.labels)
        return result
