from .exceptions import (
    AnnotationBudgetError,
    DataGenError,
    DatasetStoreError,
    InvalidSpecError,
    SplitError,
)
from .generator import class_means, gen_dataset, gen_image, gen_tree
from .models import (
    OOD,
    UNANNOTATED,
    AnnotationField,
    Dataset,
    Fold,
    GeneratedImage,
    GenSpec,
    ImageRecord,
    SpectralImage,
)
from .split import split
from .store import DatasetRepository

__all__ = [
    "OOD",
    "UNANNOTATED",
    "AnnotationField",
    "Dataset",
    "DatasetRepository",
    "Fold",
    "GeneratedImage",
    "GenSpec",
    "ImageRecord",
    "SpectralImage",
    "class_means",
    "gen_dataset",
    "gen_image",
    "gen_tree",
    "split",
    "AnnotationBudgetError",
    "DataGenError",
    "DatasetStoreError",
    "InvalidSpecError",
    "SplitError",
]
