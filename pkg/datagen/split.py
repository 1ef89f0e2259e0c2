"""Image-level cross-validation folds."""

import numpy as np

from .exceptions import SplitError
from .models import Dataset, Fold


def split(dataset: Dataset | int, folds: int, seed: int) -> list[Fold]:
    """Partition images into ``folds`` validation folds after a seeded shuffle.

    Fold f validates on its own images and tunes on the validation images of
    fold f+1 (cyclically); training uses everything else. With two folds
    there is nothing left to hold out, so tuning is empty and callers fall
    back to the validation images.
    """
    n_images = len(dataset.images) if isinstance(dataset, Dataset) else int(dataset)
    if folds < 2:
        raise SplitError(f"Need at least 2 folds, got {folds}")
    if folds > n_images:
        raise SplitError(f"Cannot form {folds} folds from {n_images} images")

    order = np.random.default_rng(seed).permutation(n_images)
    parts = [tuple(sorted(int(i) for i in part)) for part in np.array_split(order, folds)]

    result = []
    for f, validation in enumerate(parts):
        tuning = parts[(f + 1) % folds] if folds >= 3 else ()
        held = set(validation) | set(tuning)
        train = tuple(i for i in range(n_images) if i not in held)
        result.append(Fold(index=f, train=train, validation=validation, tuning=tuning))
    return result
