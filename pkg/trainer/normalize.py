"""Per-pixel l1 normalisation of spectra."""

import numpy as np


def l1_normalize(pixels) -> tuple[np.ndarray, int]:
    """Scale every pixel spectrum (last axis) to unit l1 norm.

    All-zero pixels are degenerate sensor readings: they are returned
    unchanged and counted.

    Returns:
        (normalized pixels, number of all-zero pixels)
    """
    x = np.asarray(pixels, dtype=np.float64)
    norms = np.abs(x).sum(axis=-1, keepdims=True)
    degenerate = norms == 0
    normalized = np.divide(x, norms, out=x.copy(), where=~degenerate)
    return normalized, int(np.count_nonzero(degenerate))
