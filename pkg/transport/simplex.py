"""Validation helpers for probability vectors on the label simplex."""

import numpy as np

from .exceptions import DimensionMismatchError, NotOneHotError, NotOnSimplexError

# Float drift tolerated before renormalizing; anything larger is a real bug
RENORMALIZE_TOLERANCE = 1e-6


def as_prob_vector(values, size: int | None = None, name: str = "p") -> np.ndarray:
    """Return ``values`` as a float64 simplex point, renormalizing tiny drift.

    Raises:
        DimensionMismatchError: wrong length or not one-dimensional
        NotOnSimplexError: negative / non-finite entries or |sum - 1| > 1e-6
    """
    p = np.asarray(values, dtype=np.float64)
    if p.ndim != 1:
        raise DimensionMismatchError(f"{name} must be one-dimensional, got shape {p.shape}")
    if size is not None and p.shape[0] != size:
        raise DimensionMismatchError(
            f"{name} has {p.shape[0]} entries, expected {size}", expected=size, actual=p.shape[0]
        )
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise NotOnSimplexError(f"{name} has negative or non-finite entries")
    total = p.sum()
    if abs(total - 1.0) > RENORMALIZE_TOLERANCE:
        raise NotOnSimplexError(f"{name} sums to {total!r}, not 1")
    if total != 1.0:
        p = p / total
    return p


def hot_index(g, size: int | None = None) -> int:
    """Index of the single 1 in a crisp one-hot vector."""
    g = np.asarray(g, dtype=np.float64)
    if g.ndim != 1:
        raise DimensionMismatchError(f"g must be one-dimensional, got shape {g.shape}")
    if size is not None and g.shape[0] != size:
        raise DimensionMismatchError(
            f"g has {g.shape[0]} entries, expected {size}", expected=size, actual=g.shape[0]
        )
    hot = np.flatnonzero(g)
    if hot.size != 1 or g[hot[0]] != 1.0:
        raise NotOneHotError(f"g is not one-hot: nonzero entries at {hot.tolist()}")
    return int(hot[0])


def one_hot(index: int, size: int) -> np.ndarray:
    g = np.zeros(size, dtype=np.float64)
    g[index] = 1.0
    return g
