"""Evaluation granularity: level-k frontier nodes, scores and label codes."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from hierarchy.models import LabelTree
from hierarchy.tree import level_frontier
from transport.exceptions import DimensionMismatchError

from .exceptions import EvaluationError, InvalidLevelError

LEVEL_ALIASES = {"leaf": 0, "leaves": 0}


def resolve_level(tree: LabelTree, level: int | str) -> int:
    """Map ``level`` (an int, "leaf" or "top") onto [0, K-1]."""
    if isinstance(level, str):
        name = level.strip().lower()
        if name == "top":
            value = tree.K - 1
        elif name in LEVEL_ALIASES:
            value = LEVEL_ALIASES[name]
        else:
            try:
                value = int(name)
            except ValueError as e:
                raise InvalidLevelError(f"Unknown level {level!r}", level=level, K=tree.K) from e
    else:
        value = int(level)
    if not 0 <= value <= tree.K - 1:
        raise InvalidLevelError(
            f"Level {value} is outside [0, {tree.K - 1}] for this tree", level=level, K=tree.K
        )
    return value


@dataclass(frozen=True)
class LevelView:
    """Projection of leaf quantities onto the level-k frontier nodes."""

    level: int
    node_ids: tuple[int, ...]
    names: tuple[str, ...]
    # (n_k x C) 0/1 rows of the subtree-leaf matrix
    projection: np.ndarray
    # Level code per leaf code; the last entry is -1 so label -1 maps to itself
    code_table: np.ndarray

    @property
    def n_classes(self) -> int:
        return len(self.node_ids)


@lru_cache(maxsize=64)
def level_view(tree: LabelTree, level: int | str) -> LevelView:
    level = resolve_level(tree, level)
    node_ids = level_frontier(tree, level)
    rows = [tree.index_of[node_id] for node_id in node_ids]
    projection = np.ascontiguousarray(tree.subtree_leaf_matrix[rows])
    projection.setflags(write=False)

    table = np.zeros(tree.C + 2, dtype=np.int64)
    table[1:tree.C + 1] = np.argmax(projection, axis=0) + 1
    table[-1] = -1
    table.setflags(write=False)
    return LevelView(
        level=level,
        node_ids=node_ids,
        names=tuple(tree.node(node_id).name for node_id in node_ids),
        projection=projection,
        code_table=table,
    )


def level_scores(p, tree: LabelTree, level: int | str) -> np.ndarray:
    """Aggregated probabilities restricted to the level-k frontier.

    Accepts one probability vector (C,) or a batch (N, C).
    """
    view = level_view(tree, level)
    p = np.asarray(p, dtype=np.float64)
    if p.shape[-1] != tree.C:
        raise DimensionMismatchError(
            "Probability vectors do not match the tree's leaf count", expected=tree.C, actual=p.shape[-1]
        )
    return p @ view.projection.T


def level_labels(labels, tree: LabelTree, level: int | str) -> np.ndarray:
    """Map leaf codes 1..C to level-k codes; -1 and 0 pass through."""
    view = level_view(tree, level)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < -1 or labels.max() > tree.C):
        raise EvaluationError(f"Labels must lie in -1..{tree.C}")
    return view.code_table[labels]
