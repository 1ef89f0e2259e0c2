"""Label tree, edge-weight scheme and distance matrix models."""

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from .exceptions import SchemeError, TreeError, WeightsUnassignedError


class SchemeKind(str, Enum):
    LEAF_ONLY = "leaf"
    TOP_ONLY = "top"
    EQUAL = "equal"
    HIERARCHICAL = "hier"
    CUSTOM = "custom"


# Top, middle, bottom edge weights of the hierarchical scheme
HIERARCHICAL_WEIGHTS = {2: 100.0, 1: 10.0, 0: 1.0}


@dataclass(frozen=True)
class EdgeWeightScheme:
    """How edge weights are derived from the level of an edge's child node."""

    kind: SchemeKind
    custom_weights: tuple[tuple[int, float], ...] = ()

    @classmethod
    def from_name(cls, name: str) -> "EdgeWeightScheme":
        try:
            return cls(kind=SchemeKind(str(name).lower()))
        except ValueError as e:
            known = ", ".join(kind.value for kind in SchemeKind)
            raise SchemeError(f"Unknown scheme {name!r}; expected one of {known}", scheme=str(name)) from e

    @classmethod
    def custom(cls, weights: dict[int, float]) -> "EdgeWeightScheme":
        return cls(
            kind=SchemeKind.CUSTOM,
            custom_weights=tuple(sorted((int(k), float(v)) for k, v in weights.items())),
        )

    @property
    def name(self) -> str:
        if self.kind != SchemeKind.CUSTOM:
            return self.kind.value
        levels = ",".join(f"{level}:{weight:g}" for level, weight in self.custom_weights)
        return f"custom[{levels}]"

    @property
    def weights_by_level(self) -> dict[int, float]:
        return dict(self.custom_weights)


@dataclass(frozen=True)
class TreeNode:
    id: int
    name: str
    parent: int | None
    edge_weight: float | None = None

    @classmethod
    def from_record(cls, record: dict) -> "TreeNode":
        if not isinstance(record, dict):
            raise TreeError(f"Node record must be an object, got {type(record).__name__}: {record!r}")
        weight = record.get("edge_weight")
        parent = record.get("parent")
        return cls(
            id=int(record["id"]),
            name=str(record.get("name", record["id"])),
            parent=None if parent is None else int(parent),
            edge_weight=None if weight is None else float(weight),
        )

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "parent": self.parent,
            "edge_weight": self.edge_weight,
        }


def _compute_levels(children: dict[int, tuple[int, ...]], root: int) -> dict[int, int]:
    """Leaves sit at 0, every other node at 1 + the max level of its children."""
    levels: dict[int, int] = {}
    # Iterative post-order so deep trees do not hit the recursion limit
    stack: list[tuple[int, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        kids = children[node]
        if not kids:
            levels[node] = 0
        elif expanded:
            levels[node] = 1 + max(levels[k] for k in kids)
        else:
            stack.append((node, True))
            stack.extend((k, False) for k in kids)
    return levels


@dataclass(frozen=True)
class LabelTree:
    """A validated, immutable rooted label hierarchy.

    Build instances through ``hierarchy.tree.build_tree`` or
    ``hierarchy.tree.parse_tree``; the constructor itself does not validate.
    Nodes are kept in ascending id order, which is also the index order of
    every per-node vector (aggregated probabilities, node weights).
    """

    nodes: tuple[TreeNode, ...]
    scheme: EdgeWeightScheme | None = None

    @cached_property
    def node_ids(self) -> tuple[int, ...]:
        return tuple(node.id for node in self.nodes)

    @cached_property
    def index_of(self) -> dict[int, int]:
        return {node_id: i for i, node_id in enumerate(self.node_ids)}

    @cached_property
    def root_id(self) -> int:
        return next(node.id for node in self.nodes if node.parent is None)

    @cached_property
    def children(self) -> dict[int, tuple[int, ...]]:
        kids: dict[int, list[int]] = {node.id: [] for node in self.nodes}
        for node in self.nodes:
            if node.parent is not None:
                kids[node.parent].append(node.id)
        return {node_id: tuple(sorted(ids)) for node_id, ids in kids.items()}

    @cached_property
    def leaf_order(self) -> tuple[int, ...]:
        return tuple(node_id for node_id in self.node_ids if not self.children[node_id])

    @property
    def C(self) -> int:
        return len(self.leaf_order)

    @cached_property
    def level_of(self) -> dict[int, int]:
        return _compute_levels(self.children, self.root_id)

    @property
    def K(self) -> int:
        return self.level_of[self.root_id]

    @property
    def weights_assigned(self) -> bool:
        return all(n.edge_weight is not None for n in self.nodes if n.parent is not None)

    def node(self, node_id: int) -> TreeNode:
        return self.nodes[self.index_of[node_id]]

    def ancestors(self, node_id: int) -> list[int]:
        """Path from ``node_id`` (inclusive) up to the root (inclusive)."""
        path = [node_id]
        while (parent := self.node(path[-1]).parent) is not None:
            path.append(parent)
        return path

    @property
    def leaf_names(self) -> tuple[str, ...]:
        return tuple(self.node(leaf).name for leaf in self.leaf_order)

    @cached_property
    def node_weights(self) -> np.ndarray:
        """w_v per node in index order; the root contributes no term and holds 0."""
        if not self.weights_assigned:
            raise WeightsUnassignedError("Tree has no edge weights; apply a scheme first")
        weights = np.zeros(len(self.nodes), dtype=np.float64)
        for i, node in enumerate(self.nodes):
            if node.parent is not None:
                weights[i] = node.edge_weight
        weights.setflags(write=False)
        return weights

    @cached_property
    def parent_index(self) -> np.ndarray:
        """Index of each node's parent in index order; -1 for the root."""
        parents = np.array(
            [-1 if n.parent is None else self.index_of[n.parent] for n in self.nodes], dtype=np.intp
        )
        parents.setflags(write=False)
        return parents

    @cached_property
    def bottom_up_order(self) -> tuple[int, ...]:
        """Node indices ordered so every node comes before its parent."""
        return tuple(sorted(range(len(self.nodes)), key=lambda i: self.level_of[self.nodes[i].id]))

    @cached_property
    def leaf_index(self) -> np.ndarray:
        """Node index of each leaf, in leaf order."""
        indices = np.array([self.index_of[leaf] for leaf in self.leaf_order], dtype=np.intp)
        indices.setflags(write=False)
        return indices

    @cached_property
    def adjacency(self) -> "AdjacencyOperator":
        from .adjacency import AdjacencyOperator

        return AdjacencyOperator.from_tree(self)

    @cached_property
    def subtree_leaf_matrix(self) -> np.ndarray:
        """(#nodes x C) 0/1 matrix: entry (v, l) is 1 iff leaf l lies in the subtree of v.

        This is ``(sum_k A^k)`` restricted to the leaf columns.
        """
        closure = self.adjacency.closure()
        leaf_cols = [self.index_of[leaf] for leaf in self.leaf_order]
        matrix = np.ascontiguousarray(closure[:, leaf_cols])
        matrix.setflags(write=False)
        return matrix

    def to_document(self) -> dict:
        return {"nodes": [node.to_record() for node in self.nodes]}

    def digest(self) -> str:
        payload = json.dumps(self.to_document(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()


@dataclass(frozen=True)
class DistanceMatrix:
    """C x C tree-induced ground distances between leaves."""

    entries: np.ndarray
    leaf_names: tuple[str, ...]
    scheme: EdgeWeightScheme | None = field(default=None)

    @property
    def C(self) -> int:
        return self.entries.shape[0]

    @property
    def is_zero(self) -> bool:
        return not np.any(self.entries)

    def column(self, leaf_index: int) -> np.ndarray:
        return self.entries[:, leaf_index]
