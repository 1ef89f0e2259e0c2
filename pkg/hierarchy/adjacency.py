"""Parent-to-child adjacency operator over all tree nodes."""

from dataclasses import dataclass

import numpy as np

from .models import LabelTree


@dataclass(frozen=True)
class AdjacencyOperator:
    """A[u, v] = 1 when u is the parent of v, indexed in ascending node-id order.

    Applying A to a per-node vector moves every entry one step up the tree,
    so A is nilpotent: A^k = 0 for k > K.
    """

    matrix: np.ndarray
    depth: int

    @classmethod
    def from_tree(cls, tree: LabelTree) -> "AdjacencyOperator":
        n = len(tree.nodes)
        matrix = np.zeros((n, n), dtype=np.float64)
        for node in tree.nodes:
            if node.parent is not None:
                matrix[tree.index_of[node.parent], tree.index_of[node.id]] = 1.0
        matrix.setflags(write=False)
        return cls(matrix=matrix, depth=tree.K)

    def apply(self, vector: np.ndarray) -> np.ndarray:
        return self.matrix @ vector

    def power(self, k: int) -> np.ndarray:
        return np.linalg.matrix_power(self.matrix, k)

    def closure(self) -> np.ndarray:
        """sum_{k=0}^{K} A^k; higher powers vanish."""
        n = self.matrix.shape[0]
        total = np.eye(n)
        term = np.eye(n)
        for _ in range(self.depth):
            term = self.matrix @ term
            total = total + term
        return total
