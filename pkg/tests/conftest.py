"""Shared fixtures: small hand-built trees, seeded generators, a random-tree builder."""

import numpy as np
import pytest

from datagen import GenSpec, gen_tree
from hierarchy import EdgeWeightScheme, LabelTree, TreeNode, assign_weights, build_tree


def unit_tree(nodes: list[tuple[int, str, int | None]]) -> LabelTree:
    """Tree from (id, name, parent) triples with every edge weighted 1."""
    return build_tree(
        TreeNode(id=i, name=name, parent=parent, edge_weight=None if parent is None else 1.0)
        for i, name, parent in nodes
    )


def random_tree(rng: np.random.Generator, max_leaves: int = 12, max_weight: float = 5.0) -> LabelTree:
    """Random rooted tree with 2..max_leaves leaves and random nonnegative edge weights."""
    while True:
        n_nodes = int(rng.integers(3, 2 * max_leaves))
        parents = [None] + [int(rng.integers(0, i)) for i in range(1, n_nodes)]
        has_child = {p for p in parents if p is not None}
        n_leaves = n_nodes - len(has_child)
        if 2 <= n_leaves <= max_leaves:
            break
    weights = rng.uniform(0.0, max_weight, size=n_nodes)
    # Some exact zeros, as LeafOnly and TopOnly produce
    weights[rng.random(n_nodes) < 0.15] = 0.0
    return build_tree(
        TreeNode(id=i, name=f"n{i}", parent=p, edge_weight=None if p is None else float(weights[i]))
        for i, p in enumerate(parents)
    )


def random_simplex(rng: np.random.Generator, size: int) -> np.ndarray:
    p = rng.dirichlet(np.ones(size))
    return p / p.sum()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def two_leaf_tree() -> LabelTree:
    return unit_tree([(0, "root", None), (1, "x", 0), (2, "y", 0)])


@pytest.fixture
def three_leaf_tree() -> LabelTree:
    """Leaf a directly under the root; b and c under the internal node P."""
    return unit_tree([(0, "root", None), (1, "a", 0), (2, "P", 0), (3, "b", 2), (4, "c", 2)])


@pytest.fixture
def small_spec() -> GenSpec:
    return GenSpec(
        tops=2,
        mids_per_top=2,
        leaves_per_mid=2,
        bands=8,
        height=24,
        width=24,
        n_images=8,
        folds=4,
        regions_per_image=6,
        blob_radius_range=(1.5, 4.0),
        seed=3,
    )


@pytest.fixture
def balanced_tree(small_spec) -> LabelTree:
    """2 x 2 x 2 tree: 8 leaves, K = 3."""
    return gen_tree(small_spec)


@pytest.fixture
def hier_tree(balanced_tree) -> LabelTree:
    return assign_weights(balanced_tree, EdgeWeightScheme.from_name("hier"))
