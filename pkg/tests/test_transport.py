import numpy as np
import pytest

from hierarchy import TreeNode, build_tree, ground_distance
from transport import (
    DimensionMismatchError,
    NotOneHotError,
    NotOnSimplexError,
    as_prob_vector,
    one_hot,
    wasserstein_crisp,
    wasserstein_crisp_gradient,
    wasserstein_lp,
    wasserstein_tree,
)

from .conftest import random_simplex, random_tree


def _scaled(tree, s):
    return build_tree(
        TreeNode(n.id, n.name, n.parent, None if n.parent is None else n.edge_weight * s) for n in tree.nodes
    )


class TestSimplex:
    def test_renormalizes_drift(self):
        p = as_prob_vector([0.5, 0.5 + 1e-9])
        assert p.sum() == pytest.approx(1.0, abs=1e-15)

    def test_rejects_real_error(self):
        with pytest.raises(NotOnSimplexError):
            as_prob_vector([0.5, 0.6])

    def test_rejects_negative(self):
        with pytest.raises(NotOnSimplexError):
            as_prob_vector([1.5, -0.5])

    def test_wrong_length(self):
        with pytest.raises(DimensionMismatchError):
            as_prob_vector([0.5, 0.5], size=3)

    def test_not_one_hot(self, three_leaf_tree):
        M = ground_distance(three_leaf_tree)
        with pytest.raises(NotOneHotError):
            wasserstein_crisp([0.2, 0.5, 0.3], [0.5, 0.5, 0.0], M)


class TestLP:
    def test_identical_marginals(self, three_leaf_tree, rng):
        p = random_simplex(rng, 3)
        assert wasserstein_lp(p, p, ground_distance(three_leaf_tree)).cost == pytest.approx(0.0, abs=1e-12)

    def test_two_leaves(self, two_leaf_tree):
        result = wasserstein_lp([1.0, 0.0], [0.0, 1.0], ground_distance(two_leaf_tree))
        assert result.cost == pytest.approx(2.0, abs=1e-12)

    def test_plan_is_optimal_certificate(self, rng):
        for _ in range(20):
            tree = random_tree(rng)
            M = ground_distance(tree)
            p, q = random_simplex(rng, tree.C), random_simplex(rng, tree.C)
            result = wasserstein_lp(p, q, M)
            assert result.plan.marginal_error(p, q) <= 1e-8
            assert result.plan.cost(M.entries) == pytest.approx(result.cost, abs=1e-12)

    def test_without_plan(self, two_leaf_tree):
        assert wasserstein_lp([0.3, 0.7], [0.6, 0.4], ground_distance(two_leaf_tree), with_plan=False).plan is None

    def test_size_mismatch(self, two_leaf_tree):
        with pytest.raises(DimensionMismatchError):
            wasserstein_lp([0.2, 0.3, 0.5], [0.5, 0.5], ground_distance(two_leaf_tree))


class TestCrisp:
    def test_zero_at_target(self, three_leaf_tree):
        assert wasserstein_crisp([0.0, 1.0, 0.0], one_hot(1, 3), ground_distance(three_leaf_tree)) == 0.0

    def test_half_mass_on_far_leaf(self, three_leaf_tree):
        M = ground_distance(three_leaf_tree)
        p, g = [0.5, 0.5, 0.0], one_hot(1, 3)
        assert wasserstein_crisp(p, g, M) == pytest.approx(1.5, abs=1e-12)
        assert wasserstein_lp(p, g, M).cost == pytest.approx(1.5, abs=1e-9)

    def test_matches_lp(self, rng):
        for _ in range(200):
            tree = random_tree(rng)
            M = ground_distance(tree)
            p = random_simplex(rng, tree.C)
            g = one_hot(int(rng.integers(tree.C)), tree.C)
            assert abs(wasserstein_crisp(p, g, M) - wasserstein_lp(p, g, M, with_plan=False).cost) <= 1e-9

    def test_gradient_is_column(self, two_leaf_tree):
        np.testing.assert_array_equal(
            wasserstein_crisp_gradient(one_hot(0, 2), ground_distance(two_leaf_tree)), [0.0, 2.0]
        )

    def test_gradient_zero_metric(self):
        np.testing.assert_array_equal(wasserstein_crisp_gradient(one_hot(2, 4), np.zeros((4, 4))), 0.0)

    def test_gradient_finite_differences(self, rng):
        h = 1e-6
        for _ in range(20):
            tree = random_tree(rng)
            M = ground_distance(tree)
            p = random_simplex(rng, tree.C) * 0.9 + 0.1 / tree.C
            g = one_hot(int(rng.integers(tree.C)), tree.C)
            grad = wasserstein_crisp_gradient(g, M)
            # Directions e_i - e_j stay on the simplex
            i, j = rng.choice(tree.C, size=2, replace=False)
            d = np.zeros(tree.C)
            d[i], d[j] = 1.0, -1.0
            fd = (wasserstein_crisp(p + h * d, g, M) - wasserstein_crisp(p - h * d, g, M)) / (2 * h)
            assert fd == pytest.approx(grad[i] - grad[j], abs=1e-7)


class TestTree:
    def test_identical(self, three_leaf_tree, rng):
        p = random_simplex(rng, 3)
        assert wasserstein_tree(p, p, three_leaf_tree) == 0.0

    def test_unit_path(self, three_leaf_tree):
        assert wasserstein_tree(one_hot(0, 3), one_hot(1, 3), three_leaf_tree) == pytest.approx(3.0)

    def test_matches_lp(self, rng):
        for _ in range(500):
            tree = random_tree(rng)
            p, q = random_simplex(rng, tree.C), random_simplex(rng, tree.C)
            lp = wasserstein_lp(p, q, ground_distance(tree), with_plan=False).cost
            assert abs(wasserstein_tree(p, q, tree) - lp) <= 1e-8

    def test_symmetry(self, rng):
        for _ in range(20):
            tree = random_tree(rng)
            p, q = random_simplex(rng, tree.C), random_simplex(rng, tree.C)
            assert wasserstein_tree(p, q, tree) == pytest.approx(wasserstein_tree(q, p, tree), abs=1e-12)

    def test_scale_equivariance(self, rng):
        for _ in range(20):
            tree = random_tree(rng)
            s = float(rng.uniform(0.1, 10.0))
            p, q = random_simplex(rng, tree.C), random_simplex(rng, tree.C)
            scaled = _scaled(tree, s)
            assert wasserstein_tree(p, q, scaled) == pytest.approx(s * wasserstein_tree(p, q, tree), rel=1e-12)
            g = one_hot(0, tree.C)
            assert wasserstein_crisp(p, g, ground_distance(scaled)) == pytest.approx(
                s * wasserstein_crisp(p, g, ground_distance(tree)), rel=1e-9, abs=1e-9
            )
