"""
Factory for creating loss kernel instances
"""

import logging

from hierarchy.models import LabelTree
from hierarchy.weights import assign_weights

from .base import LossKernel
from .config import LossConfig, LossKind
from .exceptions import UnsupportedLossError
from .kernels import CrossEntropyLoss, TreeCELoss, WassersteinCELoss, WassersteinLoss

logger = logging.getLogger(__name__)

KERNELS = {
    LossKind.CE: CrossEntropyLoss,
    LossKind.WASSERSTEIN: WassersteinLoss,
    LossKind.WASSERSTEIN_CE: WassersteinCELoss,
    LossKind.TREE_CE: TreeCELoss,
}


class LossFactory:
    """Creates and caches loss kernels per (config, tree)"""

    def __init__(self):
        self._kernel_cache: dict[tuple[LossConfig, LabelTree], LossKernel] = {}

    def create_kernel(self, config: LossConfig, tree: LabelTree) -> LossKernel:
        """Create a kernel for ``config``, weighting ``tree`` with the config's scheme.

        CE is built on the tree as given since it never reads edge weights.
        """
        cache_key = (config, tree)
        if cache_key in self._kernel_cache:
            return self._kernel_cache[cache_key]

        kernel_cls = KERNELS.get(config.loss_kind)
        if kernel_cls is None:
            raise UnsupportedLossError(f"Unsupported loss kind: {config.loss_kind}")

        weighted = assign_weights(tree, config.scheme) if config.uses_scheme else tree
        instance = kernel_cls(weighted, config)
        logger.debug("Created %s kernel for C=%d", config.label, tree.C)

        self._kernel_cache[cache_key] = instance
        return instance

    def clear_cache(self) -> None:
        self._kernel_cache.clear()


_default_factory = LossFactory()


def create_loss(config: LossConfig, tree: LabelTree) -> LossKernel:
    """Convenience function returning a cached kernel from the shared factory"""
    return _default_factory.create_kernel(config, tree)
