"""Edge-weight schemes for label trees."""

import logging
from dataclasses import replace

from .exceptions import SchemeError
from .models import HIERARCHICAL_WEIGHTS, EdgeWeightScheme, LabelTree, SchemeKind

logger = logging.getLogger(__name__)


def edge_levels(tree: LabelTree) -> set[int]:
    """Distinct levels of all edges, an edge's level being that of its child node."""
    return {tree.level_of[node.id] for node in tree.nodes if node.parent is not None}


def scheme_weight(scheme: EdgeWeightScheme, level: int, K: int) -> float:
    """Weight of an edge whose child node sits at ``level`` in a tree of depth K."""
    match scheme.kind:
        case SchemeKind.LEAF_ONLY:
            return 1.0 if level == 0 else 0.0
        case SchemeKind.TOP_ONLY:
            return 1.0 if level == K - 1 else 0.0
        case SchemeKind.EQUAL:
            return 1.0
        case SchemeKind.HIERARCHICAL:
            return HIERARCHICAL_WEIGHTS[level]
        case SchemeKind.CUSTOM:
            return scheme.weights_by_level[level]
    raise SchemeError(f"Unknown scheme kind: {scheme.kind}", scheme=str(scheme.kind))


def assign_weights(tree: LabelTree, scheme: EdgeWeightScheme) -> LabelTree:
    """Return a copy of ``tree`` whose edges carry the scheme weight for their level.

    Raises:
        SchemeError: Hierarchical scheme on a tree without exactly 3 edge levels,
            or a Custom map that misses an edge level.
    """
    levels = edge_levels(tree)

    if scheme.kind == SchemeKind.HIERARCHICAL and levels != set(HIERARCHICAL_WEIGHTS):
        raise SchemeError(
            f"Hierarchical scheme needs edge levels {{0, 1, 2}}, tree has {sorted(levels)}",
            scheme=scheme.name,
        )
    if scheme.kind == SchemeKind.CUSTOM:
        missing = levels - set(scheme.weights_by_level)
        if missing:
            raise SchemeError(
                f"Custom scheme is missing weights for levels {sorted(missing)}", scheme=scheme.name
            )
        negative = [lvl for lvl, w in scheme.custom_weights if w < 0]
        if negative:
            raise SchemeError(
                f"Custom scheme has negative weights at levels {negative}", scheme=scheme.name
            )

    nodes = tuple(
        node if node.parent is None
        else replace(node, edge_weight=scheme_weight(scheme, tree.level_of[node.id], tree.K))
        for node in tree.nodes
    )
    logger.debug("Assigned %s weights to %d edges", scheme.name, len(nodes) - 1)
    return LabelTree(nodes=nodes, scheme=scheme)
