"""Label tree parsing, validation and level computation."""

import json
import logging
from typing import Any, Iterable

import networkx as nx

from .exceptions import (
    CycleError,
    DuplicateNodeError,
    MultipleRootsError,
    NegativeWeightError,
    TooFewLeavesError,
    TreeError,
    UnknownParentError,
)
from .models import LabelTree, TreeNode

logger = logging.getLogger(__name__)


def build_tree(nodes: Iterable[TreeNode]) -> LabelTree:
    """Validate nodes and return an immutable LabelTree.

    Raises:
        DuplicateNodeError, UnknownParentError, MultipleRootsError,
        CycleError, NegativeWeightError, TooFewLeavesError
    """
    by_id: dict[int, TreeNode] = {}
    for node in nodes:
        if node.id in by_id:
            raise DuplicateNodeError(f"Duplicate node id {node.id}", node_id=node.id)
        by_id[node.id] = node

    if not by_id:
        raise TreeError("Tree document has no nodes")

    roots = [node.id for node in by_id.values() if node.parent is None]
    if len(roots) > 1:
        raise MultipleRootsError(f"Found {len(roots)} root nodes: {sorted(roots)}", node_id=roots[1])

    graph = nx.DiGraph()
    graph.add_nodes_from(by_id)
    for node in by_id.values():
        if node.parent is None:
            continue
        if node.parent not in by_id:
            raise UnknownParentError(
                f"Node {node.id} references unknown parent {node.parent}", node_id=node.id
            )
        if node.edge_weight is not None and node.edge_weight < 0:
            raise NegativeWeightError(
                f"Edge into node {node.id} has negative weight {node.edge_weight}", node_id=node.id
            )
        graph.add_edge(node.parent, node.id)

    if not roots or not nx.is_arborescence(graph):
        try:
            cycle = nx.find_cycle(graph)
        except nx.NetworkXNoCycle:
            raise TreeError("Tree is not connected") from None
        raise CycleError(f"Parent links form a cycle: {cycle}", node_id=cycle[0][0])

    # The root carries no incoming edge, hence no weight
    root = by_id[roots[0]]
    if root.edge_weight is not None:
        root = TreeNode(id=root.id, name=root.name, parent=None, edge_weight=None)
        by_id[root.id] = root

    tree = LabelTree(nodes=tuple(by_id[i] for i in sorted(by_id)))
    if tree.C < 2:
        raise TooFewLeavesError(f"Tree needs at least 2 leaves, found {tree.C}")

    logger.debug("Built tree with %d nodes, C=%d, K=%d", len(tree.nodes), tree.C, tree.K)
    return tree


def parse_tree(document: str | bytes | dict[str, Any]) -> LabelTree:
    """Parse a tree document ``{"nodes": [{"id", "name", "parent", "edge_weight"}, ...]}``."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise TreeError(f"Tree document is not valid JSON: {e}") from e

    if not isinstance(document, dict) or not isinstance(document.get("nodes"), list):
        raise TreeError('Tree document must be an object with a "nodes" list')

    try:
        nodes = [TreeNode.from_record(record) for record in document["nodes"]]
    except (KeyError, TypeError, ValueError) as e:
        raise TreeError(f"Malformed node record: {e}") from e

    return build_tree(nodes)


def dump_tree(tree: LabelTree) -> str:
    return json.dumps(tree.to_document(), indent=2)


def node_levels(tree: LabelTree) -> dict[int, int]:
    """Level of every node: 0 at leaves, K at the root, 1 + max child level in between."""
    return dict(tree.level_of)


def level_frontier(tree: LabelTree, level: int) -> tuple[int, ...]:
    """Nodes that stand for level ``level``: for each leaf, its highest ancestor-or-self
    whose level does not exceed ``level``. On a balanced tree these are exactly the
    nodes at that level. Returned in ascending id order; together they partition the leaves.
    """
    frontier: set[int] = set()
    for leaf in tree.leaf_order:
        chosen = leaf
        for node_id in tree.ancestors(leaf)[1:]:
            if tree.level_of[node_id] > level:
                break
            chosen = node_id
        frontier.add(chosen)
    return tuple(sorted(frontier))
