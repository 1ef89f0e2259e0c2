"""
Exceptions for label-tree construction, weighting and distances
"""

from typing import Optional


class TreeLossError(Exception):
    """Base exception for every error raised by this project"""
    pass


class TreeError(TreeLossError):
    """A label tree document or structure is invalid"""

    def __init__(self, message: str, node_id: Optional[int] = None):
        super().__init__(message)
        self.node_id = node_id


class DuplicateNodeError(TreeError):
    """Two nodes share an id"""
    pass


class UnknownParentError(TreeError):
    """A node points at a parent id that is not in the tree"""
    pass


class CycleError(TreeError):
    """Parent links form a cycle (this includes the no-root case)"""
    pass


class MultipleRootsError(TreeError):
    """More than one node has no parent"""
    pass


class NegativeWeightError(TreeError):
    """An edge weight is negative"""
    pass


class TooFewLeavesError(TreeError):
    """The tree has fewer than two leaves"""
    pass


class SchemeError(TreeLossError):
    """An edge-weight scheme cannot be applied to a tree"""

    def __init__(self, message: str, scheme: Optional[str] = None):
        super().__init__(message)
        self.scheme = scheme


class WeightsUnassignedError(TreeLossError):
    """An operation needs edge weights but the tree carries none"""
    pass
