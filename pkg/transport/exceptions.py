"""
Exceptions for optimal-transport computations
"""

from typing import Optional

from hierarchy.exceptions import TreeLossError


class TransportError(TreeLossError):
    """Base exception for transport and probability-vector errors"""
    pass


class DimensionMismatchError(TransportError):
    """Vector or matrix dimensions do not agree"""

    def __init__(self, message: str, expected: Optional[int] = None, actual: Optional[int] = None):
        super().__init__(message)
        self.expected = expected
        self.actual = actual


class NotOnSimplexError(TransportError):
    """A vector is not a probability vector, even after tolerated renormalization"""
    pass


class NotOneHotError(TransportError):
    """A crisp ground truth is not exactly one-hot"""
    pass


class SolverError(TransportError):
    """The LP solver did not report an optimal solution"""

    def __init__(self, message: str, status: Optional[int] = None, original_error: Optional[Exception] = None):
        super().__init__(message)
        self.status = status
        self.original_error = original_error
