"""
Exceptions for OOD decisions, metrics and statistical tests
"""

from typing import Optional

from hierarchy.exceptions import TreeLossError


class EvaluationError(TreeLossError):
    """Base exception for evaluation errors"""
    pass


class InvalidLevelError(EvaluationError):
    """Requested evaluation level is outside [0, K-1]"""

    def __init__(self, message: str, level: object = None, K: Optional[int] = None):
        super().__init__(message)
        self.level = level
        self.K = K


class EmptyGridError(EvaluationError):
    """Threshold grid has no values"""
    pass


class LengthMismatchError(EvaluationError):
    """Paired inputs differ in length or are too short"""

    def __init__(self, message: str, expected: Optional[int] = None, actual: Optional[int] = None):
        super().__init__(message)
        self.expected = expected
        self.actual = actual
