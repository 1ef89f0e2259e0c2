"""
Exceptions for loss kernels
"""

from typing import Optional

from hierarchy.exceptions import TreeLossError


class LossError(TreeLossError):
    """Base exception for loss computation errors"""
    pass


class NonFiniteError(LossError):
    """Logits or probabilities contain NaN or infinity"""
    pass


class LossConfigError(LossError):
    """A loss configuration is inconsistent"""

    def __init__(self, message: str, field_name: Optional[str] = None):
        super().__init__(message)
        self.field_name = field_name


class UnsupportedLossError(LossError):
    """No kernel is registered for the requested loss kind"""
    pass
