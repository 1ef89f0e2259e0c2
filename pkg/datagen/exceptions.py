"""
Exceptions for synthetic data generation and dataset storage
"""

from typing import Optional

from hierarchy.exceptions import TreeLossError


class DataGenError(TreeLossError):
    """Base exception for dataset generation and storage errors"""
    pass


class InvalidSpecError(DataGenError):
    """A generation spec has out-of-range values"""

    def __init__(self, message: str, field_name: Optional[str] = None):
        super().__init__(message)
        self.field_name = field_name


class AnnotationBudgetError(DataGenError):
    """The requested annotated fraction exceeds the available foreground"""

    def __init__(self, message: str, requested: Optional[int] = None, available: Optional[int] = None):
        super().__init__(message)
        self.requested = requested
        self.available = available


class SplitError(DataGenError):
    """Cross-validation folds cannot be formed"""
    pass


class DatasetStoreError(DataGenError):
    """A dataset directory is missing files or is inconsistent"""

    def __init__(self, message: str, path: Optional[str] = None, original_error: Optional[Exception] = None):
        super().__init__(message)
        self.path = path
        self.original_error = original_error
