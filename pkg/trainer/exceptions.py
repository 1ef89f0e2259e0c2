"""
Exceptions for model training and checkpoints
"""

from typing import Optional

from hierarchy.exceptions import TreeLossError


class TrainingError(TreeLossError):
    """Base exception for training errors"""
    pass


class TrainConfigError(TrainingError):
    """A training configuration value is out of range"""

    def __init__(self, message: str, field_name: Optional[str] = None):
        super().__init__(message)
        self.field_name = field_name


class NoAnnotationsError(TrainingError):
    """The training images carry no annotated pixel"""
    pass


class DivergenceError(TrainingError):
    """A gradient became non-finite during optimisation"""

    def __init__(self, message: str, step: Optional[int] = None):
        super().__init__(message)
        self.step = step


class CacheMismatchError(TrainingError):
    """A forward cache does not belong to the model or upstream gradient it is used with"""
    pass


class CheckpointError(TrainingError):
    """A checkpoint file is missing, truncated or inconsistent"""

    def __init__(self, message: str, path: Optional[str] = None, original_error: Optional[Exception] = None):
        super().__init__(message)
        self.path = path
        self.original_error = original_error
