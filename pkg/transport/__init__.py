"""
Optimal transport over the label simplex
"""

from .closed_form import wasserstein_crisp, wasserstein_crisp_gradient, wasserstein_tree
from .exceptions import (
    DimensionMismatchError,
    NotOneHotError,
    NotOnSimplexError,
    SolverError,
    TransportError,
)
from .lp import wasserstein_lp
from .models import TransportPlan, WassersteinResult
from .simplex import as_prob_vector, hot_index, one_hot

__all__ = [
    "TransportPlan",
    "WassersteinResult",
    "as_prob_vector",
    "hot_index",
    "one_hot",
    "wasserstein_crisp",
    "wasserstein_crisp_gradient",
    "wasserstein_lp",
    "wasserstein_tree",
    "DimensionMismatchError",
    "NotOneHotError",
    "NotOnSimplexError",
    "SolverError",
    "TransportError",
]
