"""Exact Wasserstein distance through the transport linear program.

Used as the correctness reference and for small label spaces; the tree closed
form in ``transport.closed_form`` is the production path.
"""

import logging

import numpy as np
from scipy.optimize import linprog

from hierarchy.models import DistanceMatrix

from .exceptions import DimensionMismatchError, SolverError
from .models import TransportPlan, WassersteinResult
from .simplex import as_prob_vector

logger = logging.getLogger(__name__)

# Dual simplex returns a vertex of the transport polytope; tight tolerances
# keep marginals and cost exact to round-off.
SOLVER_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


def _marginal_constraints(C: int) -> np.ndarray:
    """Equality rows for sum_l' T[l, l'] = p_l and sum_l T[l, l'] = q_l'."""
    rows = np.kron(np.eye(C), np.ones((1, C)))
    cols = np.kron(np.ones((1, C)), np.eye(C))
    return np.vstack([rows, cols])


def wasserstein_lp(p, q, M: DistanceMatrix | np.ndarray, with_plan: bool = True) -> WassersteinResult:
    """min_T sum T[l, l'] M[l, l'] subject to T 1 = p, T^T 1 = q, T >= 0.

    Raises:
        DimensionMismatchError: p, q and M disagree in size
        NotOnSimplexError: p or q is not a probability vector
        SolverError: the solver did not reach optimality
    """
    cost_matrix = np.asarray(M.entries if isinstance(M, DistanceMatrix) else M, dtype=np.float64)
    if cost_matrix.ndim != 2 or cost_matrix.shape[0] != cost_matrix.shape[1]:
        raise DimensionMismatchError(f"M must be square, got shape {cost_matrix.shape}")
    C = cost_matrix.shape[0]
    p = as_prob_vector(p, size=C, name="p")
    q = as_prob_vector(q, size=C, name="q")

    # The last marginal row is implied by the others; drop it to keep the system full rank
    A_eq = _marginal_constraints(C)[:-1]
    b_eq = np.concatenate([p, q])[:-1]

    try:
        result = linprog(
            cost_matrix.reshape(-1),
            A_eq=A_eq,
            b_eq=b_eq,
            bounds=(0, None),
            method="highs-ds",
            options=SOLVER_OPTIONS,
        )
    except ValueError as e:
        raise SolverError(f"LP solver rejected the transport problem: {e}", original_error=e) from e

    if result.status != 0:
        raise SolverError(f"LP solver failed: {result.message}", status=result.status)

    plan = TransportPlan(flows=np.maximum(result.x.reshape(C, C), 0.0))
    cost = plan.cost(cost_matrix)
    logger.debug("LP transport on C=%d: cost=%.12g", C, cost)
    return WassersteinResult(cost=cost, plan=plan if with_plan else None)
