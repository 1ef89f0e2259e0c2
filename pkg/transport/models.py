"""Transport plan and Wasserstein result types."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TransportPlan:
    """C x C flows T[l, l']; rows sum to p, columns to q."""

    flows: np.ndarray

    def marginal_error(self, p: np.ndarray, q: np.ndarray) -> float:
        rows = np.abs(self.flows.sum(axis=1) - p).max()
        cols = np.abs(self.flows.sum(axis=0) - q).max()
        return float(max(rows, cols))

    def cost(self, M: np.ndarray) -> float:
        return float(np.sum(self.flows * M))


@dataclass(frozen=True)
class WassersteinResult:
    cost: float
    plan: TransportPlan | None = None
