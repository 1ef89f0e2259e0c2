"""Paired-sample t-test on per-image scores."""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .exceptions import LengthMismatchError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    n: int
    mean_difference: float
    # Differences have zero variance; t is 0 or +-inf and p is fixed at 1
    degenerate: bool = False


def paired_t_test(scores_a, scores_b) -> TTestResult:
    """Two-sided paired t-test of a against b.

    Raises:
        LengthMismatchError: inputs differ in length or hold fewer than 2 pairs
    """
    a = np.asarray(scores_a, dtype=np.float64).reshape(-1)
    b = np.asarray(scores_b, dtype=np.float64).reshape(-1)
    if a.size != b.size:
        raise LengthMismatchError(
            f"Paired samples differ in length: {a.size} vs {b.size}", expected=a.size, actual=b.size
        )
    if a.size < 2:
        raise LengthMismatchError(f"Need at least 2 pairs, got {a.size}", expected=2, actual=a.size)

    diff = a - b
    mean = float(diff.mean())
    if np.ptp(diff) == 0.0:
        logger.warning("Paired differences have zero variance (mean %.6g); reporting p = 1", mean)
        t = 0.0 if mean == 0.0 else math.copysign(math.inf, mean)
        return TTestResult(t=t, p=1.0, n=a.size, mean_difference=mean, degenerate=True)

    result = stats.ttest_rel(a, b)
    return TTestResult(t=float(result.statistic), p=float(result.pvalue), n=a.size, mean_difference=mean)
