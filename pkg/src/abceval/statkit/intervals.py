"""Confidence interval estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .distributions import normal_ppf, t_ppf


@dataclass(frozen=True)
class IntervalEstimate:
    point: float
    low: float
    high: float
    level: float
    method: str  # wilson | student_t | bootstrap_bca

    def __post_init__(self):
        if not self.low <= self.point <= self.high:
            raise ValueError(
                f"interval must bracket the point estimate: "
                f"[{self.low}, {self.high}] vs {self.point}"
            )


def wilson_interval(k: int, n: int, level: float = 0.95) -> IntervalEstimate:
    """Wilson score interval for a binomial proportion."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 <= k <= n:
        raise ValueError(f"k must be in [0, {n}], got {k}")
    z = normal_ppf(0.5 + level / 2.0)
    p = k / n
    z2 = z * z
    center = (p + z2 / (2 * n)) / (1 + z2 / n)
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n)
    low = max(0.0, center - half)
    high = min(1.0, center + half)
    # Keep the bracketing invariant exact at the boundaries.
    if k == 0:
        low = 0.0
    if k == n:
        high = 1.0
    return IntervalEstimate(point=p, low=low, high=high, level=level, method="wilson")


def student_t_interval(sample: Sequence[float], level: float = 0.95) -> IntervalEstimate:
    """mean +/- t_{level, n-1} * s / sqrt(n); zero-width for constant samples."""
    n = len(sample)
    if n < 2:
        raise ValueError("sample must contain at least 2 values")
    mean = sum(sample) / n
    var = sum((x - mean) ** 2 for x in sample) / (n - 1)
    if var == 0.0:
        return IntervalEstimate(point=mean, low=mean, high=mean, level=level, method="student_t")
    half = t_ppf(0.5 + level / 2.0, n - 1) * math.sqrt(var / n)
    return IntervalEstimate(point=mean, low=mean - half, high=mean + half, level=level, method="student_t")
