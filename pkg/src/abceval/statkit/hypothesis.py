"""Two-sample hypothesis tests: z-test of proportions, Welch's t, sign test."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .distributions import normal_cdf, t_cdf

_TINY_P = 1e-300


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    test: str  # two_prop_z | t_test | sign_test
    n1: int
    n2: int
    effect: Optional[float] = None  # Cohen's d or proportion difference
    df: Optional[float] = None
    degenerate: bool = False

    def __post_init__(self):
        if not 0.0 < self.p_value <= 1.0:
            raise ValueError(f"p-value must lie in (0, 1], got {self.p_value}")


def two_prop_z_test(k1: int, n1: int, k2: int, n2: int) -> TestResult:
    """Pooled two-proportion z-test, two-sided.

    A pooled proportion of exactly 0 or 1 carries no evidence of a
    difference, so the degenerate result is z = 0, p = 1.
    """
    if n1 <= 0 or n2 <= 0:
        raise ValueError("both group sizes must be positive")
    if not (0 <= k1 <= n1 and 0 <= k2 <= n2):
        raise ValueError("success counts must lie within their group sizes")
    p1, p2 = k1 / n1, k2 / n2
    pooled = (k1 + k2) / (n1 + n2)
    if pooled == 0.0 or pooled == 1.0:
        return TestResult(0.0, 1.0, "two_prop_z", n1, n2, effect=p1 - p2, degenerate=True)
    se = math.sqrt(pooled * (1 - pooled) * (1 / n1 + 1 / n2))
    z = (p1 - p2) / se
    p = min(1.0, 2.0 * (1.0 - normal_cdf(abs(z))))
    return TestResult(z, max(p, _TINY_P), "two_prop_z", n1, n2, effect=p1 - p2)


def cohens_d(sample1: Sequence[float], sample2: Sequence[float]) -> float:
    """Standardized mean difference with the pooled standard deviation."""
    n1, n2 = len(sample1), len(sample2)
    m1 = sum(sample1) / n1
    m2 = sum(sample2) / n2
    v1 = sum((x - m1) ** 2 for x in sample1) / (n1 - 1)
    v2 = sum((x - m2) ** 2 for x in sample2) / (n2 - 1)
    pooled_var = ((n1 - 1) * v1 + (n2 - 1) * v2) / (n1 + n2 - 2)
    if pooled_var == 0.0:
        return 0.0 if m1 == m2 else math.copysign(math.inf, m1 - m2)
    return (m1 - m2) / math.sqrt(pooled_var)


def t_test(sample1: Sequence[float], sample2: Sequence[float]) -> TestResult:
    """Welch's two-sided t-test with Welch-Satterthwaite degrees of freedom.

    Zero variance in both samples degenerates: equal means give p = 1,
    unequal means give a vanishing p flagged as degenerate.
    """
    n1, n2 = len(sample1), len(sample2)
    if n1 < 2 or n2 < 2:
        raise ValueError("each sample must contain at least 2 values")
    m1 = sum(sample1) / n1
    m2 = sum(sample2) / n2
    v1 = sum((x - m1) ** 2 for x in sample1) / (n1 - 1)
    v2 = sum((x - m2) ** 2 for x in sample2) / (n2 - 1)
    d = cohens_d(sample1, sample2)
    if v1 == 0.0 and v2 == 0.0:
        if m1 == m2:
            return TestResult(0.0, 1.0, "t_test", n1, n2, effect=0.0, degenerate=True)
        return TestResult(
            math.copysign(math.inf, m1 - m2), _TINY_P, "t_test", n1, n2, effect=d, degenerate=True
        )
    se2 = v1 / n1 + v2 / n2
    t = (m1 - m2) / math.sqrt(se2)
    df = se2 * se2 / ((v1 / n1) ** 2 / (n1 - 1) + (v2 / n2) ** 2 / (n2 - 1))
    p = min(1.0, 2.0 * (1.0 - t_cdf(abs(t), df)))
    return TestResult(t, max(p, _TINY_P), "t_test", n1, n2, effect=d, df=df)


def sign_test(wins: int, losses: int, ties: int = 0) -> TestResult:
    """Exact two-sided binomial sign test at p = 0.5; ties are excluded."""
    if wins < 0 or losses < 0 or ties < 0:
        raise ValueError("counts must be non-negative")
    n = wins + losses
    if n == 0:
        raise ValueError("all ties: sign test undefined with no wins or losses")
    lower = sum(math.comb(n, i) for i in range(0, min(wins, losses) + 1)) / 2**n
    p = min(1.0, 2.0 * lower)
    stat = (wins - losses) / n
    return TestResult(stat, p, "sign_test", n1=n, n2=n, effect=stat)
