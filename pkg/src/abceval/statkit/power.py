"""Post-hoc power of the two-sample t-test and the regression F-test."""

from __future__ import annotations

import math

from .distributions import f_ppf, noncentral_f_cdf, noncentral_t_cdf, t_ppf


def power_t_test(d: float, n_per_group: int, alpha: float = 0.05) -> float:
    """Power of the two-sided two-sample t-test at effect size Cohen's d.

    Noncentrality is d * sqrt(n / 2) with 2n - 2 degrees of freedom; power
    is the rejection mass of the noncentral t outside the central critical
    values. d = 0 returns alpha exactly.
    """
    if d < 0:
        raise ValueError("effect size must be non-negative")
    if n_per_group < 2:
        raise ValueError("need at least 2 observations per group")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    df = 2 * n_per_group - 2
    delta = d * math.sqrt(n_per_group / 2.0)
    crit = t_ppf(1.0 - alpha / 2.0, df)
    power = 1.0 - noncentral_t_cdf(crit, df, delta) + noncentral_t_cdf(-crit, df, delta)
    return min(max(power, 0.0), 1.0)


def power_f_test(f2: float, n: int, df_numerator: int = 1, alpha: float = 0.05) -> float:
    """Power of the regression F-test with noncentrality f2 * n."""
    if f2 < 0:
        raise ValueError("effect size f2 must be non-negative")
    if n <= df_numerator + 1:
        raise ValueError("need n > df_numerator + 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    df2 = n - df_numerator - 1
    crit = f_ppf(1.0 - alpha, df_numerator, df2)
    power = 1.0 - noncentral_f_cdf(crit, df_numerator, df2, f2 * n)
    return min(max(power, 0.0), 1.0)
