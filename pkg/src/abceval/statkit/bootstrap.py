"""Case-resampling bootstrap with BCa (bias-corrected and accelerated) intervals."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .distributions import normal_cdf, normal_ppf
from .intervals import IntervalEstimate


class BootstrapFailureError(RuntimeError):
    """The statistic was undefined on more than half of the resamples."""

    def __init__(self, failure_rate: float):
        self.failure_rate = failure_rate
        super().__init__(f"statistic undefined on {failure_rate:.1%} of resamples")


def _resample_rng(seed: int, index: int) -> np.random.Generator:
    # Substreams are keyed by resample index (not drawn sequentially), so
    # resamples are order-independent and safe to evaluate in parallel.
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def bootstrap_bca(
    units: Sequence,
    statistic: Callable[[Sequence], float],
    k: int = 10_000,
    level: float = 0.95,
    seed: int = 0,
) -> IntervalEstimate:
    """BCa confidence interval for `statistic` under case resampling of `units`.

    Deterministic for a fixed seed. Resamples on which the statistic raises
    or returns a non-finite value are dropped; if they exceed half of k the
    whole computation fails.
    """
    if k < 1000:
        raise ValueError(f"resample count must be at least 1000, got {k}")
    n = len(units)
    if n == 0:
        raise ValueError("cannot bootstrap an empty dataset")
    units = list(units)
    theta_hat = float(statistic(units))
    if not math.isfinite(theta_hat):
        raise ValueError("statistic is undefined on the full dataset")

    replicates = []
    failures = 0
    for i in range(k):
        rng = _resample_rng(seed, i)
        idx = rng.integers(0, n, size=n)
        try:
            value = float(statistic([units[j] for j in idx]))
        except Exception:
            failures += 1
            continue
        if math.isfinite(value):
            replicates.append(value)
        else:
            failures += 1
    if failures > k / 2:
        raise BootstrapFailureError(failures / k)
    replicates = np.sort(np.asarray(replicates))

    if replicates[0] == replicates[-1]:
        c = float(replicates[0])
        return IntervalEstimate(point=theta_hat, low=min(c, theta_hat),
                                high=max(c, theta_hat), level=level, method="bootstrap_bca")

    # Bias correction from the fraction of replicates below the estimate.
    prop_below = np.mean(replicates < theta_hat)
    prop_below = min(max(prop_below, 1.0 / (len(replicates) + 1)),
                     len(replicates) / (len(replicates) + 1.0))
    z0 = normal_ppf(float(prop_below))

    # Jackknife acceleration.
    if n > 1:
        jack = np.empty(n)
        for i in range(n):
            jack[i] = statistic(units[:i] + units[i + 1:])
        dev = jack.mean() - jack
        denom = 6.0 * (np.sum(dev**2)) ** 1.5
        accel = float(np.sum(dev**3) / denom) if denom > 0 else 0.0
    else:
        accel = 0.0

    def endpoint(q: float) -> float:
        z = normal_ppf(q)
        adj = normal_cdf(z0 + (z0 + z) / (1.0 - accel * (z0 + z)))
        pos = adj * (len(replicates) - 1)
        lo = int(math.floor(pos))
        hi = min(lo + 1, len(replicates) - 1)
        frac = pos - lo
        return float(replicates[lo] * (1 - frac) + replicates[hi] * frac)

    alpha = (1.0 - level) / 2.0
    low, high = endpoint(alpha), endpoint(1.0 - alpha)
    low, high = min(low, high), max(low, high)
    # Extreme skew can push both percentile endpoints past the plug-in
    # estimate; widen so the interval always brackets it.
    low = min(low, theta_hat)
    high = max(high, theta_hat)
    return IntervalEstimate(point=theta_hat, low=low, high=high, level=level, method="bootstrap_bca")
