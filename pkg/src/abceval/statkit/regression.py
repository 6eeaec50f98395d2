"""Linear least squares and logistic maximum likelihood (IRLS), from scratch.

Both fitters operate on a raw predictor matrix; an intercept column is
always prepended internally. Fitness is reported as r2 / adjusted r2 for
linear models and McFadden's pseudo-R2 (with a parameter-count adjusted
variant) for logistic models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class RankDeficientError(ValueError):
    """Design matrix is rank deficient; carries the index of a column that is
    linearly dependent on the preceding ones (intercept excluded)."""

    def __init__(self, column: int):
        self.column = column
        super().__init__(f"design matrix is rank deficient: predictor column {column} "
                         f"is linearly dependent on earlier columns")


class SeparationError(ValueError):
    """Complete or quasi-complete separation: the logistic MLE diverges."""


@dataclass(frozen=True)
class RegressionFit:
    coefficients: np.ndarray  # [intercept, b1, ..., bp]
    n: int
    p: int
    kind: str  # linear | logistic
    r2: Optional[float] = None
    adjusted_r2: Optional[float] = None
    loglik: Optional[float] = None
    null_loglik: Optional[float] = None
    mcfadden: Optional[float] = None
    adjusted_mcfadden: Optional[float] = None
    converged: bool = True
    iterations: int = 0

    @property
    def fitness(self) -> float:
        return self.r2 if self.kind == "linear" else self.mcfadden

    @property
    def adjusted_fitness(self) -> float:
        return self.adjusted_r2 if self.kind == "linear" else self.adjusted_mcfadden


def _design(x: np.ndarray, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.shape[0] != n:
        raise ValueError(f"predictor rows ({x.shape[0]}) do not match responses ({n})")
    return np.hstack([np.ones((n, 1)), x])


def _check_rank(design: np.ndarray) -> None:
    rank = 0
    for j in range(design.shape[1]):
        new_rank = np.linalg.matrix_rank(design[:, : j + 1])
        if new_rank == rank:
            # Column j is dependent; column 0 is the intercept.
            raise RankDeficientError(j - 1)
        rank = new_rank


def ols_fit(x, y, check_rank: bool = True) -> RegressionFit:
    """Least-squares fit with intercept.

    r2 is defined as 0 when the response has no variance. With
    check_rank=False a rank-deficient design is fit by the minimum-norm
    solution instead of raising (used by the stepwise search, where
    redundant predictor sets are legal intermediate states).
    """
    y = np.asarray(y, dtype=float).ravel()
    n = y.shape[0]
    design = _design(x, n)
    p = design.shape[1] - 1
    if n <= p + 1:
        raise ValueError(f"need n > p + 1 observations (n={n}, p={p})")
    if check_rank:
        _check_rank(design)
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    residuals = y - design @ beta
    ss_res = float(residuals @ residuals)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 0.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    r2 = min(max(r2, 0.0), 1.0)
    adjusted = r2 if p == 0 else 1.0 - (1.0 - r2) * (n - 1) / (n - p - 1)
    return RegressionFit(coefficients=beta, n=n, p=p, kind="linear", r2=r2, adjusted_r2=adjusted)


def _log_likelihood(eta: np.ndarray, y: np.ndarray) -> float:
    # log L = sum y*eta - log(1 + exp(eta)), computed stably
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def logistic_fit(x, y, tol: float = 1e-8, max_iter: int = 100) -> RegressionFit:
    """Logistic regression by iteratively reweighted least squares.

    Step-halving keeps the log-likelihood non-decreasing across iterations.
    Divergence of the coefficient norm with near-perfect classification is
    reported as a SeparationError rather than silent output.
    """
    y = np.asarray(y, dtype=float).ravel()
    n = y.shape[0]
    classes = set(np.unique(y))
    if not classes <= {0.0, 1.0}:
        raise ValueError("responses must be binary 0/1")
    if classes != {0.0, 1.0}:
        raise ValueError("responses must contain both classes")
    design = _design(x, n)
    p = design.shape[1] - 1
    if n <= p + 1:
        raise ValueError(f"need n > p + 1 observations (n={n}, p={p})")
    _check_rank(design)

    ybar = y.mean()
    null_loglik = n * (ybar * math.log(ybar) + (1 - ybar) * math.log(1 - ybar))

    beta = np.zeros(p + 1)
    loglik = _log_likelihood(design @ beta, y)
    converged = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        eta = design @ beta
        mu = 1.0 / (1.0 + np.exp(-eta))
        w = mu * (1.0 - mu)
        w = np.maximum(w, 1e-12)
        # Newton step via the weighted normal equations.
        grad = design.T @ (y - mu)
        hess = design.T @ (design * w[:, None])
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError as exc:
            raise SeparationError(f"singular IRLS system at iteration {iteration}") from exc
        # Halve the step until the log-likelihood does not decrease.
        scale = 1.0
        for _ in range(60):
            candidate = beta + scale * step
            cand_ll = _log_likelihood(design @ candidate, y)
            if cand_ll >= loglik - 1e-13:
                break
            scale /= 2.0
        assert cand_ll >= loglik - 1e-9, "IRLS log-likelihood decreased"
        beta = candidate
        if np.max(np.abs(beta)) > 30.0:
            mu = 1.0 / (1.0 + np.exp(-(design @ beta)))
            if np.all(np.abs(y - mu) < 0.05):
                raise SeparationError(
                    "complete or quasi-complete separation: coefficient norm diverges"
                )
        if abs(cand_ll - loglik) < tol:
            loglik = cand_ll
            converged = True
            break
        loglik = cand_ll

    # A perfectly classifying fit means the MLE does not exist (the
    # likelihood keeps improving as coefficients grow without bound).
    mu = 1.0 / (1.0 + np.exp(-(design @ beta)))
    if np.all(np.abs(y - mu) < 1e-3):
        raise SeparationError(
            "complete or quasi-complete separation: model classifies perfectly"
        )

    mcfadden = 0.0 if null_loglik == 0.0 else 1.0 - loglik / null_loglik
    mcfadden = max(0.0, min(mcfadden, 1.0 - 1e-16)) if converged else mcfadden
    adjusted = 1.0 - (loglik - p) / null_loglik if null_loglik != 0.0 else 0.0
    return RegressionFit(
        coefficients=beta,
        n=n,
        p=p,
        kind="logistic",
        loglik=loglik,
        null_loglik=null_loglik,
        mcfadden=mcfadden,
        adjusted_mcfadden=adjusted,
        converged=converged,
        iterations=iteration,
    )
