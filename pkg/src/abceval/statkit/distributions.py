"""Probability distribution primitives for the statistical kernel.

Central distributions (normal, Student's t, chi-square, F) are evaluated
through the incomplete beta / gamma functions. Noncentral t and F have no
assumed closed forms: they are evaluated by adaptive numerical integration
over their mixture representations, with absolute tolerance 1e-8. Quantile
functions invert the CDFs by bracketed root finding.
"""

from __future__ import annotations

import math

from scipy import integrate, optimize, special

QUAD_ABS_TOL = 1e-8


def normal_cdf(x: float) -> float:
    return float(special.ndtr(x))


def normal_ppf(q: float) -> float:
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must be in (0, 1), got {q}")
    return float(special.ndtri(q))


def t_cdf(x: float, df: float) -> float:
    """CDF of Student's t with `df` degrees of freedom."""
    if df <= 0:
        raise ValueError(f"degrees of freedom must be positive, got {df}")
    if x == 0.0:
        return 0.5
    tail = 0.5 * float(special.betainc(df / 2.0, 0.5, df / (df + x * x)))
    return tail if x < 0 else 1.0 - tail


def t_ppf(q: float, df: float) -> float:
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must be in (0, 1), got {q}")
    if q == 0.5:
        return 0.0
    return _invert_cdf(lambda x: t_cdf(x, df), q, lo=-2.0, hi=2.0)


def chi2_pdf(x: float, df: float) -> float:
    if x <= 0:
        return 0.0
    h = df / 2.0
    return math.exp((h - 1.0) * math.log(x) - x / 2.0 - special.gammaln(h) - h * math.log(2.0))


def chi2_cdf(x: float, df: float) -> float:
    if x <= 0:
        return 0.0
    return float(special.gammainc(df / 2.0, x / 2.0))


def f_cdf(x: float, df1: float, df2: float) -> float:
    if x <= 0:
        return 0.0
    z = df1 * x / (df1 * x + df2)
    return float(special.betainc(df1 / 2.0, df2 / 2.0, z))


def f_ppf(q: float, df1: float, df2: float) -> float:
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must be in (0, 1), got {q}")
    return _invert_cdf(lambda x: f_cdf(x, df1, df2), q, lo=1e-12, hi=4.0, positive=True)


def noncentral_chi2_cdf(x: float, df: float, nc: float) -> float:
    """CDF of the noncentral chi-square, as a Poisson mixture of central terms.

    Terms are accumulated until the remaining Poisson mass is below 1e-14,
    so the truncation error is far below the integration tolerance of the
    callers.
    """
    if x <= 0:
        return 0.0
    if nc == 0:
        return chi2_cdf(x, df)
    half = nc / 2.0
    total = 0.0
    weight_seen = 0.0
    j = 0
    while weight_seen < 1.0 - 1e-14:
        log_w = -half + j * math.log(half) - special.gammaln(j + 1) if half > 0 else (0.0 if j == 0 else -math.inf)
        w = math.exp(log_w)
        weight_seen += w
        total += w * chi2_cdf(x, df + 2 * j)
        j += 1
        if j > 10000:  # pragma: no cover - safety net
            break
    return min(total, 1.0)


def noncentral_t_cdf(x: float, df: float, nc: float) -> float:
    """CDF of the noncentral t distribution.

    Uses the representation T = (Z + nc) / sqrt(V / df) with V ~ chi2(df)
    independent of Z, so that
        P(T <= x) = E_V[ Phi(x * sqrt(V / df) - nc) ],
    evaluated by adaptive quadrature over the chi-square density of V.
    """
    if df <= 0:
        raise ValueError(f"degrees of freedom must be positive, got {df}")
    if nc == 0:
        return t_cdf(x, df)

    def integrand(v: float) -> float:
        return normal_cdf(x * math.sqrt(v / df) - nc) * chi2_pdf(v, df)

    upper = df + 40.0 * math.sqrt(2.0 * df) + 40.0
    value, _ = integrate.quad(
        integrand, 0.0, upper, points=[max(df - 2.0, 0.0), df], epsabs=QUAD_ABS_TOL, limit=300
    )
    return min(max(value, 0.0), 1.0)


def noncentral_f_cdf(x: float, df1: float, df2: float, nc: float) -> float:
    """CDF of the noncentral F distribution.

    F = (X1 / df1) / (X2 / df2) with X1 ~ noncentral chi2(df1, nc) and
    X2 ~ chi2(df2), so the CDF is the expectation of the noncentral
    chi-square CDF over the denominator's density, evaluated by adaptive
    quadrature.
    """
    if x <= 0:
        return 0.0
    if nc == 0:
        return f_cdf(x, df1, df2)

    def integrand(w: float) -> float:
        return noncentral_chi2_cdf(x * df1 * w / df2, df1, nc) * chi2_pdf(w, df2)

    upper = df2 + 40.0 * math.sqrt(2.0 * df2) + 40.0
    value, _ = integrate.quad(
        integrand, 0.0, upper, points=[max(df2 - 2.0, 0.0), df2], epsabs=QUAD_ABS_TOL, limit=300
    )
    return min(max(value, 0.0), 1.0)


def _invert_cdf(cdf, q: float, lo: float, hi: float, positive: bool = False) -> float:
    """Invert a monotone CDF by expanding a bracket and running Brent's method."""
    for _ in range(200):
        if cdf(hi) >= q:
            break
        hi *= 2.0
    else:  # pragma: no cover
        raise RuntimeError("failed to bracket quantile from above")
    if not positive:
        for _ in range(200):
            if cdf(lo) <= q:
                break
            lo *= 2.0
        else:  # pragma: no cover
            raise RuntimeError("failed to bracket quantile from below")
    return float(optimize.brentq(lambda x: cdf(x) - q, lo, hi, xtol=1e-12))
