"""Critical signal levels and tail-bound diagnostics for submatrix scans.

These are closed-form quantities: the signal strength at which an m-by-n
elevated block becomes detectable by scanning, the corresponding
detectability ratios for scan and sum statistics, and a Bernstein-type tail
bound for means sampled without replacement, combined into an analytic upper
bound on the log of the scan permutation p-value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import gammaln

__all__ = [
    "RegimeReport",
    "bernstein_log_tail",
    "detection_ratios",
    "log_binomial",
    "log_pvalue_bound",
    "theta_crit",
]


def _check_dims(M: int, N: int, m: int, n: int) -> None:
    if not 1 <= m <= M:
        raise ValueError(f"m must lie in [1, M]={M}, got {m}")
    if not 1 <= n <= N:
        raise ValueError(f"n must lie in [1, N]={N}, got {n}")


def theta_crit(M: int, N: int, m: int, n: int) -> float:
    """Signal level where the scan detectability ratio equals one.

    Computed as sqrt(2 (m ln(M/m) + n ln(N/n)) / (mn)), natural logs.
    """
    _check_dims(M, N, m, n)
    if m == M and n == N:
        raise ValueError("m = M and n = N leaves no entropy term; theta_crit is 0")
    num = 2.0 * (m * math.log(M / m) + n * math.log(N / n))
    return math.sqrt(num / (m * n))


@dataclass(frozen=True)
class RegimeReport:
    """Where a signal level sits relative to the detection boundaries."""

    M: int
    N: int
    m: int
    n: int
    theta: float
    theta_crit: float
    scan_ratio: float
    sum_ratio: float


def detection_ratios(theta: float, M: int, N: int, m: int, n: int) -> RegimeReport:
    """Scan ratio theta/theta_crit and sum ratio theta*mn/sqrt(MN)."""
    _check_dims(M, N, m, n)
    theta = float(theta)
    if not theta >= 0.0:
        raise ValueError(f"theta must be nonnegative, got {theta}")
    crit = theta_crit(M, N, m, n)
    return RegimeReport(
        M=M,
        N=N,
        m=m,
        n=n,
        theta=theta,
        theta_crit=crit,
        scan_ratio=theta / crit,
        sum_ratio=theta * m * n / math.sqrt(M * N),
    )


def bernstein_log_tail(m: int, t: float, variance: float, spread: float) -> float:
    """Log tail bound -m t^2 / (2 sigma^2 + (2/3) spread t) for the mean of
    ``m`` values sampled without replacement.

    ``variance`` is the population variance, ``spread`` the gap between the
    population maximum and mean.  Returns 0 at t = 0 (the bound is 1).
    """
    m = int(m)
    t = float(t)
    variance = float(variance)
    spread = float(spread)
    if m < 1:
        raise ValueError(f"sample count must be positive, got {m}")
    if t < 0.0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if variance < 0.0 or spread < 0.0:
        raise ValueError("variance and spread must be nonnegative")
    if t == 0.0:
        return 0.0
    denom = 2.0 * variance + (2.0 / 3.0) * spread * t
    if denom <= 0.0:
        raise ValueError("degenerate population: zero variance and spread with t > 0")
    return -(m * t * t) / denom


def log_binomial(n: int, k: int) -> float:
    """log C(n, k) via log-gamma; stable for n in the thousands."""
    n = int(n)
    k = int(k)
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def log_pvalue_bound(
    M: int, N: int, m: int, n: int, t: float, variance: float, spread: float
) -> float:
    """Union-bound log p-value: ln(MN C(M,m) C(N,n)) plus the Bernstein tail
    for an mn-entry mean exceeding the global mean by ``t``.

    Positive values are vacuous; negative values certify smallness.
    """
    _check_dims(M, N, m, n)
    return (
        math.log(M * N)
        + log_binomial(M, m)
        + log_binomial(N, n)
        + bernstein_log_tail(m * n, t, variance, spread)
    )
