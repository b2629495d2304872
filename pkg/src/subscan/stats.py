"""Sum and scan statistics over data matrices.

The scan statistic is the largest total over all m-by-n submatrices.  Two
engines compute it: an exhaustive search that is exact but only feasible for
small instances, and a restarted alternating maximization (LAS-style
hill climbing) that scales to realistic sizes but may undershoot.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels

__all__ = [
    "BudgetExceededError",
    "DEFAULT_EXACT_BUDGET",
    "DEFAULT_MAX_ITERS",
    "DEFAULT_RESTARTS",
    "ScanResult",
    "SubmatrixSupport",
    "as_matrix",
    "scan_exact",
    "scan_las",
    "submatrix_sum",
    "sum_stat",
]

DEFAULT_RESTARTS = 20
DEFAULT_MAX_ITERS = 100
DEFAULT_EXACT_BUDGET = 10_000_000

_CHUNK = 1024  # row subsets vectorized per block in the exhaustive search


class BudgetExceededError(ValueError):
    """Exhaustive scan refused because the search space is too large."""


def as_matrix(values) -> np.ndarray:
    """Validate and return a C-contiguous float64 matrix with finite entries."""
    X = np.ascontiguousarray(values, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"expected a 2-D matrix with positive dimensions, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValueError("matrix entries must all be finite")
    return X


@dataclass(frozen=True)
class SubmatrixSupport:
    """Row and column index sets of a candidate submatrix (0-based)."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]

    def __post_init__(self):
        for name in ("rows", "cols"):
            idx = tuple(int(i) for i in getattr(self, name))
            if not idx:
                raise ValueError(f"{name} must be nonempty")
            if any(i < 0 for i in idx):
                raise ValueError(f"{name} must be nonnegative, got {idx}")
            ordered = tuple(sorted(idx))
            if len(set(ordered)) != len(ordered):
                raise ValueError(f"{name} contains duplicates: {idx}")
            object.__setattr__(self, name, ordered)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.cols)


@dataclass(frozen=True)
class ScanResult:
    """Scan value with the attaining support and search metadata."""

    value: float
    support: SubmatrixSupport
    exact: bool
    restarts_used: int
    iterations: int


def sum_stat(X) -> float:
    """Exactly rounded total of all entries; invariant under any shuffle."""
    return math.fsum(as_matrix(X).ravel())


def submatrix_sum(X, support: SubmatrixSupport) -> float:
    """Sum of the entries indexed by ``support.rows x support.cols``."""
    Xa = as_matrix(X)
    M, N = Xa.shape
    if support.rows[-1] >= M or support.cols[-1] >= N:
        raise IndexError(
            f"support {support.shape} exceeds matrix bounds ({M}, {N})"
        )
    # Row-major running sum, matching the scan kernels bit for bit.
    total = 0.0
    for i in support.rows:
        row = Xa[i]
        for j in support.cols:
            total += row[j]
    return float(total)


def _check_dims(M: int, N: int, m: int, n: int) -> None:
    if not 1 <= m <= M:
        raise ValueError(f"m must lie in [1, M]={M}, got {m}")
    if not 1 <= n <= N:
        raise ValueError(f"n must lie in [1, N]={N}, got {n}")


def scan_exact(X, m: int, n: int, budget: int = DEFAULT_EXACT_BUDGET) -> ScanResult:
    """Globally maximal m-by-n submatrix sum by exhaustive search.

    Row subsets are enumerated lexicographically; per subset the best columns
    are the top n restricted column sums, so the cost is C(M, m) * N column
    scans and the budget precondition is checked against that product.  Ties
    resolve to the lexicographically smallest (rows, cols).
    """
    Xa = as_matrix(X)
    M, N = Xa.shape
    _check_dims(M, N, m, n)
    cost = math.comb(M, m) * N
    if cost > budget:
        raise BudgetExceededError(
            f"exhaustive scan needs C({M},{m})*{N} = {cost} column scans, over the "
            f"budget of {budget}; use scan_las instead"
        )
    best_val = -math.inf
    best_rows: tuple[int, ...] | None = None
    combos = itertools.combinations(range(M), m)
    while True:
        chunk = list(itertools.islice(combos, _CHUNK))
        if not chunk:
            break
        colsums = Xa[np.array(chunk, dtype=np.intp)].sum(axis=1)
        vals = np.sort(colsums, axis=1)[:, N - n :].sum(axis=1)
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best_val = float(vals[j])
            best_rows = chunk[j]
    assert best_rows is not None
    colsums = Xa[list(best_rows)].sum(axis=0)
    # Stable sort on negated sums keeps the smallest indices among ties.
    order = np.argsort(-colsums, kind="stable")[:n]
    support = SubmatrixSupport(rows=best_rows, cols=tuple(int(c) for c in order))
    return ScanResult(
        value=submatrix_sum(Xa, support),
        support=support,
        exact=True,
        restarts_used=0,
        iterations=0,
    )


def scan_las(
    X,
    m: int,
    n: int,
    restarts: int = DEFAULT_RESTARTS,
    max_iters: int = DEFAULT_MAX_ITERS,
    seed: int = 0,
) -> ScanResult:
    """Best m-by-n submatrix sum found by restarted alternating maximization.

    Each restart seeds a random column subset, then alternates picking the top
    m rows against current columns and the top n columns against current rows
    (ties to the smallest index) until the support repeats.  The best restart
    wins; ties go to the earliest restart.
    """
    Xa = as_matrix(X)
    M, N = Xa.shape
    _check_dims(M, N, m, n)
    if restarts < 1:
        raise ValueError(f"restarts must be positive, got {restarts}")
    if max_iters < 1:
        raise ValueError(f"max_iters must be positive, got {max_iters}")
    value, rows, cols, iterations, used = _kernels.las_scan(
        Xa, m, n, restarts, max_iters, seed
    )
    support = SubmatrixSupport(
        rows=tuple(int(i) for i in rows), cols=tuple(int(j) for j in cols)
    )
    return ScanResult(
        value=float(value),
        support=support,
        exact=False,
        restarts_used=int(used),
        iterations=int(iterations),
    )
