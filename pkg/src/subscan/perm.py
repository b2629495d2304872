"""Permutation resampling and permutation p-values for the scan statistic.

Two shuffle collections are supported: within-row shuffles, which preserve
each row's multiset, and global shuffles of all entries.  P-values compare
the observed scan against scans of shuffled matrices, either exactly over
the whole (tiny) permutation group or by Monte Carlo with the add-one
estimator (count + 1) / (B + 1).
"""

from __future__ import annotations

import enum
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .stats import (
    DEFAULT_MAX_ITERS,
    DEFAULT_RESTARTS,
    as_matrix,
    scan_exact,
    scan_las,
    _check_dims,
)

__all__ = [
    "MCConfig",
    "PValue",
    "PermutationKind",
    "exact_pvalue_enum",
    "mc_pvalue",
    "permute",
]

_ENUM_BIDIM_LIMIT = 8  # matrices with at most this many entries
_ENUM_UNIDIM_LIMIT = 10**6  # product of per-row factorials


class PermutationKind(enum.Enum):
    """Within-row shuffles versus global shuffles of all entries."""

    UNIDIMENSIONAL = "unidimensional"
    BIDIMENSIONAL = "bidimensional"

    @property
    def code(self) -> int:
        if self is PermutationKind.UNIDIMENSIONAL:
            return _kernels.KIND_UNIDIMENSIONAL
        return _kernels.KIND_BIDIMENSIONAL

    @classmethod
    def parse(cls, name) -> "PermutationKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(
            f"unknown permutation kind {name!r}; choose from "
            f"{[m.value for m in cls]}"
        )


@dataclass(frozen=True)
class MCConfig:
    """Monte Carlo calibration parameters and the scan engine to use."""

    B: int = 500
    kind: PermutationKind = PermutationKind.BIDIMENSIONAL
    seed: int = 0
    restarts: int = DEFAULT_RESTARTS
    max_iters: int = DEFAULT_MAX_ITERS
    exact_scan: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", PermutationKind.parse(self.kind))
        if self.B < 1:
            raise ValueError(f"B must be positive, got {self.B}")
        if self.restarts < 1 or self.max_iters < 1:
            raise ValueError("restarts and max_iters must be positive")

    def with_seed(self, seed: int) -> "MCConfig":
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class PValue:
    """A permutation p-value with its exceedance count and denominator."""

    value: float
    exceedances: int
    B: int

    def __post_init__(self):
        if self.B < 1:
            raise ValueError(f"B must be positive, got {self.B}")
        if not 0 <= self.exceedances <= self.B:
            raise ValueError(
                f"exceedances must lie in [0, B={self.B}], got {self.exceedances}"
            )
        if not 0.0 < self.value <= 1.0:
            raise ValueError(f"p-value must lie in (0, 1], got {self.value}")

    @classmethod
    def monte_carlo(cls, exceedances: int, B: int) -> "PValue":
        """Add-one estimator (count + 1) / (B + 1)."""
        return cls(value=(exceedances + 1) / (B + 1), exceedances=exceedances, B=B)

    @classmethod
    def exact_ratio(cls, exceedances: int, total: int) -> "PValue":
        """Exact fraction over a fully enumerated permutation group."""
        return cls(value=exceedances / total, exceedances=exceedances, B=total)


def permute(X, kind: PermutationKind, seed: int) -> np.ndarray:
    """Uniformly shuffled copy of ``X`` under the given collection."""
    Xa = as_matrix(X)
    kind = PermutationKind.parse(kind)
    if kind is PermutationKind.UNIDIMENSIONAL:
        return _kernels.shuffle_within_rows(Xa, int(seed))
    return _kernels.shuffle_all(Xa, int(seed))


def _mc_exact_engine(Xa: np.ndarray, m: int, n: int, cfg: MCConfig) -> PValue:
    M, N = Xa.shape
    # Tiny matrices skip the vectorized search; a flat-index sweep over all
    # supports is the same exact maximum and far cheaper per replicate.
    tiny = M * N <= 64
    supports = _support_flat_indices(M, N, m, n) if tiny else None

    def engine(mat: np.ndarray) -> float:
        if tiny:
            return _max_support_sum([float(v) for v in mat.ravel()], supports)
        return scan_exact(mat, m, n).value

    obs = engine(Xa)
    rep_state = _kernels.derive(cfg.seed, _kernels.DOM_REPLICATE)
    count = 0
    for b in range(cfg.B):
        Xp = permute(Xa, cfg.kind, _kernels.derive(rep_state, b))
        if engine(Xp) >= obs:
            count += 1
    return PValue.monte_carlo(count, cfg.B)


def _chunk_ranges(B: int, parts: int) -> list[tuple[int, int]]:
    step = -(-B // parts)
    return [(lo, min(lo + step, B)) for lo in range(0, B, step)]


def _mc_las_engine(
    Xa: np.ndarray, m: int, n: int, cfg: MCConfig, workers: int
) -> PValue:
    if workers <= 1:
        _, count = _kernels.mc_exceed_las(
            Xa, m, n, cfg.B, cfg.kind.code, cfg.seed, cfg.restarts, cfg.max_iters
        )
        return PValue.monte_carlo(count, cfg.B)
    # Replicate b depends only on (seed, b), so disjoint ranges sum exactly.
    obs = scan_las(
        Xa, m, n, cfg.restarts, cfg.max_iters,
        _kernels.derive(cfg.seed, _kernels.DOM_OBSERVED),
    ).value
    ranges = _chunk_ranges(cfg.B, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        counts = list(
            pool.map(
                lambda r: _kernels.mc_exceed_range(
                    Xa, m, n, obs, r[0], r[1], cfg.kind.code, cfg.seed,
                    cfg.restarts, cfg.max_iters,
                ),
                ranges,
            )
        )
    return PValue.monte_carlo(sum(counts), cfg.B)


def mc_pvalue(X, m: int, n: int, cfg: MCConfig, workers: int = 1) -> PValue:
    """Monte Carlo permutation p-value of the scan statistic.

    Draws B independent shuffles, counts those whose scan reaches the
    observed scan (ties count), and applies the add-one estimator.  The same
    scan engine and parameters evaluate observed and shuffled data.  Output
    is independent of ``workers``.
    """
    Xa = as_matrix(X)
    M, N = Xa.shape
    _check_dims(M, N, m, n)
    if cfg.exact_scan:
        return _mc_exact_engine(Xa, m, n, cfg)
    return _mc_las_engine(Xa, m, n, cfg, int(workers))


def _support_flat_indices(M: int, N: int, m: int, n: int) -> list[tuple[int, ...]]:
    supports = []
    for rows in itertools.combinations(range(M), m):
        for cols in itertools.combinations(range(N), n):
            supports.append(tuple(i * N + j for i in rows for j in cols))
    return supports


def _max_support_sum(flat, supports) -> float:
    best = -math.inf
    for idx in supports:
        total = 0.0
        for t in idx:
            total += flat[t]
        if total > best:
            best = total
    return best


def exact_pvalue_enum(X, m: int, n: int, kind: PermutationKind) -> PValue:
    """Exact permutation p-value by enumerating the whole group.

    Only feasible for tiny matrices: the global collection is enumerated for
    at most 8 entries, the within-row collection while the product of
    per-row factorials stays within 10^6.  The value is the exact fraction
    of permutations (identity included) whose exact scan ties or beats the
    observed scan.
    """
    Xa = as_matrix(X)
    M, N = Xa.shape
    _check_dims(M, N, m, n)
    kind = PermutationKind.parse(kind)
    supports = _support_flat_indices(M, N, m, n)
    flat = [float(v) for v in Xa.ravel()]
    obs = _max_support_sum(flat, supports)
    count = 0
    total = 0
    if kind is PermutationKind.BIDIMENSIONAL:
        if M * N > _ENUM_BIDIM_LIMIT:
            raise ValueError(
                f"global enumeration needs ({M}*{N})! permutations; "
                f"limit is {_ENUM_BIDIM_LIMIT} entries; use mc_pvalue instead"
            )
        for values in itertools.permutations(flat):
            total += 1
            if _max_support_sum(values, supports) >= obs:
                count += 1
    else:
        group_size = 1
        for _ in range(M):
            group_size *= math.factorial(N)
        if group_size > _ENUM_UNIDIM_LIMIT:
            raise ValueError(
                f"within-row enumeration needs {group_size} permutations; "
                f"limit is {_ENUM_UNIDIM_LIMIT}; use mc_pvalue instead"
            )
        row_perms = [list(itertools.permutations(flat[i * N : (i + 1) * N])) for i in range(M)]
        for rows in itertools.product(*row_perms):
            total += 1
            values = tuple(v for row in rows for v in row)
            if _max_support_sum(values, supports) >= obs:
                count += 1
    return PValue.exact_ratio(count, total)
