"""Pure-Python kernel backend.

Reference implementation of the hot numerical paths: seeded generation of
planted matrices, row-wise and global shuffles, the iterative large-average
submatrix scan, and Monte Carlo exceedance counting.  The compiled backend in
``_core.pyx`` mirrors this module operation for operation; both must produce
bit-identical results for every exported function.

All randomness flows through a splitmix64-style counter generator.  A 64-bit
seed node is either used to derive child nodes (``derive``) or consumed as a
draw stream (``Stream``), never both; domain tags keep sibling derivations
disjoint.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln, ndtri

BACKEND_NAME = "python"

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

# Domain tags for seed derivation.  Values are part of the cross-backend
# contract and must match ``_core.pyx``.
DOM_ENTRY = 1
DOM_DRAW = 2
DOM_SHUFFLE = 3
DOM_REPLICATE = 4
DOM_OBSERVED = 5
DOM_SCAN = 6
DOM_RESTART = 7
DOM_SIZE = 8
DOM_TRIAL = 9
DOM_CELL = 10

FAMILY_GAUSSIAN = 0
FAMILY_CENTERED_POISSON = 1
FAMILY_RADEMACHER = 2

KIND_UNIDIMENSIONAL = 0
KIND_BIDIMENSIONAL = 1

_PTRS_CUTOFF = 10.0  # Poisson sampling switches algorithms at this mean


def mix64(z: int) -> int:
    """Finalizing 64-bit mixer (splitmix64)."""
    z &= MASK64
    z ^= z >> 30
    z = (z * _MIX_A) & MASK64
    z ^= z >> 27
    z = (z * _MIX_B) & MASK64
    z ^= z >> 31
    return z


def derive(seed: int, index: int) -> int:
    """Child seed ``index`` of node ``seed``."""
    return mix64((seed + (index + 1) * GOLDEN) & MASK64)


class Stream:
    """Counter-based draw stream over a leaf seed node."""

    __slots__ = ("state", "count")

    def __init__(self, state: int) -> None:
        self.state = state & MASK64
        self.count = 0

    def next_u64(self) -> int:
        self.count += 1
        return mix64((self.state + self.count * GOLDEN) & MASK64)

    def uniform(self) -> float:
        # Strictly inside (0, 1): offset by half an ulp of the 53-bit grid.
        return ((self.next_u64() >> 11) + 0.5) * _INV53

    def below(self, n: int) -> int:
        # Multiply-high maps a 64-bit word to [0, n) with negligible bias.
        return (self.next_u64() * n) >> 64


def uniform_stream(seed: int, count: int) -> np.ndarray:
    """Diagnostic helper: ``count`` uniforms drawn straight from ``seed``."""
    st = Stream(seed)
    out = np.empty(count, dtype=np.float64)
    for i in range(count):
        out[i] = st.uniform()
    return out


# ---------------------------------------------------------------- sampling #


def _draw_normal(st: Stream, theta: float) -> float:
    return theta + ndtri(st.uniform())


def _draw_poisson(st: Stream, lam: float) -> int:
    if lam < _PTRS_CUTOFF:
        # CDF inversion from a single uniform.
        u = st.uniform()
        p = math.exp(-lam)
        f = p
        k = 0
        while u > f and p > 0.0:
            k += 1
            p *= lam / k
            f += p
        return k
    # Transformed rejection with squeeze (Hormann's PTRS).
    slam = math.sqrt(lam)
    loglam = math.log(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        u = st.uniform() - 0.5
        v = st.uniform()
        us = 0.5 - abs(u)
        k = int(math.floor((2.0 * a / us + b) * u + lam + 0.43))
        if us >= 0.07 and v <= vr:
            return k
        if k < 0 or (us < 0.013 and v > us):
            continue
        if (math.log(v) + math.log(invalpha) - math.log(a / (us * us) + b)) <= (
            -lam + k * loglam - gammaln(k + 1.0)
        ):
            return k


def _draw_rademacher(st: Stream, theta: float) -> float:
    ep = math.exp(theta)
    em = math.exp(-theta)
    p_plus = ep / (ep + em)
    return 1.0 if st.uniform() < p_plus else -1.0


def _draw(st: Stream, family: int, theta: float) -> float:
    if family == FAMILY_GAUSSIAN:
        return _draw_normal(st, theta)
    if family == FAMILY_CENTERED_POISSON:
        return float(_draw_poisson(st, math.exp(theta))) - 1.0
    if family == FAMILY_RADEMACHER:
        return _draw_rademacher(st, theta)
    raise ValueError(f"unknown family code {family}")


def tilted_draws(family: int, theta: float, count: int, seed: int) -> np.ndarray:
    """``count`` independent draws from the tilted family."""
    if family not in (FAMILY_GAUSSIAN, FAMILY_CENTERED_POISSON, FAMILY_RADEMACHER):
        raise ValueError(f"unknown family code {family}")
    root = derive(seed, DOM_DRAW)
    out = np.empty(count, dtype=np.float64)
    for t in range(count):
        out[t] = _draw(Stream(derive(root, t)), family, theta)
    return out


def generate_matrix(
    family: int, theta: float, M: int, N: int, m: int, n: int, seed: int
) -> np.ndarray:
    """M x N noise matrix with the top-left m x n block tilted by ``theta``.

    Each entry owns a seed node derived from (seed, row, column), so the
    matrix is reproducible entry by entry and independent of traversal order.
    """
    if family not in (FAMILY_GAUSSIAN, FAMILY_CENTERED_POISSON, FAMILY_RADEMACHER):
        raise ValueError(f"unknown family code {family}")
    root = derive(seed, DOM_ENTRY)
    out = np.empty((M, N), dtype=np.float64)
    for i in range(M):
        row_node = derive(root, i)
        tilted_row = i < m
        for j in range(N):
            th = theta if (tilted_row and j < n) else 0.0
            out[i, j] = _draw(Stream(derive(row_node, j)), family, th)
    return out


# ---------------------------------------------------------------- shuffles #


def _fisher_yates(values: list, st: Stream) -> None:
    for i in range(len(values) - 1, 0, -1):
        j = st.below(i + 1)
        values[i], values[j] = values[j], values[i]


def shuffle_within_rows(X: np.ndarray, seed: int) -> np.ndarray:
    """Independently shuffle the entries of every row (one shared stream)."""
    M, N = X.shape
    st = Stream(derive(seed, DOM_SHUFFLE))
    out = np.empty_like(X)
    for i in range(M):
        row = list(X[i])
        _fisher_yates(row, st)
        out[i] = row
    return out


def shuffle_all(X: np.ndarray, seed: int) -> np.ndarray:
    """Shuffle all entries across the whole matrix (row-major flattening)."""
    M, N = X.shape
    st = Stream(derive(seed, DOM_SHUFFLE))
    flat = list(X.reshape(-1))
    _fisher_yates(flat, st)
    return np.asarray(flat, dtype=np.float64).reshape(M, N)


# ---------------------------------------------------------------- LAS scan #


def _top_k(values: np.ndarray, k: int) -> np.ndarray:
    # k largest entries, ties toward the smaller index; returned ascending.
    order = np.argsort(-values, kind="stable")[:k]
    order.sort()
    return order


def _apply_diff(acc: np.ndarray, source: np.ndarray, old: np.ndarray, new: np.ndarray) -> None:
    """Update ``acc`` from the sum over ``old`` source rows to ``new``.

    Removals are applied first, then additions, both in ascending index
    order; the compiled backend must follow the same sequence so that the
    floating-point accumulators stay bit-identical.
    """
    removed = np.setdiff1d(old, new, assume_unique=True)
    added = np.setdiff1d(new, old, assume_unique=True)
    for idx in removed:
        acc -= source[idx]
    for idx in added:
        acc += source[idx]


def _support_sum(X: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> float:
    # Fresh row-major accumulation over the final support, one add per cell.
    v = 0.0
    for i in rows:
        row = X[i]
        for j in cols:
            v += row[j]
    return float(v)


def _las_single(
    X: np.ndarray,
    XT: np.ndarray,
    m: int,
    n: int,
    max_iters: int,
    rseed: int,
) -> tuple[float, np.ndarray, np.ndarray, int]:
    M, N = X.shape
    if n == N:
        cols = np.arange(N, dtype=np.int64)
    else:
        st = Stream(rseed)
        perm = list(range(N))
        for i in range(n):
            j = i + st.below(N - i)
            perm[i], perm[j] = perm[j], perm[i]
        cols = np.array(sorted(perm[:n]), dtype=np.int64)

    rowacc = np.zeros(M, dtype=np.float64)
    for j in cols:
        rowacc += XT[j]
    colacc = np.zeros(N, dtype=np.float64)

    prev_rows = np.empty(0, dtype=np.int64)
    prev_cols = cols
    has_prev = False
    rows = prev_rows
    iters = 0
    while iters < max_iters:
        iters += 1
        if m == M:
            rows = np.arange(M, dtype=np.int64)
        else:
            rows = _top_k(rowacc, m)
        _apply_diff(colacc, X, prev_rows, rows)
        if n == N:
            cols = np.arange(N, dtype=np.int64)
        else:
            cols = _top_k(colacc, n)
        _apply_diff(rowacc, XT, prev_cols, cols)
        converged = (
            has_prev
            and np.array_equal(rows, prev_rows)
            and np.array_equal(cols, prev_cols)
        )
        prev_rows = rows
        prev_cols = cols
        has_prev = True
        if converged:
            break
    return _support_sum(X, rows, cols), rows, cols, iters


def _effective_restarts(M: int, N: int, m: int, n: int, restarts: int) -> int:
    # With a degenerate dimension every restart converges to the same
    # support, so a single restart already attains the maximum.
    if m == M or n == N:
        return 1
    return restarts


def las_scan(
    X: np.ndarray, m: int, n: int, restarts: int, max_iters: int, seed: int
) -> tuple[float, np.ndarray, np.ndarray, int, int]:
    """Iterative alternating scan with random restarts.

    Returns ``(value, rows, cols, total_iterations, restarts_used)``.  Ties
    between restarts resolve toward the earliest restart index.
    """
    M, N = X.shape
    if m == M and n == N:
        rows = np.arange(M, dtype=np.int64)
        cols = np.arange(N, dtype=np.int64)
        return _support_sum(X, rows, cols), rows, cols, 0, 1
    XT = np.ascontiguousarray(X.T)
    eff = _effective_restarts(M, N, m, n, restarts)
    rstate = derive(seed, DOM_RESTART)
    best_v = -math.inf
    best_rows = best_cols = None
    total_iters = 0
    for r in range(eff):
        v, rows, cols, iters = _las_single(X, XT, m, n, max_iters, derive(rstate, r))
        total_iters += iters
        if best_rows is None or v > best_v:
            best_v = v
            best_rows = rows
            best_cols = cols
    return best_v, best_rows, best_cols, total_iters, eff


def _las_exceeds(
    X: np.ndarray,
    XT: np.ndarray,
    m: int,
    n: int,
    restarts: int,
    max_iters: int,
    seed: int,
    threshold: float,
) -> bool:
    # Same statistic as las_scan; stops as soon as the exceedance is certain.
    M, N = X.shape
    if m == M and n == N:
        return _support_sum(X, np.arange(M), np.arange(N)) >= threshold
    eff = _effective_restarts(M, N, m, n, restarts)
    rstate = derive(seed, DOM_RESTART)
    for r in range(eff):
        v, _, _, _ = _las_single(X, XT, m, n, max_iters, derive(rstate, r))
        if v >= threshold:
            return True
    return False


def las_exceeds(
    X: np.ndarray,
    m: int,
    n: int,
    restarts: int,
    max_iters: int,
    seed: int,
    threshold: float,
    XT: np.ndarray | None = None,
) -> bool:
    """Whether the restarted scan reaches ``threshold``; early-exits on hit."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if XT is None:
        XT = np.ascontiguousarray(X.T)
    else:
        XT = np.ascontiguousarray(XT, dtype=np.float64)
    return _las_exceeds(X, XT, m, n, restarts, max_iters, seed, threshold)


# ------------------------------------------------- sampling w/o replacement #


def without_replacement_means(
    population: np.ndarray, m: int, trials: int, seed: int
) -> np.ndarray:
    """Means of ``m`` values sampled without replacement, one per trial."""
    vals = [float(x) for x in population]
    J = len(vals)
    out = np.empty(trials, dtype=np.float64)
    tstate = derive(seed, DOM_TRIAL)
    for t in range(trials):
        st = Stream(derive(tstate, t))
        swaps = []
        for i in range(m):
            j = i + st.below(J - i)
            swaps.append((i, j))
            vals[i], vals[j] = vals[j], vals[i]
        s = 0.0
        for i in range(m):
            s += vals[i]
        out[t] = s / m
        for i, j in reversed(swaps):
            vals[i], vals[j] = vals[j], vals[i]
    return out
