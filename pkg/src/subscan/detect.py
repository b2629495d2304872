"""Size-adaptive submatrix detection via Bonferroni-corrected scan tests.

A single-size permutation test needs the candidate block size; when the size
is unknown, the minimum p-value over a size grid is Bonferroni-corrected,
either over the full conservative factor M*N or over a dyadic net of sizes
whose cardinality product replaces the factor.  A cheap upper bound tests
only the net sizes just above a hypothesized block.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .net import ApproxNet, build_net, neighbor
from .perm import MCConfig, PValue, mc_pvalue
from .stats import as_matrix, scan_las, _check_dims

__all__ = [
    "TestOutcome",
    "bonferroni_full",
    "bonferroni_net",
    "single_size_test",
    "upper_bound_single_pair",
]


@dataclass(frozen=True)
class TestOutcome:
    """Corrected p-value, the per-size evidence, and test metadata."""

    corrected_pvalue: float
    per_size: tuple[tuple[tuple[int, int], PValue], ...]
    correction_factor: int
    sizes_tested: tuple[tuple[int, int], ...]
    alpha: float
    reject: bool
    kind: str
    B: int
    seed: int
    engine: str
    restarts: int
    max_iters: int
    share_permutations: bool


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def _size_seed(seed: int, si: int) -> int:
    return _kernels.derive(_kernels.derive(seed, _kernels.DOM_SIZE), si)


def _pvalues_for_sizes(
    Xa: np.ndarray,
    sizes: tuple[tuple[int, int], ...],
    cfg: MCConfig,
    share_permutations: bool,
    workers: int,
) -> list[PValue]:
    workers = max(1, int(workers))
    if not share_permutations:
        # Independent shuffle streams per size; each size is its own task.
        def one(si: int) -> PValue:
            m, n = sizes[si]
            return mc_pvalue(Xa, m, n, cfg.with_seed(_size_seed(cfg.seed, si)))

        if workers == 1 or len(sizes) == 1:
            return [one(si) for si in range(len(sizes))]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, range(len(sizes))))

    if cfg.exact_scan:
        raise ValueError("shared permutations are only supported with the LAS engine")
    # One shuffle per replicate, scanned at every size.  Scan seeds reuse the
    # per-size chains of the independent mode, so only the shuffles differ.
    obs = np.empty(len(sizes))
    for si, (m, n) in enumerate(sizes):
        obs[si] = scan_las(
            Xa, m, n, cfg.restarts, cfg.max_iters,
            _kernels.derive(_size_seed(cfg.seed, si), _kernels.DOM_OBSERVED),
        ).value
    ms = np.array([s[0] for s in sizes], dtype=np.int64)
    ns = np.array([s[1] for s in sizes], dtype=np.int64)

    def sweep(rng: tuple[int, int]) -> np.ndarray:
        return _kernels.sweep_exceed_range(
            Xa, ms, ns, obs, rng[0], rng[1], cfg.kind.code, cfg.seed,
            cfg.restarts, cfg.max_iters,
        )

    if workers == 1:
        counts = sweep((0, cfg.B))
    else:
        step = -(-cfg.B // workers)
        ranges = [(lo, min(lo + step, cfg.B)) for lo in range(0, cfg.B, step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = sum(pool.map(sweep, ranges))
    return [PValue.monte_carlo(int(c), cfg.B) for c in counts]


def _outcome(
    sizes: tuple[tuple[int, int], ...],
    pvalues: list[PValue],
    factor: int,
    alpha: float,
    cfg: MCConfig,
    share_permutations: bool,
) -> TestOutcome:
    corrected = min(factor * min(p.value for p in pvalues), 1.0)
    return TestOutcome(
        corrected_pvalue=corrected,
        per_size=tuple(zip(sizes, pvalues)),
        correction_factor=factor,
        sizes_tested=sizes,
        alpha=alpha,
        reject=corrected <= alpha,
        kind=cfg.kind.value,
        B=cfg.B,
        seed=cfg.seed,
        engine="exact" if cfg.exact_scan else "las",
        restarts=cfg.restarts,
        max_iters=cfg.max_iters,
        share_permutations=share_permutations,
    )


def single_size_test(X, m: int, n: int, cfg: MCConfig, alpha: float = 0.05) -> TestOutcome:
    """Permutation test at one known size; no multiplicity correction."""
    Xa = as_matrix(X)
    M, N = Xa.shape
    _check_dims(M, N, m, n)
    alpha = _check_alpha(alpha)
    p = mc_pvalue(Xa, m, n, cfg)
    return _outcome(((m, n),), [p], 1, alpha, cfg, share_permutations=False)


def bonferroni_full(
    X,
    sizes,
    cfg: MCConfig,
    alpha: float = 0.05,
    share_permutations: bool = False,
    workers: int = 1,
) -> TestOutcome:
    """Bonferroni over caller-chosen sizes with the conservative factor M*N.

    The factor is always M*N, independent of how many sizes are listed.
    """
    Xa = as_matrix(X)
    M, N = Xa.shape
    alpha = _check_alpha(alpha)
    sizes = tuple((int(m), int(n)) for m, n in sizes)
    if not sizes:
        raise ValueError("sizes must be a nonempty list of (m, n) pairs")
    for m, n in sizes:
        _check_dims(M, N, m, n)
    pvalues = _pvalues_for_sizes(Xa, sizes, cfg, share_permutations, workers)
    return _outcome(sizes, pvalues, M * N, alpha, cfg, share_permutations)


def bonferroni_net(
    X,
    kM: int,
    kN: int,
    cfg: MCConfig,
    alpha: float = 0.05,
    share_permutations: bool = False,
    workers: int = 1,
) -> TestOutcome:
    """Bonferroni over the dyadic net of sizes, corrected by the net size.

    Sizes are the Cartesian product of the row net and column net; the
    correction factor is the product of the two net cardinalities.
    """
    Xa = as_matrix(X)
    M, N = Xa.shape
    alpha = _check_alpha(alpha)
    row_net = build_net(M, kM)
    col_net = build_net(N, kN)
    sizes = tuple((m, n) for m in row_net.elements for n in col_net.elements)
    factor = len(row_net) * len(col_net)
    pvalues = _pvalues_for_sizes(Xa, sizes, cfg, share_permutations, workers)
    return _outcome(sizes, pvalues, factor, alpha, cfg, share_permutations)


def upper_bound_single_pair(
    X, m: int, n: int, kM: int, kN: int, cfg: MCConfig, workers: int = 1
) -> float:
    """Upper bound on the net-Bonferroni p-value from one permutation test.

    Tests only the net sizes just above (m, n) and multiplies by the net
    cardinality product.  Reuses the seed the full net sweep would give that
    size, so the bound always dominates the corresponding sweep result.
    """
    Xa = as_matrix(X)
    M, N = Xa.shape
    _check_dims(M, N, m, n)
    row_net = build_net(M, kM)
    col_net = build_net(N, kN)
    m_above = neighbor(row_net, m, "above")
    n_above = neighbor(col_net, n, "above")
    if m_above is None or n_above is None:
        missing = "m" if m_above is None else "n"
        raise ValueError(
            f"no net element above {missing}; use the neighbor below or the "
            "full net sweep"
        )
    si = row_net.elements.index(m_above) * len(col_net) + col_net.elements.index(n_above)
    p = mc_pvalue(
        Xa, m_above, n_above, cfg.with_seed(_size_seed(cfg.seed, si)),
        workers=workers,
    )
    factor = len(row_net) * len(col_net)
    return min(factor * p.value, 1.0)
