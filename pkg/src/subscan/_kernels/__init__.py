"""Kernel backend selection.

The compiled Cython backend is used when importable; otherwise the package
falls back to the pure-Python reference implementation.  Both produce
bit-identical results, so the choice only affects speed.  Set the
``SUBSCAN_BACKEND`` environment variable to ``pure`` or ``compiled`` to force
a backend (``compiled`` raises if the extension is missing).
"""

from __future__ import annotations

import os

import numpy as np

from . import _pure

_FORCED = os.environ.get("SUBSCAN_BACKEND", "").strip().lower()

if _FORCED == "pure":
    _impl = _pure
elif _FORCED in ("", "compiled"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        if _FORCED == "compiled":
            raise
        _impl = _pure
else:
    raise ValueError(
        f"SUBSCAN_BACKEND={_FORCED!r} is not recognized; use 'pure' or 'compiled'"
    )

BACKEND = _impl.BACKEND_NAME

# Integer seed-tree helpers are backend independent; the pure versions are
# authoritative and the compiled ones are checked against them in the tests.
mix64 = _pure.mix64
derive = _pure.derive
Stream = _pure.Stream

DOM_ENTRY = _pure.DOM_ENTRY
DOM_DRAW = _pure.DOM_DRAW
DOM_SHUFFLE = _pure.DOM_SHUFFLE
DOM_REPLICATE = _pure.DOM_REPLICATE
DOM_OBSERVED = _pure.DOM_OBSERVED
DOM_SCAN = _pure.DOM_SCAN
DOM_RESTART = _pure.DOM_RESTART
DOM_SIZE = _pure.DOM_SIZE
DOM_TRIAL = _pure.DOM_TRIAL
DOM_CELL = _pure.DOM_CELL

FAMILY_GAUSSIAN = _pure.FAMILY_GAUSSIAN
FAMILY_CENTERED_POISSON = _pure.FAMILY_CENTERED_POISSON
FAMILY_RADEMACHER = _pure.FAMILY_RADEMACHER

KIND_UNIDIMENSIONAL = _pure.KIND_UNIDIMENSIONAL
KIND_BIDIMENSIONAL = _pure.KIND_BIDIMENSIONAL

uniform_stream = _impl.uniform_stream
tilted_draws = _impl.tilted_draws
generate_matrix = _impl.generate_matrix
shuffle_within_rows = _impl.shuffle_within_rows
shuffle_all = _impl.shuffle_all
las_scan = _impl.las_scan
las_exceeds = _impl.las_exceeds
without_replacement_means = _impl.without_replacement_means


def backend_module(name: str):
    """Return a specific backend module ('pure' or 'compiled') for tests."""
    if name == "pure":
        return _pure
    if name == "compiled":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")


def _shuffle(X, kind: int, seed: int):
    if kind == KIND_UNIDIMENSIONAL:
        return shuffle_within_rows(X, seed)
    if kind == KIND_BIDIMENSIONAL:
        return shuffle_all(X, seed)
    raise ValueError(f"unknown permutation kind {kind!r}")


def mc_exceed_range(X, m, n, threshold, b_start, b_stop, kind, seed, restarts, max_iters):
    """Count replicates in ``[b_start, b_stop)`` whose scan reaches ``threshold``.

    Replicate ``b`` is a pure function of ``(seed, b)``, so disjoint ranges can
    run on separate threads and their counts add up to the full-range count.
    """
    Xc = np.ascontiguousarray(X, dtype=np.float64)
    rep_state = derive(seed, DOM_REPLICATE)
    scan_state = derive(seed, DOM_SCAN)
    count = 0
    for b in range(b_start, b_stop):
        Xp = _shuffle(Xc, kind, derive(rep_state, b))
        if las_exceeds(Xp, m, n, restarts, max_iters, derive(scan_state, b), threshold):
            count += 1
    return count


def mc_exceed_las(X, m, n, B, kind, seed, restarts, max_iters):
    """Observed scan value and its exceedance count over ``B`` shuffles."""
    Xc = np.ascontiguousarray(X, dtype=np.float64)
    obs, _, _, _, _ = las_scan(Xc, m, n, restarts, max_iters, derive(seed, DOM_OBSERVED))
    return obs, mc_exceed_range(Xc, m, n, obs, 0, B, kind, seed, restarts, max_iters)


def sweep_exceed_range(X, ms, ns, obs, b_start, b_stop, kind, seed, restarts, max_iters):
    """Exceedance counts for several sizes sharing one shuffle per replicate.

    Replicate ``b`` draws a single permuted matrix and scans it at every
    size.  Scan seeds reuse the per-size chains of independent calibration
    so the shared and independent modes differ only in the shuffles.
    """
    Xc = np.ascontiguousarray(X, dtype=np.float64)
    S = len(ms)
    counts = np.zeros(S, dtype=np.int64)
    rep_state = derive(seed, DOM_REPLICATE)
    size_state = derive(seed, DOM_SIZE)
    scan_states = [derive(derive(size_state, si), DOM_SCAN) for si in range(S)]
    thresholds = [float(obs[si]) for si in range(S)]
    sizes = [(int(ms[si]), int(ns[si])) for si in range(S)]
    for b in range(b_start, b_stop):
        Xp = _shuffle(Xc, kind, derive(rep_state, b))
        XpT = np.ascontiguousarray(Xp.T)
        for si in range(S):
            m, n = sizes[si]
            if las_exceeds(
                Xp, m, n, restarts, max_iters,
                derive(scan_states[si], b), thresholds[si], XpT,
            ):
                counts[si] += 1
    return counts
