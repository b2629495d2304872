"""Dyadic size nets built from truncated binary expansions.

Keeping only the top ``k`` binary digits of an integer ``c`` yields an
approximation ``c'`` with ``c' <= c`` and relative error at most ``2**(1-k)``.
Collecting the approximations of every integer in ``[1, M]`` gives a small
grid of candidate sizes whose cardinality grows polylogarithmically in ``M``,
which is what makes the size-adaptive Bonferroni sweep affordable.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass

__all__ = [
    "ApproxNet",
    "build_net",
    "default_k",
    "k_binary_approx",
    "neighbor",
]


def k_binary_approx(c: int, k: int) -> int:
    """Zero all but the top ``k`` binary digits of ``c``.

    The result never exceeds ``c``, equals ``c`` whenever ``c < 2**k``, and
    satisfies ``(c - c') / c <= 2**(1 - k)``.
    """
    c = int(c)
    k = int(k)
    if c < 1:
        raise ValueError(f"c must be a positive integer, got {c}")
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    shift = c.bit_length() - k
    if shift <= 0:
        return c
    return (c >> shift) << shift


@dataclass(frozen=True)
class ApproxNet:
    """Sorted set of k-binary approximations of the integers in ``[1, M]``."""

    M: int
    k: int
    elements: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, value: int) -> bool:
        i = bisect_left(self.elements, value)
        return i < len(self.elements) and self.elements[i] == value


def build_net(M: int, k: int) -> ApproxNet:
    """Net of all k-binary approximations of ``1..M``, sorted ascending.

    Every integer below ``2**k`` approximates to itself; larger integers
    approximate to ``d * 2**s`` with ``d`` a k-digit binary number, and such a
    value is hit by some ``c <= M`` exactly when it is itself ``<= M``.
    """
    M = int(M)
    k = int(k)
    if M < 1:
        raise ValueError(f"M must be a positive integer, got {M}")
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    elements = set(range(1, min(1 << k, M + 1)))
    for d in range(1 << (k - 1), 1 << k):
        value = d << 1
        while value <= M:
            elements.add(value)
            value <<= 1
    return ApproxNet(M=M, k=k, elements=tuple(sorted(elements)))


def default_k(M: int) -> int:
    """Truncation depth ``max(1, floor(log2 log2 M))``, exact via bit lengths."""
    M = int(M)
    if M < 2:
        raise ValueError(f"M must be at least 2, got {M}")
    # floor(log2 x) survives flooring x, so nested bit_length chains are exact.
    log2_M = M.bit_length() - 1
    return max(1, log2_M.bit_length() - 1)


def neighbor(net: ApproxNet, m: int, mode: str) -> int | None:
    """Nearest net element: largest ``<= m`` (below) or smallest ``> m`` (above).

    ``below`` always exists because 1 is in every net; ``above`` returns None
    past the largest element.
    """
    m = int(m)
    if not 1 <= m <= net.M:
        raise ValueError(f"m must lie in [1, {net.M}], got {m}")
    if mode == "below":
        return net.elements[bisect_right(net.elements, m) - 1]
    if mode == "above":
        i = bisect_right(net.elements, m)
        return net.elements[i] if i < len(net.elements) else None
    raise ValueError(f"mode must be 'below' or 'above', got {mode!r}")
