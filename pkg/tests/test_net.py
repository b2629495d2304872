"""Dyadic size net: truncation operator, net construction, neighbors."""

import pytest

from subscan.net import ApproxNet, build_net, default_k, k_binary_approx, neighbor


def brute_approx(c: int, k: int) -> int:
    """Keep the top k binary digits of c, via string arithmetic."""
    bits = bin(c)[2:]
    if len(bits) <= k:
        return c
    return int(bits[:k] + "0" * (len(bits) - k), 2)


def brute_net(M: int, k: int) -> set[int]:
    return {brute_approx(c, k) for c in range(1, M + 1)}


class TestKBinaryApprox:
    @pytest.mark.parametrize(
        "c,k,expected",
        [
            (1024, 3, 1024),
            (1000, 3, 896),
            (5, 1, 4),
            (7, 2, 6),
            (1, 1, 1),
            (255, 4, 240),
            (256, 4, 256),
        ],
    )
    def test_examples(self, c, k, expected):
        assert k_binary_approx(c, k) == expected
        assert brute_approx(c, k) == expected

    def test_matches_string_oracle(self, rng):
        ks = [1, 2, 3, 5, 9]
        for c in rng.integers(1, 10**9, size=500):
            c = int(c)
            for k in ks:
                assert k_binary_approx(c, k) == brute_approx(c, k)

    def test_relative_error_bound(self, rng):
        for c in rng.integers(1, 10**7, size=300):
            c = int(c)
            for k in range(1, 9):
                cp = k_binary_approx(c, k)
                assert cp <= c
                assert 0 <= (c - cp) / c <= 2 ** (1 - k)

    def test_idempotent(self, rng):
        for c in rng.integers(1, 10**6, size=200):
            c = int(c)
            for k in (1, 2, 4):
                cp = k_binary_approx(c, k)
                assert k_binary_approx(cp, k) == cp

    def test_short_values_unchanged(self):
        for k in range(1, 11):
            for c in range(1, min(2**k, 300)):
                assert k_binary_approx(c, k) == c

    def test_validation(self):
        with pytest.raises(ValueError):
            k_binary_approx(0, 3)
        with pytest.raises(ValueError):
            k_binary_approx(-5, 3)
        with pytest.raises(ValueError):
            k_binary_approx(10, 0)


class TestBuildNet:
    @pytest.mark.parametrize("M", [1, 2, 3, 7, 31, 64, 100, 200, 1000, 1024, 4097])
    @pytest.mark.parametrize("k", [1, 2, 3, 4, 8])
    def test_matches_enumeration(self, M, k):
        net = build_net(M, k)
        assert set(net.elements) == brute_net(M, k)
        assert list(net.elements) == sorted(net.elements)

    def test_known_cardinalities(self):
        assert len(build_net(200, 2)) == 15
        assert len(build_net(100, 2)) == 13
        assert len(build_net(1024, 3)) == 36

    def test_row_net_200(self):
        expected = [1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 192]
        assert list(build_net(200, 2).elements) == expected

    def test_membership_and_len(self):
        net = build_net(100, 2)
        assert 48 in net
        assert 100 not in net
        assert len(net) == len(net.elements)

    def test_every_approximation_lands_in_net(self, rng):
        net = build_net(5000, 3)
        for c in rng.integers(1, 5001, size=300):
            assert k_binary_approx(int(c), 3) in net

    def test_monotone_in_k(self):
        for M in (50, 200, 1024):
            prev: set[int] = set()
            for k in range(1, 8):
                cur = set(build_net(M, k).elements)
                assert prev <= cur
                prev = cur

    def test_saturates_at_full_range(self):
        M = 100
        net = build_net(M, M.bit_length())
        assert list(net.elements) == list(range(1, M + 1))

    def test_frozen(self):
        net = build_net(10, 2)
        with pytest.raises(AttributeError):
            net.M = 20  # type: ignore[misc]
        assert isinstance(net, ApproxNet)

    def test_validation(self):
        with pytest.raises(ValueError):
            build_net(0, 2)
        with pytest.raises(ValueError):
            build_net(10, 0)


class TestDefaultK:
    def test_reference_values(self):
        assert default_k(2) == 1
        assert default_k(4) == 1
        assert default_k(16) == 2
        assert default_k(100) == 2
        assert default_k(200) == 2
        assert default_k(1024) == 3
        assert default_k(65536) == 4

    def test_matches_log_log_floor(self):
        import math

        for M in range(2, 3000):
            expected = max(1, math.floor(math.log2(math.log2(M))))
            assert default_k(M) == expected, M


class TestNeighbor:
    def test_below_and_above(self):
        net = build_net(200, 2)
        assert neighbor(net, 10, "below") == 8
        assert neighbor(net, 10, "above") == 12
        # below is inclusive, above is strictly greater
        assert neighbor(net, 12, "below") == 12
        assert neighbor(net, 12, "above") == 16

    def test_above_beyond_max_is_none(self):
        net = build_net(200, 2)
        assert max(net.elements) == 192
        assert neighbor(net, 193, "above") is None
        assert neighbor(net, 200, "above") is None

    def test_below_of_minimum(self):
        net = build_net(200, 2)
        assert neighbor(net, 1, "below") == 1

    def test_bracketing_property(self, rng):
        net = build_net(1000, 3)
        for m in rng.integers(1, 1001, size=200):
            m = int(m)
            lo = neighbor(net, m, "below")
            hi = neighbor(net, m, "above")
            assert lo is not None and lo <= m
            if hi is not None:
                assert hi >= m
                assert all(not (lo < e < m) and not (m < e < hi) for e in net.elements)

    def test_validation(self):
        net = build_net(100, 2)
        with pytest.raises(ValueError):
            neighbor(net, 5, "sideways")
        with pytest.raises(ValueError):
            neighbor(net, 0, "below")
