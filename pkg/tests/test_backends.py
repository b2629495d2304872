"""Bit-exact agreement between the compiled and pure kernel backends."""

import numpy as np
import pytest

from subscan._kernels import backend_module

pure = backend_module("pure")
try:
    compiled = backend_module("compiled")
except ImportError:  # extension not built in this environment
    compiled = None

needs_compiled = pytest.mark.skipif(
    compiled is None, reason="compiled backend not available"
)

SEEDS = [0, 1, 7, 2**63 - 1, 123456789]


class TestConstants:
    @needs_compiled
    def test_domain_tags_match(self):
        for name in dir(pure):
            if name.startswith(("DOM_", "FAMILY_", "KIND_")):
                assert getattr(compiled, name, getattr(pure, name)) == getattr(
                    pure, name
                ), name

    def test_backend_names(self):
        assert pure.BACKEND_NAME == "python"
        if compiled is not None:
            assert compiled.BACKEND_NAME == "cython"


@needs_compiled
class TestSeedTree:
    def test_mix64(self):
        for s in SEEDS + [-1, -12345]:
            assert compiled.mix64(s) == pure.mix64(s)

    def test_derive_chains(self):
        for s in SEEDS:
            x = s
            for i in range(8):
                a = pure.derive(x, i)
                b = compiled.derive(x, i)
                assert a == b
                x = a


@needs_compiled
class TestStreams:
    def test_uniform_stream(self):
        for s in SEEDS:
            a = pure.uniform_stream(s, 257)
            b = compiled.uniform_stream(s, 257)
            assert (a == b).all()
            assert ((0 < a) & (a < 1)).all()

    @pytest.mark.parametrize("family", [0, 1, 2])
    @pytest.mark.parametrize("theta", [0.0, 0.4, 1.3, 4.2])
    def test_tilted_draws(self, family, theta):
        # theta 4.2 pushes the Poisson branch into its large-mean sampler
        a = pure.tilted_draws(family, theta, 500, 99)
        b = compiled.tilted_draws(family, theta, 500, 99)
        assert (a == b).all()

    def test_generate_matrix(self):
        for fam in (0, 1, 2):
            a = pure.generate_matrix(fam, 0.9, 13, 11, 4, 3, 31)
            b = compiled.generate_matrix(fam, 0.9, 13, 11, 4, 3, 31)
            assert (a == b).all()


@needs_compiled
class TestShuffles:
    def test_within_rows(self, rng):
        x = rng.normal(size=(9, 7))
        for s in SEEDS:
            a = pure.shuffle_within_rows(x, s)
            b = compiled.shuffle_within_rows(x, s)
            assert (a == b).all()

    def test_all_entries(self, rng):
        x = rng.normal(size=(9, 7))
        for s in SEEDS:
            a = pure.shuffle_all(x, s)
            b = compiled.shuffle_all(x, s)
            assert (a == b).all()


@needs_compiled
class TestScans:
    def test_las_scan(self, rng):
        x = rng.normal(size=(15, 12))
        for m, n in [(1, 1), (3, 4), (15, 12), (15, 2), (2, 12)]:
            a = pure.las_scan(x, m, n, 6, 50, 5)
            b = compiled.las_scan(x, m, n, 6, 50, 5)
            assert a[0] == b[0]
            assert (a[1] == b[1]).all()
            assert (a[2] == b[2]).all()
            assert a[3:] == b[3:]

    def test_las_exceeds(self, rng):
        x = rng.normal(size=(10, 10))
        value = pure.las_scan(x, 3, 3, 6, 50, 5)[0]
        for threshold in (value - 1, value, value + 1e-9, value + 5):
            a = pure.las_exceeds(x, 3, 3, 6, 50, 5, threshold)
            b = compiled.las_exceeds(x, 3, 3, 6, 50, 5, threshold)
            assert bool(a) == bool(b)
        assert pure.las_exceeds(x, 3, 3, 6, 50, 5, value) is True
        assert bool(compiled.las_exceeds(x, 3, 3, 6, 50, 5, value + 5)) is False

    def test_without_replacement_means(self, rng):
        pop = rng.normal(size=300)
        a = pure.without_replacement_means(pop, 20, 50, 77)
        b = compiled.without_replacement_means(pop, 20, 50, 77)
        assert (a == b).all()


@needs_compiled
class TestSharedOrchestration:
    """The Python-level MC drivers must not depend on the backend choice."""

    def test_mc_exceed_las(self, rng):
        from subscan import _kernels

        x = rng.normal(size=(12, 9))
        results = {}
        for name, mod in (("pure", pure), ("compiled", compiled)):
            saved = {
                k: getattr(_kernels, k)
                for k in ("las_scan", "las_exceeds", "shuffle_within_rows", "shuffle_all")
            }
            try:
                for k in saved:
                    setattr(_kernels, k, getattr(mod, k))
                obs, count = _kernels.mc_exceed_las(x, 3, 3, 40, 1, 21, 6, 50)
                results[name] = (obs, count)
            finally:
                for k, v in saved.items():
                    setattr(_kernels, k, v)
        assert results["pure"] == results["compiled"]
