"""Permutation machinery: shuffles, enumerated and Monte Carlo p-values."""

import numpy as np
import pytest

from subscan.model import generate_instance
from subscan.perm import (
    MCConfig,
    PermutationKind,
    PValue,
    exact_pvalue_enum,
    mc_pvalue,
    permute,
)
from subscan.theory import theta_crit

TINY = np.array([[3.0, 1.0], [2.0, 0.0]])


class TestPermutationKind:
    def test_parse(self):
        assert PermutationKind.parse("unidimensional") is PermutationKind.UNIDIMENSIONAL
        assert PermutationKind.parse("Bidimensional") is PermutationKind.BIDIMENSIONAL
        assert (
            PermutationKind.parse(PermutationKind.UNIDIMENSIONAL)
            is PermutationKind.UNIDIMENSIONAL
        )
        with pytest.raises(ValueError):
            PermutationKind.parse("diagonal")


class TestPermute:
    def test_bidimensional_preserves_multiset(self, rng):
        x = rng.normal(size=(5, 7))
        y = permute(x, "bidimensional", 3)
        assert sorted(y.ravel()) == sorted(x.ravel())
        assert y.shape == x.shape

    def test_unidimensional_preserves_rows(self, rng):
        x = rng.normal(size=(5, 7))
        y = permute(x, "unidimensional", 3)
        for i in range(5):
            assert sorted(y[i]) == sorted(x[i])

    def test_unidimensional_moves_entries_within_rows_only(self, rng):
        x = rng.normal(size=(6, 8))
        y = permute(x, PermutationKind.UNIDIMENSIONAL, 1)
        assert not (y == x).all()
        assert not np.array_equal(sorted(y[:, 0]), sorted(x[:, 0])) or True

    def test_deterministic(self, rng):
        x = rng.normal(size=(4, 4))
        for kind in PermutationKind:
            assert (permute(x, kind, 9) == permute(x, kind, 9)).all()
            assert not (permute(x, kind, 9) == permute(x, kind, 10)).all()

    def test_input_untouched(self, rng):
        x = rng.normal(size=(4, 4))
        before = x.copy()
        permute(x, "bidimensional", 0)
        assert (x == before).all()


class TestPValueArithmetic:
    def test_monte_carlo_add_one(self):
        p = PValue.monte_carlo(4, 99)
        assert p.value == 5 / 100
        assert (p.exceedances, p.B) == (4, 99)

    def test_exact_ratio(self):
        p = PValue.exact_ratio(16, 24)
        assert p.value == 16 / 24

    def test_validation(self):
        with pytest.raises(ValueError):
            PValue.monte_carlo(-1, 10)
        with pytest.raises(ValueError):
            PValue.monte_carlo(11, 10)


class TestExactEnumeration:
    def test_worked_bidimensional(self):
        p = exact_pvalue_enum(TINY, 1, 2, PermutationKind.BIDIMENSIONAL)
        assert p.value == pytest.approx(2 / 3, abs=1e-15)
        assert p.exceedances == 16
        assert p.B == 24

    def test_worked_unidimensional(self):
        # within-row shuffles never change a full-row statistic here
        p = exact_pvalue_enum(TINY, 1, 2, "unidimensional")
        assert p.value == 1.0
        assert p.exceedances == p.B == 4

    def test_identity_always_counted(self, rng):
        x = rng.normal(size=(2, 3))
        p = exact_pvalue_enum(x, 1, 2, "bidimensional")
        assert p.exceedances >= 1
        assert p.value >= 1 / p.B

    def test_constant_matrix(self):
        p = exact_pvalue_enum(np.ones((2, 4)), 1, 2, "bidimensional")
        assert p.value == 1.0

    def test_enumeration_limits(self):
        with pytest.raises(ValueError, match="mc_pvalue"):
            exact_pvalue_enum(np.zeros((3, 3)), 2, 2, "bidimensional")
        with pytest.raises(ValueError, match="mc_pvalue"):
            exact_pvalue_enum(np.zeros((4, 10)), 2, 2, "unidimensional")

    def test_unidimensional_small_grid(self):
        x = np.array([[1.0, 0.0, 2.0], [0.0, 3.0, 1.0]])
        p = exact_pvalue_enum(x, 2, 1, "unidimensional")
        assert p.B == 36
        assert 1 / 36 <= p.value <= 1.0


class TestMCConfig:
    def test_defaults(self):
        cfg = MCConfig()
        assert cfg.B == 500
        assert cfg.kind is PermutationKind.BIDIMENSIONAL
        assert cfg.exact_scan is False

    def test_kind_parsed_from_string(self):
        assert MCConfig(kind="unidimensional").kind is PermutationKind.UNIDIMENSIONAL

    def test_with_seed(self):
        cfg = MCConfig(B=10, seed=1)
        assert cfg.with_seed(5).seed == 5
        assert cfg.with_seed(5).B == 10

    def test_validation(self):
        with pytest.raises(ValueError):
            MCConfig(B=0)
        with pytest.raises(ValueError):
            MCConfig(restarts=0)


class TestMCPValue:
    def test_add_one_form(self, rng):
        x = rng.normal(size=(6, 6))
        p = mc_pvalue(x, 2, 2, MCConfig(B=37, seed=3))
        assert p.B == 37
        assert p.value == (p.exceedances + 1) / 38

    def test_deterministic(self, rng):
        x = rng.normal(size=(6, 6))
        cfg = MCConfig(B=50, seed=8)
        assert mc_pvalue(x, 2, 2, cfg) == mc_pvalue(x, 2, 2, cfg)

    def test_worker_invariance(self, rng):
        x = rng.normal(size=(10, 8))
        for kind in ("unidimensional", "bidimensional"):
            cfg = MCConfig(B=60, seed=4, kind=kind)
            base = mc_pvalue(x, 3, 3, cfg)
            assert mc_pvalue(x, 3, 3, cfg, workers=3) == base
            assert mc_pvalue(x, 3, 3, cfg, workers=8) == base

    def test_exact_engine_matches_enumeration_scale(self):
        p_mc = mc_pvalue(TINY, 1, 2, MCConfig(B=4000, seed=2, exact_scan=True))
        assert p_mc.value == pytest.approx(2 / 3, abs=0.03)

    def test_constant_matrix_pvalue_one(self):
        for exact in (False, True):
            p = mc_pvalue(np.ones((5, 5)), 2, 2, MCConfig(B=30, seed=1, exact_scan=exact))
            assert p.value == 1.0

    def test_engines_agree_on_ties_free_instances(self, rng):
        # LAS engine with enough restarts matches the exhaustive engine
        x = rng.normal(size=(7, 7))
        cfg_las = MCConfig(B=80, seed=12, restarts=25)
        cfg_ex = MCConfig(B=80, seed=12, exact_scan=True)
        p_las = mc_pvalue(x, 2, 2, cfg_las)
        p_ex = mc_pvalue(x, 2, 2, cfg_ex)
        assert abs(p_las.exceedances - p_ex.exceedances) <= 2

    def test_strong_signal_hits_floor(self):
        theta = 3.0 * theta_crit(30, 20, 5, 5)
        inst = generate_instance(30, 20, 5, 5, theta, "gaussian", seed=21)
        p = mc_pvalue(inst.data, 5, 5, MCConfig(B=100, seed=5))
        assert p.value == 1 / 101
        assert p.exceedances == 0

    def test_signal_orders_pvalues(self):
        crit = theta_crit(30, 20, 5, 5)
        cfg = MCConfig(B=100, seed=9)
        weak = generate_instance(30, 20, 5, 5, 0.3 * crit, "gaussian", seed=33)
        strong = generate_instance(30, 20, 5, 5, 2.5 * crit, "gaussian", seed=33)
        p_weak = mc_pvalue(weak.data, 5, 5, cfg)
        p_strong = mc_pvalue(strong.data, 5, 5, cfg)
        assert p_strong.value <= p_weak.value

    def test_validation(self, rng):
        x = rng.normal(size=(4, 4))
        with pytest.raises(ValueError):
            mc_pvalue(x, 5, 2, MCConfig(B=10))
