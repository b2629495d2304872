"""Simulation grid runner: config handling, CSV round-trip, determinism."""

import json

import pytest

from subscan.experiment import (
    ExperimentConfig,
    csv_text,
    read_rows,
    run_experiment,
    write_csv,
)
from subscan.net import build_net, default_k
from subscan.theory import theta_crit

SMALL = dict(
    family="gaussian",
    M=30,
    N=20,
    sizes=((3, 4),),
    kinds=("bidimensional",),
    multipliers=(0.7, 1.3),
    B=40,
    reps=3,
    seed=17,
)


@pytest.fixture(scope="module")
def small_cfg():
    return ExperimentConfig(**SMALL)


@pytest.fixture(scope="module")
def small_rows(small_cfg):
    return run_experiment(small_cfg, timing=True)


class TestConfig:
    def test_defaults_match_protocol(self):
        cfg = ExperimentConfig()
        assert (cfg.M, cfg.N) == (200, 100)
        assert cfg.sizes == ((10, 15), (30, 10))
        assert cfg.B == 500
        assert cfg.reps == 100
        assert cfg.multipliers == tuple(0.625 + 0.125 * i for i in range(8))
        assert cfg.mode == "net-bonferroni"

    def test_effective_k_defaults(self):
        assert ExperimentConfig().effective_k == (default_k(200), default_k(100))
        assert ExperimentConfig(k_M=4, k_N=3).effective_k == (4, 3)

    def test_from_json_round_trip(self, small_cfg):
        again = ExperimentConfig.from_json(json.dumps(small_cfg.to_dict()))
        assert again == small_cfg

    def test_from_json_rejects_unknown(self):
        with pytest.raises(ValueError, match="unknown"):
            ExperimentConfig.from_json('{"family": "gaussian", "bogus": 1}')

    def test_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(multipliers=(1.0, 0.5))
        with pytest.raises(ValueError):
            ExperimentConfig(multipliers=(-0.5, 1.0))
        with pytest.raises(ValueError):
            ExperimentConfig(sizes=((300, 10),))
        with pytest.raises(ValueError):
            ExperimentConfig(mode="bogus")
        with pytest.raises(ValueError):
            ExperimentConfig(reps=0)


class TestRunExperiment:
    def test_row_count_formula(self, small_cfg, small_rows):
        expect = (
            len(small_cfg.multipliers)
            * len(small_cfg.sizes)
            * len(small_cfg.kinds)
            * small_cfg.reps
        )
        assert len(small_rows) == expect == 6

    def test_lexicographic_order(self, small_rows):
        coords = [(r.m, r.n, r.kind, r.multiplier, r.rep) for r in small_rows]
        assert coords == sorted(coords)

    def test_theta_scales_with_multiplier(self, small_rows):
        crit = theta_crit(30, 20, 3, 4)
        for r in small_rows:
            assert r.theta == pytest.approx(r.multiplier * crit, rel=1e-12)

    def test_net_cardinalities_recorded(self, small_cfg, small_rows):
        kM, kN = small_cfg.effective_k
        for r in small_rows:
            assert (r.k_M, r.k_N) == (kM, kN)
            assert r.card_M == len(build_net(30, kM))
            assert r.card_N == len(build_net(20, kN))

    def test_floor_and_pvalue_ranges(self, small_rows):
        for r in small_rows:
            assert 0 < r.pvalue <= 1
            assert 0 < r.floor <= 1
            assert r.floor == min(r.card_M * r.card_N / (r.B + 1), 1.0)

    def test_timing_recorded_when_enabled(self, small_rows):
        assert all(r.millis is not None and r.millis >= 0 for r in small_rows)

    def test_worker_invariance(self, small_cfg, small_rows):
        rows4 = run_experiment(small_cfg, workers=4, timing=True)
        strip = lambda rows: [
            tuple(
                getattr(r, f)
                for f in type(r).__dataclass_fields__
                if f != "millis"
            )
            for r in rows
        ]
        assert strip(rows4) == strip(small_rows)

    def test_seed_changes_results(self, small_cfg, small_rows):
        import dataclasses

        other = dataclasses.replace(small_cfg, seed=99)
        rows = run_experiment(other, timing=False)
        assert [r.pvalue for r in rows] != [r.pvalue for r in small_rows] or [
            r.theta for r in rows
        ] == [r.theta for r in small_rows]
        assert all(r.seed != s.seed for r, s in zip(rows, small_rows))

    def test_upper_bound_mode(self):
        cfg = ExperimentConfig(
            **{**SMALL, "mode": "upper-bound", "multipliers": (1.2,), "reps": 2}
        )
        rows = run_experiment(cfg, timing=False)
        assert len(rows) == 2
        for r in rows:
            assert 0 < r.pvalue <= 1


class TestCsv:
    def test_round_trip_exact(self, small_cfg, small_rows, tmp_path):
        path = tmp_path / "rows.csv"
        write_csv(small_rows, path, small_cfg, timing=True)
        echo, back = read_rows(path)
        # every data column is exact; millis is quantized to microseconds
        fields = [f for f in type(small_rows[0]).__dataclass_fields__ if f != "millis"]
        for a, b in zip(back, small_rows):
            assert [getattr(a, f) for f in fields] == [getattr(b, f) for f in fields]
            assert a.millis == pytest.approx(b.millis, abs=5e-4)
        assert echo["M"] == 30
        assert echo["sizes"] == [[3, 4]]
        assert echo["k_M"] == small_cfg.effective_k[0]

    def test_round_trip_without_timing(self, small_cfg, small_rows, tmp_path):
        path = tmp_path / "rows.csv"
        write_csv(small_rows, path, small_cfg, timing=False)
        _, back = read_rows(path)
        assert all(r.millis is None for r in back)
        assert [r.pvalue for r in back] == [r.pvalue for r in small_rows]

    def test_text_matches_file(self, small_cfg, small_rows, tmp_path):
        path = tmp_path / "rows.csv"
        write_csv(small_rows, path, small_cfg, timing=False)
        assert path.read_text() == csv_text(small_rows, small_cfg, timing=False)

    def test_byte_identical_across_workers(self, small_cfg, tmp_path):
        texts = {
            csv_text(run_experiment(small_cfg, workers=w, timing=False), small_cfg, False)
            for w in (1, 3)
        }
        assert len(texts) == 1

    def test_header_only_file(self, small_cfg, tmp_path):
        path = tmp_path / "empty.csv"
        write_csv([], path, small_cfg, timing=False)
        echo, rows = read_rows(path)
        assert rows == []
        assert echo["B"] == 40

    def test_malformed_reports_line_number(self, small_cfg, small_rows, tmp_path):
        path = tmp_path / "bad.csv"
        text = csv_text(small_rows, small_cfg, timing=False)
        lines = text.splitlines()
        lines[-1] = lines[-1] + ",extra"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ValueError, match=rf"line {len(lines)}"):
            read_rows(path)

    def test_bad_number_reports_line(self, small_cfg, small_rows, tmp_path):
        path = tmp_path / "bad2.csv"
        text = csv_text(small_rows[:1], small_cfg, timing=False)
        path.write_text(text.replace("gaussian,30", "gaussian,thirty"))
        with pytest.raises(ValueError, match="line"):
            read_rows(path)

    def test_missing_header_rejected(self, tmp_path):
        path = tmp_path / "none.csv"
        path.write_text("# M = 3\n")
        with pytest.raises(ValueError, match="header"):
            read_rows(path)
