import json

import numpy as np
import pytest

from corners_lab.arrays import from_csv
from corners_lab.experiments import (
    EXPERIMENTS,
    ConfigError,
    ExperimentConfig,
    load_config_file,
    run_experiment,
    structural_suite,
)


def small(name, **kw):
    return ExperimentConfig(name, **kw)


class TestConfig:
    def test_defaults_filled(self):
        cfg = small("global-shift").resolved()
        assert (cfg.depth, cfg.alpha, cfg.t, cfg.n_samples) == (5, 0.4, 1.0, 100_000)

    def test_seed_from_env(self, monkeypatch):
        monkeypatch.setenv("CORNERS_LAB_SEED", "123")
        assert small("elementary-swap").resolved().seed == 123

    def test_unknown_experiment(self):
        with pytest.raises(ConfigError) as exc:
            small("no-such-thing").resolved()
        assert exc.value.field == "experiment"

    @pytest.mark.parametrize("kw,field", [
        (dict(n_samples=0), "n_samples"),
        (dict(t=-1.0), "t"),
        (dict(alpha=0.0), "alpha"),
        (dict(k=3), "k"),
        (dict(a=(0.1, 0.1), experiment_="density-oracle"), "a"),
        (dict(c=1.0, d=0.0, experiment_="elementary-swap"), "d"),
        (dict(dt=1e-3, t=1.0, experiment_="bm-identity"), "dt"),
    ])
    def test_field_level_errors(self, kw, field):
        name = kw.pop("experiment_", "swap-theorem")
        with pytest.raises(ConfigError) as exc:
            small(name, **kw).resolved()
        assert exc.value.field == field

    def test_config_file(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("# comment\nn = 1e4\nalpha = 0.7   # rate\na = 0.5, -0.2, 0.1\nseed = 9\n")
        assert load_config_file(p) == {"n_samples": 10_000, "alpha": 0.7, "a": (0.5, -0.2, 0.1), "seed": 9}

    def test_config_file_errors(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("bogus = 1\n")
        with pytest.raises(ConfigError):
            load_config_file(p)
        p.write_text("depth = two\n")
        with pytest.raises(ConfigError):
            load_config_file(p)


class TestReports:
    def test_elementary_swap_report(self):
        r = run_experiment(small("elementary-swap", seed=42))
        assert r.passed
        d = json.loads(r.to_json())
        assert d["config"]["seed"] == 42 and d["config"]["n_samples"] == 100_000
        names = [t["name"] for t in d["tests"]]
        assert any("E_-1(0,1)" in n for n in names)
        assert all(t["seed"] == 42 for t in d["tests"])
        assert "wall_clock_seconds" not in d and "streams" in d and "version" in d

    def test_global_shift_two_levels_has_gaussian_check(self):
        r = run_experiment(small("global-shift", depth=2, n_samples=20_000))
        assert any("Normal(-0.4, 1)" in t.name for t in r.tests)
        assert r.passed

    def test_byte_identical_and_thread_independent(self, tmp_path):
        outs = []
        for threads in (1, 3):
            cfg = small("gibbs-invariance", n_samples=25_000, seed=5, threads=threads, out=str(tmp_path / "r.json"))
            run_experiment(cfg)
            outs.append((tmp_path / "r.json").read_bytes())
        assert outs[0] == outs[1]
        timing = json.loads((tmp_path / "r.timing.json").read_text())
        assert timing["wall_clock_seconds"] > 0

    def test_different_seed_differs(self):
        a = run_experiment(small("elementary-swap", seed=1, n_samples=1000)).to_json()
        b = run_experiment(small("elementary-swap", seed=2, n_samples=1000)).to_json()
        assert a != b

    def test_dump(self, tmp_path):
        run_experiment(small("gibbs-invariance", n_samples=100, dump=str(tmp_path / "d")))
        arr = from_csv((tmp_path / "d_resampled.csv").read_text())
        assert arr.batch_shape == (100,) and arr.depth == 3

    def test_every_experiment_registered_with_claim(self):
        assert set(EXPERIMENTS) >= {
            "swap-theorem", "double-swap", "global-shift", "bm-identity", "bm-shift",
            "density-oracle", "gibbs-invariance", "elementary-swap",
        }
        assert all(e.claim for e in EXPERIMENTS.values())

    def test_structural_suite_small(self):
        results = structural_suite(500, seed=3)
        assert all(r.passed for r in results)

    def test_bm_experiments_small(self):
        for name in ("bm-identity", "bm-shift"):
            r = run_experiment(small(name, n_samples=2000, dt=1 / 320))
            assert len(r.tests) >= 5
            assert np.isfinite([t.statistic for t in r.tests]).all()
