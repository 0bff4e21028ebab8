import json
import subprocess
import sys

import numpy as np
import pytest

from corners_lab.arrays import from_csv, validate_interlacing
from corners_lab.cli import emit_plot_data, main


class TestPlotData:
    def test_ecdf(self):
        lines = emit_plot_data([3, 1, 2], "ecdf").splitlines()
        rows = [tuple(map(float, l.split(","))) for l in lines[1:]]
        assert rows == [(1, 1 / 3), (2, 2 / 3), (3, 1.0)]

    def test_empty(self):
        with pytest.raises(ValueError):
            emit_plot_data([], "ecdf")

    def test_qq_identity(self):
        x = np.random.default_rng(0).normal(size=50)
        rows = [tuple(map(float, l.split(","))) for l in emit_plot_data(x, "qq", x).splitlines()[1:]]
        assert all(a == b for a, b in rows)

    def test_qq_needs_reference(self):
        with pytest.raises(ValueError):
            emit_plot_data([1.0], "qq")

    def test_histogram_density(self):
        x = np.random.default_rng(1).normal(size=1000)
        rows = np.array([list(map(float, l.split(","))) for l in emit_plot_data(x, "histogram", bins=20).splitlines()[1:]])
        assert rows.shape == (20, 3)
        assert np.sum((rows[:, 1] - rows[:, 0]) * rows[:, 2]) == pytest.approx(1.0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            emit_plot_data([1.0], "violin")


class TestMain:
    def test_sample_csv(self, tmp_path, monkeypatch):
        monkeypatch.delenv("CORNERS_LAB_SEED", raising=False)
        out = tmp_path / "s.csv"
        assert main(["sample", "--n", "50", "--depth", "3", "--a", "0.5,-0.2,0.1", "--out", str(out)]) == 0
        arr = from_csv(out.read_text())
        assert arr.batch_shape == (50,) and validate_interlacing(arr, 1e-8).ok

    def test_seed_env_fallback(self, tmp_path, monkeypatch):
        paths = []
        for how in ("env", "flag"):
            p = tmp_path / f"{how}.csv"
            if how == "env":
                monkeypatch.setenv("CORNERS_LAB_SEED", "77")
                main(["sample", "--n", "5", "--out", str(p)])
            else:
                monkeypatch.delenv("CORNERS_LAB_SEED")
                main(["sample", "--n", "5", "--seed", "77", "--out", str(p)])
            paths.append(p.read_text())
        assert paths[0] == paths[1]

    def test_swap_and_sweep(self, tmp_path):
        p = tmp_path / "w.csv"
        assert main(["swap", "--n", "20", "--a", "0.5 -0.2 0.1", "--k", "2", "--out", str(p)]) == 0
        assert validate_interlacing(from_csv(p.read_text()), 1e-8).ok
        assert main(["sweep", "--n", "20", "--alpha", "0.4", "--depth", "4", "--out", str(p)]) == 0
        assert from_csv(p.read_text()).depth == 4
        assert main(["sweep", "--n", "20"]) == 2

    def test_rbm_with_trajectory(self, tmp_path):
        traj = tmp_path / "traj.csv"
        out = tmp_path / "rbm.csv"
        code = main(["rbm", "--n", "10", "--depth", "2", "--dt", "0.01", "--out", str(out),
                     "--trajectory", str(traj), "--every", "10"])
        assert code == 0
        lines = traj.read_text().splitlines()
        assert lines[0] == "step,level,index,value" and len(lines) == 1 + 11 * 3

    def test_verify_exit_codes(self, tmp_path):
        out = tmp_path / "r.json"
        assert main(["verify", "elementary-swap", "--n", "20000", "--out", str(out)]) == 0
        assert json.loads(out.read_text())["passed"] is True
        # a check that cannot pass at this size: the double-swap > 0.99 changed fraction
        assert main(["verify", "double-swap", "--n", "2000", "--out", str(out)]) == 1
        assert json.loads(out.read_text())["passed"] is False

    def test_unknown_experiment(self, capsys):
        assert main(["verify", "bogus"]) != 0
        assert "experiment" in capsys.readouterr().err

    def test_config_file_flags_win(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("n = 1000\nseed = 3\nalpha = 2.0\n")
        out = tmp_path / "r.json"
        assert main(["verify", "elementary-swap", "--config", str(cfg), "--seed", "4", "--out", str(out)]) == 0
        conf = json.loads(out.read_text())["config"]
        assert (conf["seed"], conf["n_samples"], conf["alpha"]) == (4, 1000, 2.0)

    def test_bad_flag_value(self):
        assert main(["verify", "elementary-swap", "--n", "10.5"]) == 2
        assert main(["verify", "swap-theorem", "--k", "5"]) == 2

    def test_plot_data_files(self, tmp_path, capsys):
        s = tmp_path / "x.csv"
        s.write_text("x\n1\n2\n3\n")
        assert main(["plot-data", "ecdf", str(s)]) == 0
        assert capsys.readouterr().out.splitlines()[1] == "1.0,0.3333333333333333"
        e = tmp_path / "e.csv"
        e.write_text("x\n")
        assert main(["plot-data", "ecdf", str(e)]) == 2

    def test_console_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "corners_lab.cli", "verify", "nope"], capture_output=True, text=True)
        assert res.returncode != 0
