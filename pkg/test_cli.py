"""
Tests for the command line: outputs, manifests and exit statuses.
"""

import json

import pandas as pd
import pytest
from numpy.testing import assert_allclose

from crel.cli import main
from crel.cli.commands import parse_grid
from crel.cli.config_file import build_run_config, read_config_file
from crel.core.exceptions import UsageError


@pytest.fixture
def three_file(tmp_path):
    path = tmp_path / "three.csv"
    path.write_text("x\n-1\n0\n2\n")
    return path


@pytest.fixture
def normal_file(tmp_path, normal_sample):
    path = tmp_path / "normal.csv"
    pd.DataFrame({"x": normal_sample.univariate()}).to_csv(path, index=False)
    return path


class TestWeights:
    def test_el_weights(self, three_file, tmp_path, log_dir):
        out = tmp_path / "out"
        assert main(["weights", str(three_file), "--theta", "0", "--out", str(out)]) == 0
        frame = pd.read_csv(out / "weights.csv")
        assert list(frame.columns) == ["i", "x", "psi", "weight"]
        assert_allclose(frame["weight"], [4.0 / 9.0, 1.0 / 3.0, 2.0 / 9.0], atol=1e-10)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "weights"
        assert manifest["artifacts"] == ["weights.csv"]

    def test_et_weights(self, three_file, tmp_path, log_dir):
        out = tmp_path / "out"
        assert main(["weights", str(three_file), "--theta", "0", "--gamma", "-1",
                     "--out", str(out)]) == 0
        frame = pd.read_csv(out / "weights.csv")
        assert_allclose(frame["weight"], [0.43598, 0.34604, 0.21799], atol=1e-5)

    def test_uniform_at_mean(self, three_file, tmp_path, log_dir):
        out = tmp_path / "out"
        assert main(["weights", str(three_file), "--theta", str(1.0 / 3.0), "--out", str(out)]) == 0
        assert_allclose(pd.read_csv(out / "weights.csv")["weight"], 1.0 / 3.0, atol=1e-10)

    def test_outside_hull(self, three_file, tmp_path, log_dir, capsys):
        status = main(["weights", str(three_file), "--theta", "5", "--out", str(tmp_path / "out")])
        assert status == 2
        assert "HULL_INFEASIBLE" in capsys.readouterr().err


class TestGelr:
    def test_value(self, three_file, tmp_path, log_dir):
        out = tmp_path / "out"
        assert main(["gelr", str(three_file), "--theta", "0", "--out", str(out)]) == 0
        lines = (out / "gelr.txt").read_text().splitlines()
        assert lines[2] == "hull_ok=true"
        assert lines[3].startswith("gelr=")

    def test_infeasible(self, three_file, tmp_path, log_dir):
        out = tmp_path / "out"
        assert main(["gelr", str(three_file), "--theta", "5", "--out", str(out)]) == 2
        text = (out / "gelr.txt").read_text()
        assert "hull_ok=false" in text
        assert "gelr=inf" in text

    def test_infeasible_manifest(self, three_file, tmp_path, log_dir):
        out = tmp_path / "out"
        assert main(["gelr", str(three_file), "--theta", "5", "--out", str(out)]) == 2
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["error"] == "HULL_INFEASIBLE"
        assert manifest["artifacts"] == ["gelr.txt"]
        assert manifest["config"]["theta"] == [5.0]

    def test_success_manifest_has_no_error(self, three_file, tmp_path, log_dir):
        out = tmp_path / "out"
        assert main(["gelr", str(three_file), "--theta", "0", "--out", str(out)]) == 0
        assert json.loads((out / "manifest.json").read_text())["error"] is None


class TestProfile:
    def test_curve(self, tmp_path, laplace_sample, log_dir):
        data = tmp_path / "laplace.csv"
        pd.DataFrame({"x": laplace_sample.univariate()}).to_csv(data, index=False)
        out = tmp_path / "out"
        status = main(["profile", str(data), "--psi", "median", "--grid=-0.5:0.5:5",
                       "--parametric", "laplace", "--out", str(out)])
        assert status == 0
        frame = pd.read_csv(out / "profile.csv")
        assert list(frame.columns) == ["theta", "gelr", "parametric"]
        assert len(frame) == 5

    def test_grid_required(self, three_file, tmp_path, log_dir):
        assert main(["profile", str(three_file), "--out", str(tmp_path / "out")]) == 64

    @pytest.mark.parametrize("text", ["0:1", "a:b:3", "1:0:5", "0:1:0"])
    def test_bad_grid(self, text):
        with pytest.raises(UsageError):
            parse_grid(text)

    def test_single_point_grid(self):
        assert parse_grid("0.5:0.5:1").tolist() == [0.5]


class TestPosterior:
    ARGS = ["--chain-length", "1500", "--burn-in", "300", "--alpha", "0.05,0.5,0.95", "--seed", "9"]

    def test_outputs(self, normal_file, tmp_path, log_dir):
        out = tmp_path / "out"
        assert main(["posterior", str(normal_file), *self.ARGS, "--chain", "--out", str(out)]) == 0
        quantiles = pd.read_csv(out / "quantiles.csv")
        assert list(quantiles.columns) == ["level", "value", "mc_se"]
        assert quantiles["value"].is_monotonic_increasing
        chain = pd.read_csv(out / "chain.csv")
        assert len(chain) == 1200
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["artifacts"] == ["chain.csv", "quantiles.csv", "summary.txt"]
        assert manifest["seed"] == 9

    def test_same_seed_same_files(self, normal_file, tmp_path, log_dir):
        out = tmp_path / "out"
        argv = ["posterior", str(normal_file), *self.ARGS, "--out", str(out)]
        assert main(argv) == 0
        first = {name: (out / name).read_bytes() for name in ("quantiles.csv", "summary.txt", "manifest.json")}
        assert main(argv) == 0
        second = {name: (out / name).read_bytes() for name in first}
        assert first == second

    def test_bad_sampler_settings(self, normal_file, tmp_path, log_dir):
        status = main(["posterior", str(normal_file), "--chain-length", "100", "--burn-in", "100",
                       "--out", str(tmp_path / "out")])
        assert status == 64

    def test_stuck_chain_exit_and_manifest(self, three_file, tmp_path, log_dir):
        # every proposal lands outside the hull of {-1, 0, 2}
        out = tmp_path / "out"
        status = main(["posterior", str(three_file), "--chain-length", "200", "--burn-in", "50",
                       "--proposal-scale", "1e9", "--no-adapt", "--alpha", "0.5",
                       "--out", str(out)])
        assert status == 3
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["error"] == "DEGENERATE_CHAIN"
        assert manifest["artifacts"] == []

    def test_usage_error_manifest(self, tmp_path, log_dir):
        out = tmp_path / "out"
        assert main(["posterior", "--out", str(out)]) == 64
        assert json.loads((out / "manifest.json").read_text())["error"] == "INVALID_REQUEST"


class TestReproduce:
    def test_table2(self, tmp_path, log_dir):
        out = tmp_path / "out"
        assert main(["reproduce", "--table", "2", "--out", str(out)]) == 0
        assert (out / "table2.csv").exists()
        text = (out / "table2.txt").read_text()
        assert "8.88" in text
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["artifacts"] == ["table2.csv", "table2.txt"]

    def test_table_required(self, tmp_path, log_dir):
        assert main(["reproduce", "--out", str(tmp_path / "out")]) == 64

    def test_unknown_table(self, tmp_path, log_dir):
        assert main(["reproduce", "--table", "9", "--out", str(tmp_path / "out")]) == 64


class TestUsage:
    def test_no_subcommand(self, log_dir):
        assert main([]) == 64

    def test_unknown_flag(self, three_file, log_dir):
        assert main(["weights", str(three_file), "--theta", "0", "--bogus"]) == 64

    def test_data_required(self, tmp_path, log_dir):
        assert main(["weights", "--theta", "0", "--out", str(tmp_path / "out")]) == 64

    def test_theta_required(self, three_file, tmp_path, log_dir):
        assert main(["weights", str(three_file), "--out", str(tmp_path / "out")]) == 64

    def test_theta_size(self, three_file, tmp_path, log_dir):
        assert main(["weights", str(three_file), "--theta", "0,1", "--out", str(tmp_path / "out")]) == 64

    def test_missing_data_file(self, tmp_path, log_dir):
        assert main(["weights", str(tmp_path / "nope.csv"), "--theta", "0",
                     "--out", str(tmp_path / "out")]) == 64


class TestConfigFile:
    def test_flags_override_file(self, three_file, tmp_path, log_dir):
        config = tmp_path / "run.conf"
        config.write_text(f"# weights run\ndata = {three_file}\ntheta = 0\ngamma = 0.5\n")
        out = tmp_path / "out"
        assert main(["weights", "--config", str(config), "--gamma", "-1", "--out", str(out)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["gamma"] == -1.0
        assert_allclose(pd.read_csv(out / "weights.csv")["weight"], [0.43598, 0.34604, 0.21799],
                        atol=1e-5)

    def test_yaml(self, tmp_path):
        config = tmp_path / "run.yaml"
        config.write_text("psi: huber\nalpha: [0.1, 0.9]\nchain-length: 1000\n")
        values = read_config_file(config)
        assert values == {"psi": "huber", "alpha": [0.1, 0.9], "chain_length": 1000}

    def test_comma_lists(self):
        cfg = build_run_config({"theta": "0.5,1", "alpha": "0.1, 0.9"}, {})
        assert cfg.theta == [0.5, 1.0]
        assert cfg.alpha == [0.1, 0.9]

    def test_unknown_key(self, tmp_path, three_file, log_dir):
        config = tmp_path / "run.conf"
        config.write_text("colour = blue\n")
        assert main(["weights", str(three_file), "--config", str(config), "--theta", "0",
                     "--out", str(tmp_path / "out")]) == 64

    def test_malformed_line(self, tmp_path):
        config = tmp_path / "run.conf"
        config.write_text("gamma 0.5\n")
        with pytest.raises(UsageError):
            read_config_file(config)
