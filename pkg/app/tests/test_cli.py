"""Tests for the command-line interface."""

import json

import numpy as np
import pandas as pd
import pytest
from typer.testing import CliRunner

from app.main import app


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


class TestPointCommand:
    """Test cases for the point command."""

    def test_json_without_parametric_coupling(self, runner):
        result = runner.invoke(app, ["--log-level", "ERROR", "point", "--json", "--params.g2=0"])
        assert result.exit_code == 0, result.output
        report = json.loads(result.stdout)
        assert report["result"]["e_n"] == 0.0
        assert report["stability"] == "stable"
        assert report["predictions"]["tau_eq5"] is None

    def test_config_file_with_override(self, runner, tmp_path):
        path = tmp_path / "point.toml"
        path.write_text("[params]\ng1 = 10.0\ng2 = 5.0\n")
        result = runner.invoke(
            app, ["--log-level", "ERROR", "point", str(path), "--json", "--filter.bandwidth=0.5"]
        )
        assert result.exit_code == 0, result.output
        report = json.loads(result.stdout)
        assert report["filter"]["bandwidth"] == pytest.approx(0.5e5)
        assert report["result"]["e_n"] > 0.0

    def test_malformed_config_names_field(self, runner, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text('[params]\nkappa = "fast"\n')
        result = runner.invoke(app, ["--log-level", "ERROR", "point", str(path)])
        assert result.exit_code == 2
        assert "params.kappa" in result.output

    def test_unstable_point_exits_3(self, runner):
        result = runner.invoke(app, ["--log-level", "ERROR", "point", "--params.g2=11"])
        assert result.exit_code == 3

    def test_closed_form_outside_domain_exits_2(self, runner):
        result = runner.invoke(app, ["--log-level", "ERROR", "point", "--params.kappa2=2.0"])
        assert result.exit_code == 2


class TestOtherCommands:
    """Test cases for the diagnose and figure commands."""

    def test_diagnose(self, runner):
        result = runner.invoke(app, ["--log-level", "ERROR", "diagnose", "-r", "0.01"])
        assert result.exit_code == 0, result.output

    def test_figure_is_reproducible(self, runner, tmp_path):
        """A rerun of the same figure config writes byte-identical files."""
        args = [
            "--log-level",
            "ERROR",
            "figure",
            "--figure-id=2c",
            "--points=3",
            f"--output={tmp_path}",
        ]
        first = runner.invoke(app, args)
        assert first.exit_code == 0, first.output
        csv_bytes = (tmp_path / "2c.csv").read_bytes()
        svg_bytes = (tmp_path / "2c.svg").read_bytes()

        second = runner.invoke(app, args)
        assert second.exit_code == 0, second.output
        assert (tmp_path / "2c.csv").read_bytes() == csv_bytes
        assert (tmp_path / "2c.svg").read_bytes() == svg_bytes
        assert b"saturation_sigma_1" in csv_bytes

    def test_delay_figure(self, runner, tmp_path):
        args = ["-l", "ERROR", "figure", "--figure-id=3a", "--points=3", f"--output={tmp_path}"]
        result = runner.invoke(app, args)
        assert result.exit_code == 0, result.output
        frame = pd.read_csv(tmp_path / "3a.csv", comment="#")
        assert list(frame.columns) == ["g2_over_g1", "tau_analytic", "tau_numeric"]
        assert len(frame) == 3
        assert np.isfinite(frame["tau_numeric"]).all()

    def test_bandwidth_figure_curves(self, runner, tmp_path):
        args = ["-l", "ERROR", "figure", "--figure-id=2c", "--points=3", f"--output={tmp_path}"]
        result = runner.invoke(app, args)
        assert result.exit_code == 0, result.output
        frame = pd.read_csv(tmp_path / "2c.csv", comment="#")
        assert len(frame.columns) == 7

    def test_sweep_requires_sweep_section(self, runner):
        result = runner.invoke(app, ["--log-level", "ERROR", "sweep"])
        assert result.exit_code == 2
        assert "requires: sweep" in result.output

    @pytest.mark.slow
    def test_point_at_delay_optimized_coupling(self, runner):
        """G2 from the delay-optimized rule with numeric delay reproduces the closed-form E_N."""
        result = runner.invoke(
            app,
            ["--log-level", "ERROR", "point", "--json", "--params.g2=eq9", "--filter.delay=numeric"],
        )
        assert result.exit_code == 0, result.output
        report = json.loads(result.stdout)
        assert report["result"]["e_n"] == pytest.approx(report["predictions"]["e_n_eq10"], rel=0.05)


class TestLogLevel:
    """Test cases for the --log-level fallback."""

    def test_environment_level_used_without_flag(self, runner, monkeypatch):
        levels = []
        monkeypatch.setattr("app.main.setup_logger", levels.append)
        result = runner.invoke(app, ["diagnose", "-r", "0.01"])
        assert result.exit_code == 0, result.output
        assert levels == [None]

    def test_flag_overrides_environment(self, runner, monkeypatch):
        levels = []
        monkeypatch.setattr("app.main.setup_logger", levels.append)
        runner.invoke(app, ["-l", "DEBUG", "diagnose", "-r", "0.01"])
        assert levels == ["DEBUG"]
