"""Tests for utility functions."""

import warnings
from pathlib import Path
from unittest.mock import patch

import pandas as pd
import pytest
from loguru import logger

from app.errors import ConfigError, RegimeWarning
from app.models.config import settings
from app.models.input import RunConfig, RunMode, SweepSpec, SweepVariable
from app.models.output import (
    Curve,
    FigureData,
    Marker,
    StabilityVerdict,
    SweepResult,
    SweepRow,
)
from app.services.formulas import saturation_diagnostic
from app.utils.cli import (
    display_diagnostic,
    display_sweep,
    load_config,
    parse_overrides,
)
from app.utils.export import (
    atomic_write,
    figure_frame,
    render_svg,
    sweep_frame,
    write_figure_csv,
    write_sweep_csv,
)
from app.utils.logging import setup_logger


@pytest.fixture
def sample_figure() -> FigureData:
    return FigureData(
        figure_id="2a",
        title="Sample",
        x_label="G2/G1",
        x_column="g2_over_g1",
        y_label="E_N",
        x=[0.99, 0.995, 1.0],
        curves=[
            Curve(label="numeric", column="e_n", values=[1.0, 1.5, None]),
            Curve(label="closed form", column="e_n_closed", values=[1.1, 1.4, 1.2], analytic=True),
        ],
        markers=[Marker(label="optimum", x=0.995, y=1.5)],
        notes=["sigma_b = 0.00433 kappa"],
    )


@pytest.fixture
def sample_sweep(base_params, wide_filter) -> SweepResult:
    spec = SweepSpec(
        variable=SweepVariable.G2_OVER_G1,
        lo=0.5,
        hi=1.1,
        points=2,
        params=base_params,
        filter=wide_filter,
    )
    rows = [
        SweepRow(
            value=0.5,
            g1=1e6,
            g2=5e5,
            tau=0.0,
            e_n=0.8,
            c12_abs=0.9,
            n1=0.3,
            n2=1.3,
            stability=StabilityVerdict.STABLE,
        ),
        SweepRow(value=1.1, g1=1e6, g2=1.1e6, stability=StabilityVerdict.UNSTABLE, error="unstable"),
    ]
    return SweepResult(spec=spec, rows=rows)


class TestConfigLoading:
    """Test cases for TOML configs and command-line overrides."""

    def test_parse_overrides(self):
        data = parse_overrides(["--params.g1=3", "--emit-svg=false", "--filter.delay=numeric"])
        assert data == {"params": {"g1": 3}, "emit_svg": False, "filter": {"delay": "numeric"}}

    def test_parse_overrides_rejects_malformed(self):
        with pytest.raises(ConfigError):
            parse_overrides(["params.g1=3"])
        with pytest.raises(ConfigError):
            parse_overrides(["--params=1", "--params.g1=2"])

    def test_load_config_with_overrides(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text('[params]\ng1 = 12.0\ng2 = "eq9"\n\n[filter]\nbandwidth = 0.5\n')
        cfg = load_config(path, RunMode.POINT, ["--params.g1=20", "--filter.delay=numeric"])
        assert cfg.mode is RunMode.POINT
        assert cfg.params.g1 == 20.0
        assert cfg.params.g2 == "eq9"
        assert cfg.filter.bandwidth == 0.5
        assert cfg.filter.delay == "numeric"

    def test_defaults_without_file(self):
        cfg = load_config(None, RunMode.POINT)
        assert cfg.params.g1 == 10.0
        assert cfg.params.g2 == "eq6"

    def test_invalid_field_is_named(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text("[params]\nkappa = -1.0\n")
        with pytest.raises(ConfigError, match="params.kappa"):
            load_config(path, RunMode.POINT)

    def test_unknown_field_is_named(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text("[filter]\nwidth = 1.0\n")
        with pytest.raises(ConfigError, match="filter.width"):
            load_config(path, RunMode.POINT)

    def test_mode_mismatch(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text('mode = "sweep"\n')
        with pytest.raises(ConfigError, match="mode"):
            load_config(path, RunMode.POINT)

    def test_malformed_toml(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text("[params\n")
        with pytest.raises(ConfigError, match="malformed"):
            load_config(path, RunMode.POINT)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="could not read"):
            load_config(tmp_path / "absent.toml", RunMode.POINT)

    @pytest.mark.parametrize(
        "name, mode",
        [("point", RunMode.POINT), ("sweep_tau", RunMode.SWEEP), ("figure_2a", RunMode.FIGURE)],
    )
    def test_shipped_configs(self, name, mode):
        path = Path(__file__).resolve().parents[2] / "configs" / f"{name}.toml"
        assert load_config(path, mode).mode is mode


class TestExport:
    """Test cases for CSV and SVG output."""

    def test_atomic_write(self, tmp_path):
        path = atomic_write(tmp_path / "nested" / "out.txt", b"payload")
        assert path.read_bytes() == b"payload"
        assert [p.name for p in path.parent.iterdir()] == ["out.txt"]

    def test_sweep_frame_columns(self, sample_sweep):
        frame = sweep_frame(sample_sweep)
        assert list(frame.columns) == [
            "g2_over_g1",
            "g1",
            "g2",
            "tau",
            "e_n",
            "c12_abs",
            "n1",
            "n2",
            "stability",
            "annotations",
            "error",
        ]
        assert frame["stability"].tolist() == ["stable", "unstable"]
        assert pd.isna(frame["e_n"].iloc[1])

    def test_sweep_csv_echoes_config(self, sample_sweep, tmp_path):
        """The config line reloads to the configuration that produced the file."""
        cfg = RunConfig.model_validate(
            {"mode": "sweep", "sweep": {"variable": "g2_over_g1", "lo": 0.5, "hi": 1.1, "points": 2}}
        )
        path = write_sweep_csv(sample_sweep, tmp_path / "sweep.csv", cfg.echo())
        lines = path.read_text().splitlines()
        assert lines[0] == "# optomech-entanglement sweep"
        assert lines[1].startswith("# config: ")
        assert RunConfig.model_validate_json(lines[1][len("# config: ") :]) == cfg

        frame = pd.read_csv(path, comment="#")
        assert frame["e_n"].iloc[0] == 0.8
        assert frame["error"].iloc[1] == "unstable"

    def test_figure_frame(self, sample_figure):
        frame = figure_frame(sample_figure)
        assert list(frame.columns) == ["g2_over_g1", "e_n", "e_n_closed"]
        assert pd.isna(frame["e_n"].iloc[2])

    def test_figure_csv_preamble(self, sample_figure, tmp_path):
        text = write_figure_csv(sample_figure, tmp_path / "2a.csv").read_text()
        assert "# figure: 2a Sample\n" in text
        assert "# marker: optimum: x=0.995 y=1.5\n" in text
        assert "# note: sigma_b = 0.00433 kappa\n" in text
        assert "\ng2_over_g1,e_n,e_n_closed\n" in text
        assert "1.0,nan,1.2" in text

    def test_svg_is_deterministic(self, sample_figure):
        first = render_svg(sample_figure)
        second = render_svg(sample_figure)
        assert first == second
        assert first.lstrip().startswith(b"<?xml")


class TestDisplay:
    """Test cases for rich rendering."""

    @patch("app.utils.cli.console")
    def test_display_sweep_elides_rows(self, mock_console, sample_sweep):
        display_sweep(sample_sweep, limit=1)
        mock_console.print.assert_called()
        assert any("1 more rows" in str(args[0]) for args, _ in mock_console.print.call_args_list)

    @patch("app.utils.cli.console")
    def test_display_diagnostic(self, mock_console):
        display_diagnostic(saturation_diagnostic(1.0))
        mock_console.print.assert_called_once()


class TestLogging:
    """Test cases for logger setup."""

    def test_warnings_routed_to_logger(self):
        setup_logger("WARNING")
        messages = []
        sink = logger.add(messages.append, level="WARNING", format="{message}")
        try:
            warnings.showwarning(RegimeWarning("outside regime"), RegimeWarning, "x.py", 1)
        finally:
            logger.remove(sink)
        assert any("RegimeWarning: outside regime" in m for m in messages)

    def test_level_falls_back_to_settings(self, monkeypatch, capsys):
        monkeypatch.setattr(settings, "log_level", "ERROR")
        setup_logger(None)
        logger.warning("below threshold")
        logger.error("at threshold")
        err = capsys.readouterr().err
        assert "at threshold" in err
        assert "below threshold" not in err
