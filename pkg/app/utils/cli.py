"""CLI helper utilities: config loading and rich rendering of reports."""

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
from loguru import logger
from pydantic import ValidationError
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from app.errors import ConfigError
from app.models.input import RunConfig, RunMode
from app.models.output import OptimizeReport, PointReport, SweepResult


console = Console()


def print_welcome_message() -> None:
    """Display welcome message for the entanglement CLI."""
    console.print(
        Panel.fit(
            "[bold]Optomech Entanglement[/bold]\n"
            "[italic]Filtered output entanglement of a three-mode optomechanical system[/italic]",
            border_style="blue",
        )
    )


def print_error(message: str) -> None:
    """Display error message in the CLI.

    Args:
        message: Error message to display
    """
    console.print(f"[bold red]Error:[/bold red] {message}")


def _parse_scalar(raw: str) -> Any:
    """A TOML scalar when ``raw`` parses as one, the raw string otherwise."""
    try:
        return tomllib.loads(f"value = {raw}")["value"]
    except tomllib.TOMLDecodeError:
        return raw


def parse_overrides(args: Sequence[str]) -> Dict[str, Any]:
    """Nested dict from ``--section.key=value`` flags.

    Raises:
        ConfigError: If a flag is not of that form.
    """
    data: Dict[str, Any] = {}
    for arg in args:
        if not arg.startswith("--") or "=" not in arg:
            raise ConfigError(f"override {arg!r} must look like --key=value or --section.key=value")
        dotted, raw = arg[2:].split("=", 1)
        keys = [k.replace("-", "_") for k in dotted.split(".")]
        target = data
        for key in keys[:-1]:
            target = target.setdefault(key, {})
            if not isinstance(target, dict):
                raise ConfigError(f"override {arg!r} conflicts with a scalar value")
        target[keys[-1]] = _parse_scalar(raw)
    return data


def _merge(base: Dict[str, Any], extra: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _describe(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        where = ".".join(str(loc) for loc in error["loc"]) or "config"
        parts.append(f"{where}: {error['msg']}")
    return "; ".join(parts)


def load_config(path: Optional[Path], mode: RunMode, overrides: Sequence[str] = ()) -> RunConfig:
    """Read a TOML run config, apply overrides and validate it for ``mode``.

    Args:
        path: TOML file, or None to start from defaults
        mode: Mode of the command being run
        overrides: ``--section.key=value`` flags

    Returns:
        The validated run configuration

    Raises:
        ConfigError: Naming the offending field when anything is malformed.
    """
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, "rb") as handle:
                data = tomllib.load(handle)
        except OSError as e:
            logger.error(f"Error reading config {path}: {e}")
            raise ConfigError(f"could not read config {path}: {e}") from e
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"malformed config {path}: {e}") from e

    data = _merge(data, parse_overrides(overrides))
    declared = data.setdefault("mode", mode.value)
    if declared != mode.value:
        raise ConfigError(f"mode: config is for {declared!r}, command runs {mode.value!r}")

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_describe(e)) from e


def _fmt(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.10g}"


def _annotations(lines: List[str]) -> None:
    for line in lines:
        console.print(f"[yellow]• {line}[/yellow]")


def display_point_report(report: PointReport) -> None:
    """Display a single-point evaluation with the closed forms beside it.

    Args:
        report: Point report to display
    """
    p, f, result = report.params, report.filter, report.result
    kappa = p.kappa

    console.print("\n[bold green]Entanglement[/bold green]")
    summary = Table(show_header=False, box=None)
    summary.add_row("E_N", f"{result.e_n:.10g}")
    summary.add_row("nu_minus", f"{result.nu_minus:.10g}")
    summary.add_row("tau used", f"{f.delay:.10g}  ({f.delay * kappa:.6g} / kappa)")
    eigen = "stable" if report.eigen_stable else "unstable"
    summary.add_row("stability", f"{report.stability.value} (eigenvalues: {eigen})")
    summary.add_row(
        "cooperativities", f"{report.cooperativities[0]:.4g}, {report.cooperativities[1]:.4g}"
    )
    console.print(summary)

    if result.moments is not None:
        console.print("\n[bold blue]Moments[/bold blue]")
        moments = Table("moment", "value")
        for name, value in result.moments.model_dump().items():
            moments.add_row(name, f"{value:.10g}")
        console.print(moments)

    console.print("\n[bold blue]Closed forms[/bold blue]")
    closed = Table("quantity", "value")
    for name, value in report.predictions.items():
        closed.add_row(name, _fmt(value))
    console.print(closed)
    _annotations(report.annotations)


def display_sweep(result: SweepResult, limit: int = 20) -> None:
    """Display the first rows of a sweep.

    Args:
        result: Sweep to display
        limit: Rows shown before eliding the rest
    """
    table = Table(result.spec.variable.value, "G2", "tau", "E_N", "|c12|", "stability", "note")
    for row in result.rows[:limit]:
        table.add_row(
            f"{row.value:.6g}",
            f"{row.g2:.6g}",
            _fmt(row.tau),
            _fmt(row.e_n),
            _fmt(row.c12_abs),
            row.stability.value,
            row.error or "; ".join(row.annotations),
        )
    console.print(table)
    if len(result.rows) > limit:
        console.print(f"[italic]… {len(result.rows) - limit} more rows[/italic]")


def display_optimize_report(report: OptimizeReport) -> None:
    """Display numeric optima against the closed forms.

    Args:
        report: Optimize report to display
    """
    g1 = report.params.g1
    console.print(f"\n[bold green]Numeric optimum ({report.delay_mode.value} delay)[/bold green]")
    table = Table(show_header=False, box=None)
    table.add_row("G2", f"{report.g2_numeric:.10g}  (G2/G1 = {report.g2_numeric / g1:.8f})")
    table.add_row("E_N", f"{report.e_n_numeric:.10g}")
    table.add_row("tau at configured G2", _fmt(report.tau_numeric))
    console.print(table)

    console.print("\n[bold blue]Closed forms and relative gaps[/bold blue]")
    closed = Table("quantity", "closed form", "relative gap")
    for name, value in report.predictions.items():
        gap = report.gaps.get(name)
        closed.add_row(name, _fmt(value), "" if gap is None else f"{gap:+.3e}")
    console.print(closed)
    _annotations(report.annotations)


def display_diagnostic(frame: pd.DataFrame) -> None:
    """Display the saturation plateau against its small-bandwidth form.

    Args:
        frame: Diagnostic table from ``saturation_diagnostic``
    """
    table = Table(*frame.columns)
    for record in frame.itertuples(index=False):
        table.add_row(*(f"{value:.10g}" for value in record))
    console.print(table)
