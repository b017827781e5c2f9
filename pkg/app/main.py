"""Main entry point for the optomech entanglement CLI application."""

import json
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Optional

import typer
from loguru import logger
from pydantic import ValidationError

from app.errors import ConfigError, OptomechError
from app.models.input import DelayMode, RunConfig, RunMode
from app.models.output import PointReport
from app.services.figures import build_figure
from app.services.formulas import saturation_diagnostic
from app.services.optimize import optimize_report, point_report, run_sweep, system_from_config
from app.utils.cli import (
    console,
    display_diagnostic,
    display_optimize_report,
    display_point_report,
    display_sweep,
    load_config,
    print_error,
    print_welcome_message,
)
from app.utils.export import (
    render_svg,
    render_sweep_svg,
    write_figure_csv,
    write_svg,
    write_sweep_csv,
)
from app.utils.logging import setup_logger


# Create Typer application
app = typer.Typer(
    help="Filtered output entanglement of a three-mode optomechanical system",
    add_completion=False,
)

# Unknown --section.key=value flags are collected as config overrides
_OVERRIDES = {"allow_extra_args": True, "ignore_unknown_options": True}

CONFIG_ARGUMENT = typer.Argument(None, help="TOML run configuration", show_default=False)


@app.callback()
def callback(
    log_level: Optional[str] = typer.Option(
        None,
        "--log-level",
        "-l",
        help="Logging level (DEBUG, INFO, WARNING, ERROR); defaults to OPTOENT_LOG_LEVEL",
        show_default=False,
    ),
) -> None:
    """Set up application-wide settings."""
    setup_logger(log_level)


@contextmanager
def handle_errors() -> Iterator[None]:
    """Translate failures into messages and exit codes (2 config, 3 unstable, 4 numerical)."""
    try:
        yield
    except typer.Exit:
        raise
    except OptomechError as e:
        logger.error("{}: {}", type(e).__name__, e)
        print_error(str(e))
        raise typer.Exit(code=e.exit_code)
    except ValidationError as e:
        print_error(f"invalid parameters: {e}")
        raise typer.Exit(code=ConfigError.exit_code)
    except Exception as e:
        logger.exception("An error occurred")
        print_error(f"An unexpected error occurred: {e}")
        raise typer.Exit(code=4)


def _load(ctx: typer.Context, config: Optional[Path], mode: RunMode) -> RunConfig:
    """Run config from the file and the --section.key=value flags after it."""
    overrides = list(ctx.args)
    # without a config file the first override lands in the positional slot
    if config is not None and str(config).startswith("--"):
        config, overrides = None, [str(config), *overrides]
    return load_config(config, mode, overrides)


def _point_json(report: PointReport) -> str:
    data = report.model_dump(mode="json", exclude={"result"})
    data["result"] = {
        "e_n": report.result.e_n,
        "nu_minus": report.result.nu_minus,
        "moments": report.result.moments.as_report() if report.result.moments else None,
    }
    return json.dumps(data, indent=2)


@app.command(name="point", context_settings=_OVERRIDES)
def cmd_point(
    ctx: typer.Context,
    config: Optional[Path] = CONFIG_ARGUMENT,
    json_output: bool = typer.Option(False, "--json", help="Print the report as JSON"),
) -> None:
    """Evaluate E_N at one parameter point next to the closed-form predictions."""
    with handle_errors():
        cfg = _load(ctx, config, RunMode.POINT)
        p, f, mode = system_from_config(cfg.params, cfg.filter)
        report = point_report(p, f, mode)

    if json_output:
        typer.echo(_point_json(report))
        return
    print_welcome_message()
    display_point_report(report)


@app.command(name="sweep", context_settings=_OVERRIDES)
def cmd_sweep(ctx: typer.Context, config: Optional[Path] = CONFIG_ARGUMENT) -> None:
    """Run a one-dimensional sweep and write CSV (and SVG)."""
    print_welcome_message()
    with handle_errors():
        cfg = _load(ctx, config, RunMode.SWEEP)
        p, f, _ = system_from_config(cfg.params, cfg.filter)
        spec = cfg.sweep.to_spec(p, f, cfg.params.kappa_abs)

        console.print("\n[bold yellow]Sweeping...[/bold yellow]")
        result = run_sweep(spec)
        stem = cfg.output / f"sweep_{spec.variable.value}"
        written = [write_sweep_csv(result, stem.with_suffix(".csv"), cfg.echo())]
        if cfg.emit_svg:
            written.append(write_svg(render_sweep_svg(result), stem.with_suffix(".svg")))

    display_sweep(result)
    for path in written:
        console.print(f"[green]Wrote {path}[/green]")


@app.command(name="optimize", context_settings=_OVERRIDES)
def cmd_optimize(ctx: typer.Context, config: Optional[Path] = CONFIG_ARGUMENT) -> None:
    """Find the numeric optimal G2 (and delay) and compare with the closed forms."""
    print_welcome_message()
    with handle_errors():
        cfg = _load(ctx, config, RunMode.OPTIMIZE)
        p, f, mode = system_from_config(cfg.params, cfg.filter)
        delay_mode = cfg.delay_mode or mode or DelayMode.ZERO

        console.print("\n[bold yellow]Optimizing...[/bold yellow]")
        report = optimize_report(p, f.replace(delay=0.0), delay_mode)

    display_optimize_report(report)


@app.command(name="figure", context_settings=_OVERRIDES)
def cmd_figure(ctx: typer.Context, config: Optional[Path] = CONFIG_ARGUMENT) -> None:
    """Reproduce one figure as CSV (and SVG)."""
    print_welcome_message()
    with handle_errors():
        cfg = _load(ctx, config, RunMode.FIGURE)
        p = cfg.params.to_system(g2=0.0)

        console.print(f"\n[bold yellow]Building figure {cfg.figure_id}...[/bold yellow]")
        fig = build_figure(cfg.figure_id, p, cfg.points)
        stem = cfg.output / cfg.figure_id
        written = [write_figure_csv(fig, stem.with_suffix(".csv"), cfg.echo())]
        if cfg.emit_svg:
            written.append(write_svg(render_svg(fig), stem.with_suffix(".svg")))

    for note in fig.notes:
        console.print(f"[yellow]• {note}[/yellow]")
    for path in written:
        console.print(f"[green]Wrote {path}[/green]")


@app.command(name="diagnose")
def cmd_diagnose(
    ratios: List[float] = typer.Option(
        [1e-3, 1e-2, 1e-1], "--ratio", "-r", help="sigma/kappa values to tabulate"
    ),
) -> None:
    """Compare the saturation plateau with its small-bandwidth simplification."""
    print_welcome_message()
    with handle_errors():
        frame = saturation_diagnostic(1.0, ratios)
    display_diagnostic(frame)


if __name__ == "__main__":
    app()
