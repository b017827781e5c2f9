"""CSV and SVG writers for sweeps and figures.

Every CSV starts with ``#`` comment lines: the kind of table, the run
configuration echo and any analytic markers or notes, followed by a header row
and full-precision values. Files are written to a temporary sibling and renamed
into place.
"""

import io
import os
import tempfile
from pathlib import Path
from typing import Iterable, List, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402
from loguru import logger  # noqa: E402

from app.models.output import FigureData, SweepResult  # noqa: E402

PROJECT = "optomech-entanglement"

plt.rcParams["svg.hashsalt"] = PROJECT


def atomic_write(path: Path, data: bytes) -> Path:
    """Write ``data`` to ``path`` through a temporary file in the same directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    logger.debug("Wrote {}", path)
    return path


def _preamble(kind: str, config_echo: Optional[str], extra: Iterable[str] = ()) -> str:
    lines = [f"# {PROJECT} {kind}"]
    if config_echo is not None:
        lines.append(f"# config: {config_echo}")
    lines.extend(extra)
    return "\n".join(lines) + "\n"


def _csv_text(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, lineterminator="\n", na_rep="nan")


def sweep_frame(result: SweepResult) -> pd.DataFrame:
    """Fixed column order: value, g1, g2, tau, e_n, c12_abs, n1, n2, stability, annotations, error."""
    records = []
    for row in result.rows:
        records.append(
            {
                result.spec.variable.value: row.value,
                "g1": row.g1,
                "g2": row.g2,
                "tau": row.tau,
                "e_n": row.e_n,
                "c12_abs": row.c12_abs,
                "n1": row.n1,
                "n2": row.n2,
                "stability": row.stability.value,
                "annotations": "; ".join(row.annotations),
                "error": row.error or "",
            }
        )
    return pd.DataFrame.from_records(records)


def figure_frame(fig: FigureData) -> pd.DataFrame:
    columns = {fig.x_column: fig.x}
    for curve in fig.curves:
        columns[curve.column] = [float("nan") if v is None else v for v in curve.values]
    return pd.DataFrame(columns)


def write_sweep_csv(result: SweepResult, path: Path, config_echo: Optional[str] = None) -> Path:
    text = _preamble("sweep", config_echo) + _csv_text(sweep_frame(result))
    return atomic_write(path, text.encode("utf-8"))


def write_figure_csv(fig: FigureData, path: Path, config_echo: Optional[str] = None) -> Path:
    extra: List[str] = [f"# figure: {fig.figure_id} {fig.title}"]
    for marker in fig.markers:
        y = "nan" if marker.y is None else repr(marker.y)
        extra.append(f"# marker: {marker.label}: x={marker.x!r} y={y}")
    extra.extend(f"# note: {note}" for note in fig.notes)
    text = _preamble("figure", config_echo, extra) + _csv_text(figure_frame(fig))
    return atomic_write(path, text.encode("utf-8"))


def render_svg(fig: FigureData) -> bytes:
    """Line chart of every curve, analytic overlays dashed, markers as points."""
    figure, ax = plt.subplots(figsize=(6.4, 4.8))
    try:
        for curve in fig.curves:
            y = [float("nan") if v is None else v for v in curve.values]
            ax.plot(
                fig.x,
                y,
                linestyle="--" if curve.style == "dashed" else "-",
                linewidth=1.2,
                label=curve.label,
            )
        for marker in fig.markers:
            if marker.y is not None:
                ax.plot([marker.x], [marker.y], marker="o", linestyle="none", label=marker.label)
        ax.set_xlabel(fig.x_label)
        ax.set_ylabel(fig.y_label)
        ax.set_title(f"{fig.figure_id}: {fig.title}", fontsize=10)
        ax.legend(fontsize=7)
        ax.grid(True, alpha=0.3)
        buffer = io.BytesIO()
        figure.savefig(buffer, format="svg", metadata={"Date": None})
    finally:
        plt.close(figure)
    return buffer.getvalue()


def render_sweep_svg(result: SweepResult) -> bytes:
    fig = FigureData(
        figure_id="sweep",
        title=f"E_N against {result.spec.variable.value}",
        x_label=result.spec.variable.value,
        x_column=result.spec.variable.value,
        y_label="E_N",
        x=[row.value for row in result.rows],
        curves=[{"label": "E_N", "column": "e_n", "values": [row.e_n for row in result.rows]}],
    )
    return render_svg(fig)


def write_svg(data: bytes, path: Path) -> Path:
    return atomic_write(path, data)
