"""Figure recipes: the sweeps and closed-form overlays behind each reproduced figure."""

import math
import warnings
from typing import Callable, Dict, List, Optional

import numpy as np
from loguru import logger

from app.errors import OptomechError, RegimeWarning
from app.models.config import settings
from app.models.input import DelayMode, FilterSpec, G2Rule, SweepSpec, SweepVariable, SystemParams
from app.models.output import Curve, FigureData, Marker, SweepResult
from app.services import formulas
from app.services.optimize import evaluate_point, run_sweep

_EN_LABEL = "E_N(w=0)"


def _values(result: SweepResult, field: str = "e_n", scale: float = 1.0) -> List[Optional[float]]:
    out: List[Optional[float]] = []
    for row in result.rows:
        value = getattr(row, field)
        out.append(None if value is None or not math.isfinite(value) else value * scale)
    return out


def _ratio_label(value: float) -> str:
    return f"{value:.4g}"


def _sweep(
    variable: SweepVariable,
    lo: float,
    hi: float,
    points: int,
    p: SystemParams,
    sigma: float,
    delay_mode: DelayMode = DelayMode.ZERO,
    g2_rule: Optional[G2Rule] = None,
) -> SweepResult:
    spec = SweepSpec(
        variable=variable,
        lo=lo,
        hi=hi,
        points=points,
        params=p,
        filter=FilterSpec(bandwidth=sigma),
        delay_mode=delay_mode,
        g2_rule=g2_rule,
    )
    return run_sweep(spec)


def _marker(label: str, p: SystemParams, sigma: float, g2: float) -> Marker:
    row = evaluate_point(p.replace(g2=g2), FilterSpec(bandwidth=sigma))
    return Marker(label=label, x=g2 / p.g1, y=row.e_n)


def _figure_2a(p: SystemParams, points: int) -> FigureData:
    kappa = p.kappa
    x = np.linspace(0.99, 1.0, points)
    curves, markers = [], []
    for sigma in (0.1 * kappa, kappa):
        tag = _ratio_label(sigma / kappa)
        for mode, style in ((DelayMode.ZERO, "solid"), (DelayMode.NUMERIC, "dashed")):
            result = _sweep(SweepVariable.G2_OVER_G1, 0.99, 1.0, points, p, sigma, mode)
            curves.append(
                Curve(
                    label=f"sigma={tag} kappa, tau {mode.value}",
                    column=f"e_n_sigma_{tag}_{mode.value}",
                    values=_values(result),
                    style=style,
                )
            )
        g2 = formulas.g2_opt_large_bw(formulas.analytic_inputs(p, FilterSpec(bandwidth=sigma)))
        markers.append(_marker(f"large-bandwidth optimum, sigma={tag} kappa", p, sigma, g2))
    return FigureData(
        figure_id="2a",
        title="Zero-delay vs optimal-delay entanglement at large bandwidth",
        x_label="G2/G1",
        x_column="g2_over_g1",
        y_label=_EN_LABEL,
        x=x.tolist(),
        curves=curves,
        markers=markers,
    )


def _figure_2b(p: SystemParams, points: int) -> FigureData:
    kappa = p.kappa
    boundary = formulas.sigma_boundary(p.g1, kappa)
    x = np.linspace(0.998, 1.0, points)
    curves, markers, notes = [], [], []
    for sigma in (1e-4 * kappa, 2e-3 * kappa, boundary):
        tag = _ratio_label(sigma / kappa)
        result = _sweep(SweepVariable.G2_OVER_G1, 0.998, 1.0, points, p, sigma)
        curves.append(
            Curve(label=f"sigma={tag} kappa", column=f"e_n_sigma_{tag}", values=_values(result))
        )
        a = formulas.analytic_inputs(p, FilterSpec(bandwidth=sigma))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", RegimeWarning)
            g2 = formulas.g2_opt_small_bw(a)
        notes.extend(str(w.message) for w in caught)
        markers.append(_marker(f"small-bandwidth optimum, sigma={tag} kappa", p, sigma, g2))

    sigma = 1e-4 * kappa
    result = _sweep(SweepVariable.G2_OVER_G1, 0.998, 1.0, points, p, sigma, DelayMode.NUMERIC)
    curves.append(
        Curve(
            label="sigma=0.0001 kappa, tau numeric",
            column="e_n_sigma_0.0001_numeric",
            values=_values(result),
            style="dashed",
        )
    )
    g2 = formulas.g2_opt_large_bw(formulas.analytic_inputs(p, FilterSpec(bandwidth=sigma)))
    markers.append(_marker("tangent point, sigma=0.0001 kappa", p, sigma, g2))
    notes.append(f"sigma_b = {boundary / kappa:.6g} kappa")
    return FigureData(
        figure_id="2b",
        title="Zero-delay entanglement at small bandwidth",
        x_label="G2/G1",
        x_column="g2_over_g1",
        y_label=_EN_LABEL,
        x=x.tolist(),
        curves=curves,
        markers=markers,
        notes=notes,
    )


def _figure_2c(p: SystemParams, points: int) -> FigureData:
    kappa = p.kappa
    x = np.linspace(1.0, 20.0, points)
    curves, notes = [], []
    for sigma in (0.1 * kappa, 0.5 * kappa, kappa):
        tag = _ratio_label(sigma / kappa)
        result = _sweep(
            SweepVariable.G1_OVER_KAPPA, 1.0, 20.0, points, p, sigma, g2_rule=G2Rule.EQ6
        )
        plateau = formulas.e_n_saturation(sigma, kappa)
        curves.append(
            Curve(label=f"sigma={tag} kappa", column=f"e_n_sigma_{tag}", values=_values(result))
        )
        curves.append(
            Curve(
                label=f"saturation, sigma={tag} kappa",
                column=f"saturation_sigma_{tag}",
                values=[plateau] * points,
                style="dashed",
                analytic=True,
            )
        )
        threshold = formulas.saturation_threshold(sigma, kappa)
        notes.append(f"saturation threshold for sigma={tag} kappa: G1 = {threshold / kappa:.6g} kappa")
    return FigureData(
        figure_id="2c",
        title="Entanglement saturation with the large-bandwidth optimal coupling",
        x_label="G1/kappa",
        x_column="g1_over_kappa",
        y_label=_EN_LABEL,
        x=x.tolist(),
        curves=curves,
        notes=notes,
    )


def _figure_3a(p: SystemParams, points: int) -> FigureData:
    kappa = p.kappa
    lo, hi = 0.5, 0.999
    x = np.linspace(lo, hi, points)
    f = FilterSpec(bandwidth=kappa)
    analytic = [
        formulas.tau_opt(formulas.analytic_inputs(p.replace(g2=r * p.g1), f)) * kappa for r in x
    ]
    result = _sweep(SweepVariable.G2_OVER_G1, lo, hi, points, p, kappa, DelayMode.NUMERIC)
    return FigureData(
        figure_id="3a",
        title="Optimal delay against the coupling ratio",
        x_label="G2/G1",
        x_column="g2_over_g1",
        y_label="kappa tau_opt",
        x=x.tolist(),
        curves=[
            Curve(label="closed form", column="tau_analytic", values=analytic, analytic=True),
            Curve(
                label="numeric",
                column="tau_numeric",
                values=_values(result, "tau", kappa),
                style="dashed",
            ),
        ],
    )


def _figure_3b(p: SystemParams, points: int) -> FigureData:
    kappa = p.kappa
    lo, hi = 0.95, 0.999
    x = np.linspace(lo, hi, points)
    closed = _sweep(SweepVariable.G2_OVER_G1, lo, hi, points, p, kappa, DelayMode.ANALYTIC)
    numeric = _sweep(SweepVariable.G2_OVER_G1, lo, hi, points, p, kappa, DelayMode.NUMERIC)
    closed_values, numeric_values = _values(closed), _values(numeric)

    gaps = [
        n - c for c, n in zip(closed_values, numeric_values) if c is not None and n is not None
    ]
    notes = []
    if gaps:
        worst = int(np.argmax(np.abs(gaps)))
        notes.append(f"largest gap numeric minus closed-form delay: {gaps[worst]:.6g}")

    a = formulas.analytic_inputs(p, FilterSpec(bandwidth=kappa))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RegimeWarning)
        g2 = formulas.g2_opt_with_delay(a)
        e_n = formulas.e_n_opt_with_delay(a)
    notes.extend(str(w.message) for w in caught)
    return FigureData(
        figure_id="3b",
        title="Entanglement with closed-form and numeric optimal delay",
        x_label="G2/G1",
        x_column="g2_over_g1",
        y_label=_EN_LABEL,
        x=x.tolist(),
        curves=[
            Curve(label="closed-form delay", column="e_n_analytic_delay", values=closed_values),
            Curve(
                label="numeric delay",
                column="e_n_numeric_delay",
                values=numeric_values,
                style="dashed",
            ),
        ],
        markers=[Marker(label="delay-optimized optimum", x=g2 / p.g1, y=e_n)],
        notes=notes,
    )


def _figure_3c(p: SystemParams, points: int) -> FigureData:
    kappa = p.kappa
    x = np.linspace(-3.0, 3.0, points)
    optimal = _sweep(
        SweepVariable.OMEGA_OVER_KAPPA, -3.0, 3.0, points, p, kappa, DelayMode.NUMERIC, G2Rule.EQ9
    )
    equal = _sweep(SweepVariable.OMEGA_OVER_KAPPA, -3.0, 3.0, points, p, kappa, g2_rule=G2Rule.EQUAL)
    return FigureData(
        figure_id="3c",
        title="Entanglement across center frequency",
        x_label="w/kappa",
        x_column="omega_over_kappa",
        y_label="E_N(w)",
        x=x.tolist(),
        curves=[
            Curve(label="optimal coupling, numeric delay", column="e_n_optimal", values=_values(optimal)),
            Curve(
                label="equal coupling, zero delay",
                column="e_n_equal",
                values=_values(equal),
                style="dashed",
            ),
        ],
    )


_RECIPES: Dict[str, Callable[[SystemParams, int], FigureData]] = {
    "2a": _figure_2a,
    "2b": _figure_2b,
    "2c": _figure_2c,
    "3a": _figure_3a,
    "3b": _figure_3b,
    "3c": _figure_3c,
}


def build_figure(figure_id: str, p: SystemParams, points: Optional[int] = None) -> FigureData:
    """Run every sweep of one figure; ``p.g2`` is ignored, each curve sets its own."""
    if figure_id not in _RECIPES:
        raise ValueError(f"unknown figure {figure_id!r}; choose from {', '.join(_RECIPES)}")
    points = points or settings.sweep_points
    logger.info("Building figure {} with {} points per curve", figure_id, points)
    try:
        return _RECIPES[figure_id](p, points)
    except OptomechError:
        logger.error("Figure {} could not be built", figure_id)
        raise
