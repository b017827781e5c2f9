"""Numerical optimizers over the full pipeline and the sweep driver.

These are the oracles for every closed form: the delay maximizing |<D1 D2>|,
the coupling maximizing E_N, and one-dimensional sweeps that feed the figures.
"""

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import ValidationError

from app.errors import DomainError, InstabilityError, NoMaximum, OptomechError, RegimeWarning
from app.models.config import settings
from app.models.input import (
    DelayMode,
    FilterSection,
    FilterSpec,
    G2Rule,
    ParamsSection,
    SweepSpec,
    SweepVariable,
    SystemParams,
)
from app.models.output import (
    OptimizeReport,
    PointReport,
    StabilityVerdict,
    SweepResult,
    SweepRow,
)
from app.services import formulas
from app.services.entanglement import entanglement_from_moments, output_entanglement
from app.services.golden import scan_then_refine
from app.services.model import check_stability, cooperativities, is_stable_by_eigenvalues
from app.services.spectra import CorrelatorProfile, correlator_profile


def apply_g2_rule(p: SystemParams, f: FilterSpec, rule: G2Rule) -> float:
    """G2 from a closed-form rule at the system's G1 and the filter bandwidth."""
    if rule is G2Rule.EQUAL:
        return p.g1
    a = formulas.analytic_inputs(p, f)
    if rule is G2Rule.EQ6:
        return formulas.g2_opt_large_bw(a)
    if rule is G2Rule.EQ7:
        return formulas.g2_opt_small_bw(a)
    return formulas.g2_opt_with_delay(a)


def _regime_messages(caught: List[warnings.WarningMessage]) -> List[str]:
    return [str(w.message) for w in caught if issubclass(w.category, RegimeWarning)]


def _require_stable(p: SystemParams) -> StabilityVerdict:
    verdict = check_stability(p)
    if verdict is StabilityVerdict.UNSTABLE or (
        verdict is StabilityVerdict.MARGINAL and not is_stable_by_eigenvalues(p)
    ):
        raise InstabilityError(
            f"G1={p.g1:.6g}, G2={p.g2:.6g}, kappa1={p.kappa1:.6g}, kappa2={p.kappa2:.6g} "
            f"is {verdict.value}"
        )
    return verdict


def _analytic_delay_scale(p: SystemParams, f: FilterSpec) -> float:
    try:
        return abs(formulas.tau_opt(formulas.analytic_inputs(p, f)))
    except (OptomechError, ValueError):
        return 0.0


def _numeric_delay(p: SystemParams, f: FilterSpec) -> Tuple[CorrelatorProfile, float]:
    _require_stable(p)
    scale = _analytic_delay_scale(p, f) + 1.0 / f.bandwidth
    span = settings.tau_scan_span * scale
    grid = np.linspace(-span, span, settings.tau_scan_points)

    profile = correlator_profile(p, f, max_delay=span)
    values = profile.evaluate(grid)
    tau, best = scan_then_refine(profile, grid, values)
    logger.debug("Numeric delay {:.9g} with |c12| = {:.9g}", tau, best)
    return profile, float(tau)


def tau_opt_numeric(p: SystemParams, f: FilterSpec) -> float:
    """Delay maximizing |<D1 D2>|; ``f.delay`` is ignored.

    Scans tau symmetrically over ``tau_scan_span`` times (|analytic tau| + 1/sigma),
    then refines around the best scan point.

    Raises:
        InstabilityError: If the system is unstable.
        NoMaximum: If |<D1 D2>| does not depend on tau (e.g. G2 = 0).
    """
    return _numeric_delay(p, f)[1]


def resolve_delay(p: SystemParams, f: FilterSpec, mode: Optional[DelayMode]) -> float:
    """Delay used at one evaluation; ``None`` keeps the filter's own delay."""
    if mode is None:
        return f.delay
    if mode is DelayMode.ZERO:
        return 0.0
    if mode is DelayMode.ANALYTIC:
        if f.center != 0.0:
            warnings.warn(
                "analytic delay is derived on resonance; used here off resonance",
                RegimeWarning,
                stacklevel=2,
            )
        return formulas.tau_opt(formulas.analytic_inputs(p, f))
    return tau_opt_numeric(p, f)


def evaluate_point(
    p: SystemParams,
    f: FilterSpec,
    delay_mode: Optional[DelayMode] = DelayMode.ZERO,
    value: float = 0.0,
) -> SweepRow:
    """Full pipeline at one point, never raising.

    Unstable points are flagged with E_N undefined; failures and regime warnings
    end up in the row.
    """
    verdict = check_stability(p)
    row = SweepRow(value=value, g1=p.g1, g2=p.g2, stability=verdict)

    if verdict is StabilityVerdict.UNSTABLE:
        row.error = "unstable"
        return row
    if verdict is StabilityVerdict.MARGINAL:
        if not is_stable_by_eigenvalues(p):
            row.error = "unstable"
            return row
        row.annotations.append("marginal stability")

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RegimeWarning)
        try:
            if delay_mode is DelayMode.NUMERIC:
                profile, tau = _numeric_delay(p, f)
                result = entanglement_from_moments(profile.moments(tau))
            else:
                tau = resolve_delay(p, f, delay_mode)
                result = output_entanglement(p, f.replace(delay=tau))
        except OptomechError as exc:
            row.error = f"{type(exc).__name__}: {exc}"
            logger.debug("Point {} failed: {}", value, row.error)
        else:
            row.tau = tau
            row.e_n = result.e_n
            row.c12_abs = abs(result.moments.c12)
            row.n1 = result.moments.n1
            row.n2 = result.moments.n2
    row.annotations.extend(_regime_messages(caught))
    return row


def _g2_upper_bound(p: SystemParams) -> float:
    """Largest G2 allowed by the closed-form stability condition."""
    ratio = p.kappa1 / p.kappa2
    return p.g1 / math.sqrt(max(ratio, 1.0 / ratio))


def g2_opt_numeric(
    p: SystemParams, f: FilterSpec, delay_mode: DelayMode = DelayMode.ZERO
) -> Tuple[float, float]:
    """G2 maximizing E_N over (0, G2_max], with the delay chosen per ``delay_mode``.

    ``p.g2`` is ignored.

    Returns:
        The optimal coupling and the entanglement there.

    Raises:
        NoMaximum: If E_N vanishes over the whole stable range.
    """
    upper = _g2_upper_bound(p)
    if upper <= 0.0:
        raise NoMaximum("G1 = 0 leaves no coupling range to search")

    def objective(g2: float) -> float:
        row = evaluate_point(p.replace(g2=g2), f, delay_mode)
        return row.e_n if row.e_n is not None else -math.inf

    grid = upper * np.arange(1, settings.g2_grid_points + 1) / settings.g2_grid_points
    values = [objective(float(g)) for g in grid]
    if not any(v > 0.0 for v in values):
        raise NoMaximum("E_N = 0 over the whole stable coupling range")
    g2, e_n = scan_then_refine(objective, grid, values)
    logger.debug("Numeric optimum G2 = {:.9g} with E_N = {:.9g}", g2, e_n)
    return float(g2), float(e_n)


def _point_inputs(
    s: SweepSpec, value: float
) -> Tuple[SystemParams, FilterSpec, Optional[DelayMode]]:
    p, f, mode = s.params, s.filter, s.delay_mode
    if s.variable is SweepVariable.G2_OVER_G1:
        p = p.replace(g2=value * p.g1)
    elif s.variable is SweepVariable.G1_OVER_KAPPA:
        p = p.replace(g1=value * p.kappa)
    elif s.variable is SweepVariable.OMEGA_OVER_KAPPA:
        f = f.replace(center=value * p.kappa)
    else:
        f = f.replace(delay=value)
        mode = None
    return p, f, mode


def _sweep_point(task: Tuple[SweepSpec, float]) -> SweepRow:
    s, value = task
    p = s.params
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RegimeWarning)
        try:
            p, f, mode = _point_inputs(s, value)
            if s.g2_rule is not None:
                p = p.replace(g2=apply_g2_rule(p, f, s.g2_rule))
        except (OptomechError, ValidationError) as exc:
            return SweepRow(
                value=value,
                g1=p.g1,
                g2=p.g2,
                stability=check_stability(p),
                annotations=_regime_messages(caught),
                error=f"{type(exc).__name__}: {exc}",
            )
    row = evaluate_point(p, f, mode, value=value)
    row.annotations[:0] = _regime_messages(caught)
    return row


def run_sweep(s: SweepSpec) -> SweepResult:
    """One row per swept value, in order, whatever fails along the way."""
    tasks = [(s, float(v)) for v in s.values()]
    logger.info(
        "Sweeping {} over [{:.6g}, {:.6g}] ({} points, delay {})",
        s.variable.value,
        s.lo,
        s.hi,
        s.points,
        s.delay_mode.value,
    )
    if settings.workers > 1:
        with ProcessPoolExecutor(max_workers=settings.workers) as pool:
            rows: List[SweepRow] = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(task) for task in tasks]

    failed = sum(1 for r in rows if r.error)
    if failed:
        logger.info("{} of {} sweep points have no E_N", failed, len(rows))
    return SweepResult(spec=s, rows=rows)


def system_from_config(
    params: ParamsSection, filter_section: FilterSection
) -> Tuple[SystemParams, FilterSpec, Optional[DelayMode]]:
    """Physical inputs of a run config, with rule-valued G2 and delay resolved.

    The returned delay mode is ``None`` when the config fixes the delay itself.
    """
    kappa = params.kappa_abs
    f = filter_section.to_filter(kappa)
    if isinstance(params.g2, str):
        p = params.to_system(g2=0.0)
        p = p.replace(g2=apply_g2_rule(p, f, G2Rule(params.g2)))
    else:
        p = params.to_system()

    if filter_section.delay == "eq5":
        mode: Optional[DelayMode] = DelayMode.ANALYTIC
    elif filter_section.delay == "numeric":
        mode = DelayMode.NUMERIC
    else:
        mode = None
    return p, f, mode


def point_report(
    p: SystemParams, f: FilterSpec, delay_mode: Optional[DelayMode] = None
) -> PointReport:
    """Single point with its closed-form context; failures raise.

    Raises:
        InstabilityError: If the point is unstable.
        NumericalError: If any numerical stage fails.
    """
    verdict = _require_stable(p)
    annotations: List[str] = []
    if verdict is StabilityVerdict.MARGINAL:
        annotations.append("marginal stability")

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RegimeWarning)
        tau = resolve_delay(p, f, delay_mode)
        used = f.replace(delay=tau)
        result = output_entanglement(p, used)
        predictions = formulas.closed_form_predictions(p, used)
    annotations.extend(_regime_messages(caught))

    return PointReport(
        params=p,
        filter=used,
        stability=verdict,
        eigen_stable=is_stable_by_eigenvalues(p),
        cooperativities=cooperativities(p),
        result=result,
        annotations=annotations,
        predictions=predictions,
    )


def _relative_gap(numeric: Optional[float], predicted: Optional[float]) -> Optional[float]:
    if numeric is None or predicted is None or predicted == 0.0:
        return None
    return (numeric - predicted) / abs(predicted)


def _zero_delay_gap(
    p: SystemParams, f: FilterSpec, g2_numeric: float
) -> Dict[str, Optional[float]]:
    """Gap to the zero-delay optimum of the bandwidth regime f falls in."""
    try:
        a = formulas.analytic_inputs(p, f)
    except DomainError:
        return {"g2_eq6": None}
    key = "g2_eq7" if a.sigma < formulas.sigma_boundary(a.g1, a.kappa) else "g2_eq6"
    try:
        predicted: Optional[float] = formulas.g2_opt_for_bandwidth(a)
    except DomainError:
        predicted = None
    return {key: _relative_gap(g2_numeric, predicted)}


def optimize_report(p: SystemParams, f: FilterSpec, delay_mode: DelayMode) -> OptimizeReport:
    """Numeric G2 optimum for ``delay_mode`` and numeric delay at the configured G2,
    next to the matching closed forms."""
    annotations: List[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RegimeWarning)
        g2_numeric, e_n_numeric = g2_opt_numeric(p, f, delay_mode)
        tau_numeric: Optional[float] = None
        if p.g2 > 0.0:
            try:
                tau_numeric = tau_opt_numeric(p, f)
            except (NoMaximum, InstabilityError) as exc:
                annotations.append(f"no numeric delay at the configured G2: {exc}")
        predictions = formulas.closed_form_predictions(p, f)
    annotations.extend(_regime_messages(caught))

    if delay_mode is DelayMode.ZERO:
        gaps = _zero_delay_gap(p, f, g2_numeric)
    else:
        gaps = {
            "g2_eq9": _relative_gap(g2_numeric, predictions["g2_eq9"]),
            "e_n_eq10": _relative_gap(e_n_numeric, predictions["e_n_eq10"]),
        }
    if tau_numeric is not None:
        gaps["tau_eq5"] = _relative_gap(tau_numeric, predictions["tau_eq5"])

    return OptimizeReport(
        params=p,
        filter=f,
        delay_mode=delay_mode,
        g2_numeric=g2_numeric,
        e_n_numeric=e_n_numeric,
        tau_numeric=tau_numeric,
        predictions=predictions,
        gaps=gaps,
        annotations=annotations,
    )
