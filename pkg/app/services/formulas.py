"""Closed-form optima for equal cavity decay rates.

Valid when gamma is much smaller than kappa, sigma and the couplings. The
shared bracket 15 k^2 s + 4 s^3 - 3 alpha beta cancels to O(s^7) at small
bandwidth, so it is summed from its power series there.
"""

import math
import warnings
from typing import Dict, Iterable, Optional

import pandas as pd

from app.errors import DomainError, RegimeWarning
from app.models.input import AnalyticInputs, FilterSpec, SystemParams

_SERIES_LIMIT = 0.5
_SERIES_TERMS = 40


def _alpha(kappa: float, sigma: float) -> float:
    return 5.0 * kappa**2 + 3.0 * sigma**2


def _beta(kappa: float, sigma: float) -> float:
    return kappa * math.atan(sigma / kappa)


def _bracket(kappa: float, sigma: float) -> float:
    """15 kappa^2 sigma + 4 sigma^3 - 3 alpha beta, always positive."""
    s = sigma / kappa
    if s <= _SERIES_LIMIT:
        total = 0.0
        for k in range(3, 3 + _SERIES_TERMS):
            total += (-1) ** (k + 1) * 3.0 * (4 * k - 8) / (4 * k * k - 1) * s ** (2 * k + 1)
        return total * kappa**3
    return 15.0 * kappa**2 * sigma + 4.0 * sigma**3 - 3.0 * _alpha(kappa, sigma) * _beta(
        kappa, sigma
    )


def tau_opt(a: AnalyticInputs) -> float:
    """Delay maximizing |<D1 D2>| on resonance; negative below the tangent point."""
    g1, g2 = a.g1, a.require_g2()
    numerator = 20.0 * (g2**2 - g1**2) + 5.0 * a.kappa**2 + 3.0 * a.sigma**2
    return numerator / (10.0 * (g1**2 + g2**2) * a.kappa)


def g2_opt_large_bw(a: AnalyticInputs) -> float:
    """Zero-delay optimal G2 for bandwidths above sigma_boundary (the tangent point)."""
    radicand = 4.0 * a.g1**2 - a.kappa**2 - 0.6 * a.sigma**2
    if radicand <= 0.0:
        raise DomainError(
            f"large-bandwidth optimum undefined: 4 G1^2 - kappa^2 - 3 sigma^2/5 = {radicand:.6g}"
        )
    return 0.5 * math.sqrt(radicand)


def sigma_boundary(g1: float, kappa: float) -> float:
    """Bandwidth separating the small- and large-bandwidth regimes."""
    return math.sqrt(3.0) * kappa**3 / (4.0 * g1**2)


def g2_opt_small_bw(a: AnalyticInputs) -> float:
    """Zero-delay optimal G2 for bandwidths below sigma_boundary."""
    boundary = sigma_boundary(a.g1, a.kappa)
    if a.sigma >= boundary:
        warnings.warn(
            f"small-bandwidth optimum used at sigma/sigma_b = {a.sigma / boundary:.3g} >= 1",
            RegimeWarning,
            stacklevel=2,
        )
    return (
        a.g1
        + a.g1 * a.sigma / (2.0 * math.sqrt(3.0) * a.kappa)
        - math.sqrt(a.kappa * a.sigma) / (2.0 * 3.0**0.25)
    )


def g2_opt_for_bandwidth(a: AnalyticInputs) -> float:
    """Zero-delay optimum of whichever regime sigma falls in."""
    if a.sigma < sigma_boundary(a.g1, a.kappa):
        return g2_opt_small_bw(a)
    return g2_opt_large_bw(a)


def saturation_threshold(sigma: float, kappa: float) -> float:
    """G1 scale above which the zero-delay optimum saturates."""
    return math.sqrt(kappa**5 / (math.sqrt(3.0) * sigma**3))


def e_n_saturation(sigma: float, kappa: float) -> float:
    """Zero-delay entanglement plateau reached at strong drive."""
    alpha = _alpha(kappa, sigma)
    bracket = _bracket(kappa, sigma)
    ratio = (kappa**2 + sigma**2) * bracket**2 / (9.0 * kappa**2 * sigma**2 * alpha**2)
    return -0.5 * math.log(ratio)


def e_n_saturation_small_bandwidth(sigma: float, kappa: float) -> float:
    """Leading small-bandwidth form ln[175 kappa^6 / (4 sigma^6)] of the plateau."""
    return math.log(175.0 * kappa**6 / (4.0 * sigma**6))


def saturation_diagnostic(
    kappa: float, ratios: Iterable[float] = (1e-3, 1e-2, 1e-1)
) -> pd.DataFrame:
    """Plateau against its small-bandwidth form; reported, never asserted."""
    rows = []
    for ratio in ratios:
        sigma = ratio * kappa
        exact = e_n_saturation(sigma, kappa)
        simplified = e_n_saturation_small_bandwidth(sigma, kappa)
        rows.append(
            {
                "sigma_over_kappa": ratio,
                "e_n_saturation": exact,
                "e_n_small_bandwidth": simplified,
                "relative_difference": abs(simplified - exact) / abs(exact),
            }
        )
    return pd.DataFrame(rows)


def _warn_weak_drive(a: AnalyticInputs) -> None:
    if a.g1 < 5.0 * max(a.kappa, a.sigma):
        warnings.warn(
            f"delay-optimized closed forms need G1 >> kappa, sigma; "
            f"G1/max(kappa, sigma) = {a.g1 / max(a.kappa, a.sigma):.3g}",
            RegimeWarning,
            stacklevel=3,
        )


def g2_opt_with_delay(a: AnalyticInputs) -> float:
    """Optimal G2 when the delay is optimized at every coupling."""
    _warn_weak_drive(a)
    alpha = _alpha(a.kappa, a.sigma)
    beta = _beta(a.kappa, a.sigma)
    correction = alpha * _bracket(a.kappa, a.sigma) / (400.0 * (6.0 * a.sigma - 3.0 * beta))
    return a.g1 - correction**0.25


def e_n_opt_with_delay(a: AnalyticInputs) -> float:
    """Entanglement at the delay-optimized optimum; grows like ln G1^2."""
    _warn_weak_drive(a)
    alpha = _alpha(a.kappa, a.sigma)
    beta = _beta(a.kappa, a.sigma)
    ratio = (
        alpha
        * (2.0 * a.sigma - beta)
        * _bracket(a.kappa, a.sigma)
        / (4800.0 * a.g1**4 * a.sigma**2)
    )
    return -0.5 * math.log(ratio)


def analytic_inputs(p: SystemParams, f: FilterSpec) -> AnalyticInputs:
    """Closed-form symbols for a system; the formulas cover equal decay only."""
    if not math.isclose(p.kappa1, p.kappa2, rel_tol=1e-12):
        raise DomainError(
            f"closed forms need kappa1 == kappa2, got {p.kappa1:.6g} and {p.kappa2:.6g}"
        )
    if p.g1 <= 0.0:
        raise DomainError("closed forms need G1 > 0")
    return AnalyticInputs(
        kappa=p.kappa1,
        sigma=f.bandwidth,
        g1=p.g1,
        g2=p.g2 if p.g2 > 0.0 else None,
    )


def closed_form_predictions(p: SystemParams, f: FilterSpec) -> Dict[str, Optional[float]]:
    """Every closed form that applies to (p, f); inapplicable ones map to None.

    Regime warnings raised on the way propagate to the caller.
    """
    names = (
        "tau_eq5",
        "g2_eq6",
        "g2_eq7",
        "g2_eq9",
        "e_n_eq8",
        "e_n_eq10",
        "sigma_b",
        "saturation_g1",
    )
    predictions: Dict[str, Optional[float]] = dict.fromkeys(names)
    try:
        a = analytic_inputs(p, f)
    except DomainError:
        return predictions

    predictions["sigma_b"] = sigma_boundary(a.g1, a.kappa)
    predictions["saturation_g1"] = saturation_threshold(a.sigma, a.kappa)
    predictions["e_n_eq8"] = e_n_saturation(a.sigma, a.kappa)
    if a.sigma < predictions["sigma_b"]:
        predictions["g2_eq7"] = g2_opt_small_bw(a)
    predictions["g2_eq9"] = g2_opt_with_delay(a)
    predictions["e_n_eq10"] = e_n_opt_with_delay(a)
    try:
        predictions["g2_eq6"] = g2_opt_large_bw(a)
    except DomainError:
        pass
    if a.g2 is not None:
        predictions["tau_eq5"] = tau_opt(a)
    return predictions
