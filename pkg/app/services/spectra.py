"""Second moments of the filtered output modes by band quadrature.

Mode 1 is D1[w, sigma, tau] and mode 2 is D2[-w, sigma, 0]. Substituting w'' = -w'
in the mode-2 band integral puts both modes on the same band [w - sigma/2,
w + sigma/2], where D2^dag is a band integral of the d2_out^dag row of S. Every
moment then reduces to a single integral over that band.
"""

import math
from enum import IntEnum
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from loguru import logger
from scipy.special import roots_legendre

from app.errors import QuadratureFailure
from app.models.config import settings
from app.models.input import FilterSpec, SystemParams
from app.models.output import MomentSet
from app.services.model import drift_eigenvalues, scattering_batch


class MomentId(IntEnum):
    """Column of each density in the integrand arrays."""

    N1 = 0
    N2 = 1
    C12 = 2
    M11 = 3
    M22 = 4
    X12 = 5
    COMM1 = 6
    COMM2 = 7


_COUNT = len(MomentId)
_ROUNDOFF = 64.0 * np.finfo(float).eps


class BandQuadrature(NamedTuple):
    """Accepted nodes of an adaptive band integral and the densities at them."""

    nodes: np.ndarray
    weights: np.ndarray
    densities: np.ndarray
    integrals: np.ndarray
    panels: int


@lru_cache(maxsize=8)
def _gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(order)
    return nodes, weights


def _bath_weights(p: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    """(<i i^dag>, <i^dag i>) per input channel (d1_in, d2_in^dag, b_in)."""
    antinormal = np.array([p.n1 + 1.0, p.n2, p.n_m + 1.0])
    normal = np.array([p.n1, p.n2 + 1.0, p.n_m])
    return antinormal, normal


def _densities(p: SystemParams, freqs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Spectral densities of every moment and the magnitude of the terms summed in each.

    The magnitudes bound the round-off of each density, which matters where large
    scattering entries cancel (near the mechanical resonance at equal coupling).
    Thermal baths are phase insensitive, so the M11, M22 and X12 densities are zero.
    """
    s = scattering_batch(p, freqs)
    antinormal, normal = _bath_weights(p)
    row1, row2 = s[:, 0, :], s[:, 1, :]
    abs1, abs2 = np.abs(row1) ** 2, np.abs(row2) ** 2

    values = np.zeros((freqs.size, _COUNT), dtype=complex)
    mags = np.zeros((freqs.size, _COUNT))

    values[:, MomentId.N1] = mags[:, MomentId.N1] = abs1 @ normal
    values[:, MomentId.N2] = mags[:, MomentId.N2] = abs2 @ antinormal

    pair = row1 * np.conj(row2) * antinormal
    values[:, MomentId.C12] = pair.sum(axis=1)
    mags[:, MomentId.C12] = np.abs(pair).sum(axis=1)

    values[:, MomentId.COMM1] = abs1 @ (antinormal - normal)
    mags[:, MomentId.COMM1] = abs1 @ np.abs(antinormal - normal)
    values[:, MomentId.COMM2] = abs2 @ (normal - antinormal)
    mags[:, MomentId.COMM2] = abs2 @ np.abs(normal - antinormal)
    return values, mags


def moment_integrand(p: SystemParams, which: MomentId, freq: float) -> complex:
    """Density at ``freq`` whose band integral, divided by sigma, gives the moment.

    No delay phase is applied.
    """
    values, _ = _densities(p, np.array([freq], dtype=float))
    return complex(values[0, MomentId(which)])


def _band_density(p: SystemParams, f: FilterSpec):
    """Densities with the delay phase of ``f`` applied."""

    def evaluate(freqs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        values, mags = _densities(p, freqs)
        if f.delay != 0.0:
            values[:, MomentId.C12] *= np.exp(-1j * freqs * f.delay)
        return values, mags

    return evaluate


def _resonance_edges(p: SystemParams, f: FilterSpec, width: float) -> np.ndarray:
    """Breakpoints graded geometrically toward each drift resonance narrower than ``width``.

    A resonance of the drift eigenvalue l sits at w' = -Im l with half-width |Re l|;
    near G1 = G2 the mechanical one is only gamma/2 wide.
    """
    found = []
    for eig in drift_eigenvalues(p):
        rate = abs(eig.real)
        if not 0.0 < rate < width:
            continue
        center = -eig.imag
        offsets = rate * 2.0 ** np.arange(math.ceil(math.log2(width / rate)) + 1)
        found.append(np.concatenate([[center], center - offsets, center + offsets]))
    if not found:
        return np.empty(0)
    edges = np.concatenate(found)
    return edges[(edges > f.lower) & (edges < f.upper)]


def _initial_edges(p: SystemParams, f: FilterSpec, max_delay: float) -> np.ndarray:
    kappa = min(p.kappa1, p.kappa2)
    width = min(f.bandwidth, kappa) / settings.quad_initial_panels
    if max_delay > 0.0:
        # keep the delay phase below pi per panel
        width = min(width, math.pi / max_delay)
    count = max(1, math.ceil(f.bandwidth / width - 1e-9))
    if count > settings.quad_max_panels:
        raise QuadratureFailure(
            f"{count} initial panels exceed the budget of {settings.quad_max_panels}"
        )
    edges = np.linspace(f.lower, f.upper, count + 1)
    extra = [_resonance_edges(p, f, width)]
    if f.lower < 0.0 < f.upper:
        extra.append(np.zeros(1))
    return np.unique(np.concatenate([edges, *extra]))


def _adaptive_band(p: SystemParams, f: FilterSpec, max_delay: float = 0.0) -> BandQuadrature:
    """Adaptive composite Gauss-Legendre over the filter band.

    Each panel is integrated once whole and once as two halves; a panel is accepted
    when the difference is below its share of the tolerance, or below the round-off
    level of the terms being summed. Unaccepted panels are halved.
    """
    t, w = _gauss_legendre(settings.quad_order)
    density = _band_density(p, f)
    width_total = f.bandwidth
    edges = _initial_edges(p, f, max(max_delay, abs(f.delay)))
    lo, hi = edges[:-1], edges[1:]

    total = np.zeros(_COUNT, dtype=complex)
    accepted_nodes, accepted_weights, accepted_values = [], [], []
    panels = lo.size
    rounds = 0

    while lo.size:
        rounds += 1
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        quarter = 0.5 * half
        coarse_x = mid[:, None] + half[:, None] * t
        left_x = (0.5 * (lo + mid))[:, None] + quarter[:, None] * t
        right_x = (0.5 * (mid + hi))[:, None] + quarter[:, None] * t
        n_panels, order = coarse_x.shape

        stacked = np.concatenate([coarse_x, left_x, right_x], axis=1).ravel()
        values, mags = density(stacked)
        values = values.reshape(n_panels, 3, order, _COUNT)
        mags = mags.reshape(n_panels, 3, order, _COUNT)

        coarse = np.einsum("pk,pkc->pc", half[:, None] * w, values[:, 0])
        fine_weights = quarter[:, None] * w
        fine = np.einsum("pk,pkc->pc", fine_weights, values[:, 1]) + np.einsum(
            "pk,pkc->pc", fine_weights, values[:, 2]
        )
        fine_mag = np.einsum("pk,pkc->pc", fine_weights, mags[:, 1] + mags[:, 2])

        estimate = total + fine.sum(axis=0)
        target = np.maximum(
            settings.quad_abs_tol * width_total, settings.quad_rel_tol * np.abs(estimate)
        )
        share = target[None, :] * ((hi - lo) / width_total)[:, None]
        error = np.abs(coarse - fine)
        ok = np.all((error <= share) | (error <= _ROUNDOFF * fine_mag), axis=1)

        if ok.any():
            total += fine[ok].sum(axis=0)
            nodes = np.concatenate([left_x[ok], right_x[ok]], axis=1)
            weights = np.concatenate([fine_weights[ok], fine_weights[ok]], axis=1)
            vals = np.concatenate([values[ok, 1], values[ok, 2]], axis=1)
            accepted_nodes.append(nodes.ravel())
            accepted_weights.append(weights.ravel())
            accepted_values.append(vals.reshape(-1, _COUNT))

        lo, hi, mid = lo[~ok], hi[~ok], mid[~ok]
        if lo.size and np.any(mid - lo <= 8.0 * np.finfo(float).eps * np.maximum(1.0, np.abs(mid))):
            raise QuadratureFailure("panels shrank to machine resolution before converging")
        panels += lo.size
        if panels > settings.quad_max_panels:
            logger.error("Quadrature budget exhausted after {} rounds", rounds)
            raise QuadratureFailure(
                f"band integral did not converge within {settings.quad_max_panels} panels"
            )
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])

    logger.debug("Band quadrature converged: {} panels in {} rounds", panels, rounds)
    return BandQuadrature(
        nodes=np.concatenate(accepted_nodes),
        weights=np.concatenate(accepted_weights),
        densities=np.concatenate(accepted_values),
        integrals=total,
        panels=panels,
    )


def band_nodes(p: SystemParams, f: FilterSpec) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights the adaptive quadrature settles on for this band."""
    band = _adaptive_band(p, f)
    return band.nodes, band.weights


def _moment_set(avg: np.ndarray) -> MomentSet:
    return MomentSet(
        n1=float(avg[MomentId.N1].real),
        n2=float(avg[MomentId.N2].real),
        c12=complex(avg[MomentId.C12]),
        m11=complex(avg[MomentId.M11]),
        m22=complex(avg[MomentId.M22]),
        x12=complex(avg[MomentId.X12]),
        comm1=float(avg[MomentId.COMM1].real),
        comm2=float(avg[MomentId.COMM2].real),
    )


def moments(p: SystemParams, f: FilterSpec) -> MomentSet:
    """All second moments of the filtered pair, each normalized by the bandwidth."""
    return _moment_set(_adaptive_band(p, f).integrals / f.bandwidth)


def correlator_modulus(p: SystemParams, f: FilterSpec) -> float:
    """|<D1 D2>|, the objective of the delay optimizer."""
    return abs(moments(p, f).c12)


class CorrelatorProfile:
    """tau -> |<D1 D2>(tau)| from a single adaptive pass over the band.

    Only the delay phase depends on tau, so the tau-free density is integrated
    once on panels fine enough for every delay up to ``max_delay``. The other
    densities are kept, so the full moment set at any such delay comes for free.
    """

    def __init__(self, p: SystemParams, f: FilterSpec, max_delay: float):
        band = _adaptive_band(p, f.replace(delay=0.0), max_delay=max_delay)
        self.bandwidth = f.bandwidth
        self.nodes = band.nodes
        self.weights = band.weights
        self.densities = band.densities
        self.weighted = band.weights * band.densities[:, MomentId.C12]

    def __call__(self, tau: float) -> float:
        return float(abs(np.exp(-1j * self.nodes * tau) @ self.weighted) / self.bandwidth)

    def evaluate(self, taus: np.ndarray) -> np.ndarray:
        phases = np.exp(-1j * np.outer(np.asarray(taus, dtype=float), self.nodes))
        return np.abs(phases @ self.weighted) / self.bandwidth

    def moments(self, tau: float) -> MomentSet:
        """Every moment at delay ``tau``, which must lie within ``max_delay``."""
        densities = self.densities.copy()
        densities[:, MomentId.C12] *= np.exp(-1j * self.nodes * tau)
        return _moment_set(self.weights @ densities / self.bandwidth)


def correlator_profile(p: SystemParams, f: FilterSpec, max_delay: float) -> CorrelatorProfile:
    return CorrelatorProfile(p, f, max_delay)
