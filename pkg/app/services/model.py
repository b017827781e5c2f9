"""Linearized three-mode dynamics: stability, drift matrix and scattering matrix.

Fourier convention: o(t) = (2 pi)^(-1/2) * integral o(w) exp(-i w t) dw, so d/dt
becomes -i w, and the input correlators carry no 2 pi factor,
<d_in(w) d_in^dag(w')> = (N + 1) delta(w - w').

The internal state vector is (b, d1, d2^dag); the scattering matrix is reported in
the order (d1, d2^dag, b). The d2^dag entry at frequency w is [d2(-w)]^dag.
"""

import math

import numpy as np
from loguru import logger

from app.errors import NearSingular
from app.models.config import settings
from app.models.input import SystemParams
from app.models.output import ScatteringMatrix, StabilityVerdict

# (b, d1, d2^dag) -> (d1, d2^dag, b)
_OUTPUT_ORDER = [1, 2, 0]


def check_stability(p: SystemParams) -> StabilityVerdict:
    """Closed-form stability verdict, valid for strong cooperativity and kappa_i >> gamma."""
    rtol = settings.marginal_rtol
    if p.g2 == 0.0:
        return StabilityVerdict.STABLE

    if math.isclose(p.kappa1, p.kappa2, rel_tol=rtol):
        if math.isclose(p.g1**2, p.g2**2, rel_tol=rtol):
            return StabilityVerdict.MARGINAL
        return StabilityVerdict.STABLE if p.g2 < p.g1 else StabilityVerdict.UNSTABLE

    ratio = p.g1**2 / p.g2**2
    threshold = max(p.kappa1 / p.kappa2, p.kappa2 / p.kappa1)
    if math.isclose(ratio, threshold, rel_tol=rtol):
        return StabilityVerdict.MARGINAL
    return StabilityVerdict.STABLE if ratio > threshold else StabilityVerdict.UNSTABLE


def drift_matrix(p: SystemParams) -> np.ndarray:
    """M with d/dt (b, d1, d2^dag) = M (b, d1, d2^dag) + noise."""
    return np.array(
        [
            [-0.5 * p.gamma, -1j * p.g1, -1j * p.g2],
            [-1j * p.g1, -0.5 * p.kappa1, 0.0],
            [1j * p.g2, 0.0, -0.5 * p.kappa2],
        ],
        dtype=complex,
    )


def drift_eigenvalues(p: SystemParams) -> np.ndarray:
    return np.linalg.eigvals(drift_matrix(p))


def is_stable_by_eigenvalues(p: SystemParams) -> bool:
    """Brute-force stability: every eigenvalue of the drift matrix decays."""
    return bool(np.max(drift_eigenvalues(p).real) < 0.0)


def cooperativities(p: SystemParams) -> tuple[float, float]:
    """C_i = 4 G_i^2 / (gamma kappa_i)."""
    return (
        4.0 * p.g1**2 / (p.gamma * p.kappa1),
        4.0 * p.g2**2 / (p.gamma * p.kappa2),
    )


def _coupling_rates(p: SystemParams) -> np.ndarray:
    return np.sqrt(np.array([p.gamma, p.kappa1, p.kappa2]))


def _response(p: SystemParams, freqs: np.ndarray) -> np.ndarray:
    """(-i w' I - M)^-1 per frequency from its adjugate.

    The determinant is assembled as a b c + (G1 - G2)(G1 + G2) c + G2^2 (c - b), which
    stays accurate near G1 = G2 where the expanded form loses every digit to
    cancellation of the G^2 terms.
    """
    a = -1j * freqs + 0.5 * p.gamma
    b = -1j * freqs + 0.5 * p.kappa1
    c = -1j * freqs + 0.5 * p.kappa2
    g1, g2 = p.g1, p.g2
    det = a * b * c + (g1 - g2) * (g1 + g2) * c + g2**2 * 0.5 * (p.kappa2 - p.kappa1)

    inverse = np.empty((freqs.size, 3, 3), dtype=complex)
    inverse[:, 0, 0] = b * c
    inverse[:, 0, 1] = -1j * g1 * c
    inverse[:, 0, 2] = -1j * g2 * b
    inverse[:, 1, 0] = -1j * g1 * c
    inverse[:, 1, 1] = a * c - g2**2
    inverse[:, 1, 2] = -g1 * g2
    inverse[:, 2, 0] = 1j * g2 * b
    inverse[:, 2, 1] = g1 * g2
    inverse[:, 2, 2] = a * b + g1**2
    return inverse / det[:, None, None]


def scattering_batch(p: SystemParams, freqs: np.ndarray) -> np.ndarray:
    """S(w') for every frequency in ``freqs``; shape (len(freqs), 3, 3).

    Solves (-i w' I - M) v = -L v_in and applies out = in + L v, with
    L = diag(sqrt(gamma), sqrt(kappa1), sqrt(kappa2)).
    """
    freqs = np.asarray(freqs, dtype=float)
    rates = _coupling_rates(p)
    system = -1j * freqs[:, None, None] * np.eye(3) - drift_matrix(p)

    cond = np.linalg.cond(system)
    worst = int(np.argmax(cond))
    if not np.isfinite(cond[worst]) or cond[worst] > settings.near_singular_cond:
        logger.error(
            "Scattering solve ill-conditioned at w'={}: cond={:.3e}", freqs[worst], cond[worst]
        )
        raise NearSingular(
            f"condition number {cond[worst]:.3e} at w'={freqs[worst]:.6g} exceeds "
            f"{settings.near_singular_cond:.1e}"
        )

    internal = np.eye(3) - rates[None, :, None] * _response(p, freqs) * rates[None, None, :]
    return internal[:, _OUTPUT_ORDER][:, :, _OUTPUT_ORDER]


def scattering(p: SystemParams, freq: float) -> ScatteringMatrix:
    """S(freq) as an immutable value."""
    if not math.isfinite(freq):
        raise ValueError(f"frequency must be finite, got {freq}")
    entries = scattering_batch(p, np.array([freq]))[0]
    return ScatteringMatrix(freq=freq, entries=entries)
