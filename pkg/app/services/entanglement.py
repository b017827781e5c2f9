"""Covariance matrix of the filtered pair and its logarithmic negativity.

Quadratures are X = (D + D^dag)/sqrt(2) and P = (D - D^dag)/(i sqrt(2)), ordered
(X1, P1, X2, P2), with V_ij = <{dR_i, dR_j}>/2 so the vacuum is I/2.
"""

import math

import numpy as np
from loguru import logger

from app.errors import Unphysical
from app.models.config import settings
from app.models.input import FilterSpec, SystemParams
from app.models.output import CovarianceMatrix, EntanglementResult, MomentSet
from app.services.spectra import moments

# symplectic form on (X1, P1, X2, P2)
OMEGA = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
# partial transpose P2 -> -P2
_FLIP_P2 = np.diag([1.0, 1.0, 1.0, -1.0])
# 2 nu_minus this close below 1 is vacuum-level noise, not entanglement
_VACUUM_ULPS = 4.0 * np.finfo(float).eps


def _local_block(n: float, m: complex) -> np.ndarray:
    """Covariance of one mode with <a^dag a> = n and <a a> = m."""
    return np.array([[n + 0.5 + m.real, m.imag], [m.imag, n + 0.5 - m.real]])


def _cross_block(c: complex, x: complex) -> np.ndarray:
    """Cross covariance from <a1 a2> = c and <a1^dag a2> = x."""
    return np.array(
        [[c.real + x.real, c.imag + x.imag], [c.imag - x.imag, x.real - c.real]]
    )


def bona_fide_violation(v: np.ndarray) -> float:
    """Smallest eigenvalue of V + (i/2) Omega; negative means unphysical."""
    return float(np.linalg.eigvalsh(v + 0.5j * OMEGA).min())


def covariance_from_moments(m: MomentSet) -> CovarianceMatrix:
    """Exact map from the six moments to the 16 covariance entries."""
    c = _cross_block(complex(m.c12), complex(m.x12))
    v = np.block(
        [
            [_local_block(m.n1, complex(m.m11)), c],
            [c.T, _local_block(m.n2, complex(m.m22))],
        ]
    )

    lowest = bona_fide_violation(v)
    if lowest < -settings.bona_fide_tol * max(1.0, float(np.abs(v).max())):
        logger.error("Covariance matrix violates the uncertainty principle: {:.3e}", lowest)
        raise Unphysical(f"V + (i/2)Omega has eigenvalue {lowest:.3e} < 0")
    return CovarianceMatrix(entries=v)


def _det2(block: np.ndarray) -> float:
    return float(block[0, 0] * block[1, 1] - block[0, 1] * block[1, 0])


def _det_blocks(v: CovarianceMatrix) -> float:
    """det V through the Schur complement of A."""
    a, b, c = v.a, v.b, v.c
    det_a = _det2(a)
    if det_a == 0.0:
        return float(np.linalg.det(v.entries))
    a_inv = np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]]) / det_a
    return det_a * _det2(b - c.T @ a_inv @ c)


def log_negativity(v: CovarianceMatrix) -> EntanglementResult:
    """E_N = max(0, -ln 2 nu_minus) of the partially transposed state."""
    det_v = _det_blocks(v)
    delta = _det2(v.a) + _det2(v.b) - 2.0 * _det2(v.c)
    disc = delta * delta - 4.0 * det_v

    scale = max(1.0, delta * delta)
    if disc < -settings.bona_fide_tol * scale:
        raise Unphysical(f"complex symplectic eigenvalue: discriminant {disc:.3e}")
    root = math.sqrt(max(disc, 0.0))

    # nu^2 = (delta - root)/2 rewritten as 2 det V / (delta + root) to avoid cancellation
    if delta + root > 0.0:
        nu_sq = 2.0 * det_v / (delta + root)
    else:
        nu_sq = 0.5 * (delta - root)
    if nu_sq <= 0.0:
        raise Unphysical(f"non-positive symplectic eigenvalue squared {nu_sq:.3e}")

    nu_minus = math.sqrt(nu_sq)
    if 2.0 * nu_minus >= 1.0 - _VACUUM_ULPS:
        return EntanglementResult(e_n=0.0, nu_minus=nu_minus)
    return EntanglementResult(e_n=-math.log(2.0 * nu_minus), nu_minus=nu_minus)


def symplectic_eigenvalues_oracle(v: np.ndarray) -> np.ndarray:
    """Partially transposed symplectic eigenvalues from |eig(i Omega V~)|, ascending."""
    flipped = _FLIP_P2 @ np.asarray(v, dtype=float) @ _FLIP_P2
    eigs = np.abs(np.linalg.eigvals(1j * OMEGA @ flipped))
    return np.sort(eigs)[::2]


def entanglement_from_moments(m: MomentSet) -> EntanglementResult:
    result = log_negativity(covariance_from_moments(m))
    return result.model_copy(update={"moments": m})


def output_entanglement(p: SystemParams, f: FilterSpec) -> EntanglementResult:
    """Full pipeline: moments of the filtered pair, covariance matrix, E_N."""
    return entanglement_from_moments(moments(p, f))
