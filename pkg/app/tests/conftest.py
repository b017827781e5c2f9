"""Test fixtures for optomech entanglement tests."""

import numpy as np
import pytest

from app.models.input import FilterSpec, SystemParams

GAMMA = 1.0
KAPPA = 1e5
G1 = 10 * KAPPA


@pytest.fixture
def kappa() -> float:
    """Cavity decay of the reference parameters."""
    return KAPPA


@pytest.fixture
def base_params() -> SystemParams:
    """gamma = 1, kappa1 = kappa2 = 1e5, G1 = 10 kappa, G2 = 0.99 G1, zero-temperature baths."""
    return SystemParams(kappa1=KAPPA, kappa2=KAPPA, gamma=GAMMA, g1=G1, g2=0.99 * G1)


@pytest.fixture
def wide_filter() -> FilterSpec:
    """Resonant filter of bandwidth kappa."""
    return FilterSpec(center=0.0, bandwidth=KAPPA)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def random_stable_params(rng: np.random.Generator) -> tuple[SystemParams, FilterSpec]:
    """Random stable system and filter in the strong-cooperativity regime."""
    kappa1 = KAPPA * rng.uniform(0.5, 2.0)
    kappa2 = kappa1 * rng.uniform(0.5, 2.0)
    g1 = kappa1 * rng.uniform(0.5, 20.0)
    threshold = max(kappa1 / kappa2, kappa2 / kappa1)
    g2 = g1 / np.sqrt(threshold) * rng.uniform(0.1, 0.95)
    params = SystemParams(
        kappa1=kappa1,
        kappa2=kappa2,
        gamma=GAMMA,
        g1=g1,
        g2=g2,
        n_m=rng.uniform(0.0, 5.0),
        n1=rng.uniform(0.0, 0.5),
        n2=rng.uniform(0.0, 0.5),
    )
    sigma = kappa1 * 10 ** rng.uniform(-4.0, np.log10(2.0))
    center = kappa1 * rng.uniform(-1.0, 1.0)
    return params, FilterSpec(center=center, bandwidth=sigma, delay=rng.uniform(-2.0, 2.0) / kappa1)
