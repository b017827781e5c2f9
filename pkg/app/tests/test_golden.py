"""Tests for the scan-then-refine maximizer."""

import math

import numpy as np
import pytest

from app.errors import NoMaximum
from app.services.golden import brute_force_argmax, golden_section_max, scan_then_refine


class TestGoldenSection:
    """Test cases for golden-section refinement."""

    def test_quadratic(self):
        """A smooth peak pins x only to about sqrt(eps)."""
        x, fx = golden_section_max(lambda x: -((x - 0.3) ** 2) + 2.0, 0.0, 1.0, rtol=1e-10)
        assert x == pytest.approx(0.3, abs=1e-7)
        assert fx == pytest.approx(2.0, abs=1e-15)

    def test_kink(self):
        x, fx = golden_section_max(lambda x: -abs(x - 0.3), 0.0, 1.0, rtol=1e-10)
        assert x == pytest.approx(0.3, abs=1e-9)
        assert fx == pytest.approx(0.0, abs=1e-9)

    def test_reversed_bracket(self):
        x, _ = golden_section_max(lambda x: -abs(x + 2.0), -1.0, -5.0, rtol=1e-9)
        assert x == pytest.approx(-2.0, abs=1e-8)

    def test_degenerate_bracket(self):
        x, fx = golden_section_max(lambda x: x, 1.0, 1.0)
        assert x == 1.0
        assert fx == 1.0

    def test_non_finite_values_lose(self):
        """NaN counts as minus infinity, so the finite side wins."""
        x, fx = golden_section_max(lambda x: math.nan if x > 0.5 else x, 0.0, 1.0, rtol=1e-9)
        assert x == pytest.approx(0.5, abs=1e-8)
        assert math.isfinite(fx)


class TestScanThenRefine:
    """Test cases for the grid scan with golden refinement."""

    def test_multimodal_picks_global_maximum(self):
        """The grid locates the taller of two peaks before refinement."""

        def f(x: float) -> float:
            return math.exp(-((x + 2.0) ** 2)) + 2.0 * math.exp(-((x - 1.5) ** 2) / 0.1)

        x, fx = scan_then_refine(f, np.linspace(-5.0, 5.0, 101), rtol=1e-10)
        assert x == pytest.approx(1.5, abs=5e-6)
        assert fx == pytest.approx(2.0, rel=1e-5)

    def test_uses_precomputed_values(self):
        calls = []

        def f(x: float) -> float:
            calls.append(x)
            return -((x - 0.25) ** 2)

        grid = np.linspace(-1.0, 1.0, 9)
        values = [-((g - 0.25) ** 2) for g in grid]
        scan_then_refine(f, grid, values)
        assert calls
        assert all(0.0 <= x <= 0.5 for x in calls)

    def test_edge_maximum(self):
        x, _ = scan_then_refine(lambda x: x, np.linspace(0.0, 1.0, 11))
        assert x == pytest.approx(1.0, abs=1e-5)

    def test_flat_objective(self):
        with pytest.raises(NoMaximum, match="flat"):
            scan_then_refine(lambda x: 3.0, np.linspace(0.0, 1.0, 11))

    def test_undefined_objective(self):
        with pytest.raises(NoMaximum, match="undefined"):
            scan_then_refine(lambda x: math.nan, np.linspace(0.0, 1.0, 11))


class TestBruteForce:
    """Test cases for the dense-grid reference maximizer."""

    def test_matches_golden(self):
        def f(x: float) -> float:
            return math.sin(x) * math.exp(-0.1 * x)

        x_brute, _, cell = brute_force_argmax(f, 0.0, 6.0)
        x_golden, _ = scan_then_refine(f, np.linspace(0.0, 6.0, 31), rtol=1e-10)
        assert abs(x_brute - x_golden) <= cell
        assert cell == pytest.approx(6.0 / 9999)
