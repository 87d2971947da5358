"""Shared shape builders and fixtures."""

import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings as hypothesis_settings

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from cache_manager import cache_manager
from config.settings import settings
from curve import OrientedClosedCurve, horseshoe_vertices
from maps import PlaneMap, parse_map

hypothesis_settings.register_profile(
    "plane-topo", deadline=None, max_examples=50,
    suppress_health_check=[HealthCheck.function_scoped_fixture, HealthCheck.too_slow])
hypothesis_settings.load_profile("plane-topo")


def star_polygon(rng: np.random.Generator, n: int = 12, center: complex = 0j,
                 rmin: float = 0.7, rmax: float = 1.3) -> OrientedClosedCurve:
    """Counterclockwise polygon, star-shaped about its center."""
    theta = 2 * np.pi * (np.arange(n) + rng.uniform(0.1, 0.9, n)) / n
    radius = rng.uniform(rmin, rmax, n)
    return OrientedClosedCurve(center + radius * np.exp(1j * theta))


def random_polynomial(rng: np.random.Generator, degree: int = 3, scale: float = 0.05) -> PlaneMap:
    """Rotation about the origin plus a small random polynomial."""
    coeffs = [complex(*rng.normal(0, scale, 2)) for _ in range(degree + 1)]
    coeffs[1] += np.exp(1j * rng.uniform(0.6, 2 * np.pi - 0.6))
    return parse_map("poly[" + ", ".join(f"({c.real:.6f}{c.imag:+.6f}i)" for c in coeffs) + "]")


def square_vertices(half: float = 1.0, center: complex = 0j) -> np.ndarray:
    return center + half * np.array([-1 - 1j, 1 - 1j, 1 + 1j, -1 + 1j])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def unit_circle() -> OrientedClosedCurve:
    return OrientedClosedCurve.circle(0j, 1.0, 128)


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """Runs write their cache and reports under the test's tmp directory."""
    monkeypatch.setattr(settings, "cache_dir", str(tmp_path / "cache"))
    monkeypatch.setattr(settings, "output_dir", str(tmp_path / "out"))
    monkeypatch.setattr(settings, "seed", 0)
    monkeypatch.setattr(settings, "tolerance", 1e-9)
    cache_manager._memory_cache.clear()
    yield


def horseshoe() -> OrientedClosedCurve:
    """Boundary of the annular sector 1 <= |z| <= 2, 0 <= arg z <= 300 degrees."""
    return OrientedClosedCurve(horseshoe_vertices())


def ring_params(S: OrientedClosedCurve, degrees, radii=(2.0, 1.0)) -> np.ndarray:
    """Curve parameters of the points r * exp(i theta) on S."""
    pts = [r * np.exp(1j * np.deg2rad(d)) for r in radii for d in degrees]
    return np.sort([S.param_of(p) for p in pts])
