#!/usr/bin/env python
"""
Pytest configuration and fixtures for klift tests.
"""
import json

import numpy as np
import pytest

from klift.config import Settings, parse_config
from klift.space_forms import SpaceForm


def curve(family, **params):
    """Curve dictionary as it appears in a JSON config."""
    return {"family": family, **params}


@pytest.fixture
def flat():
    """Euclidean 3-space."""
    return SpaceForm(n=3, c=0.0)


@pytest.fixture
def sphere():
    """Unit 3-sphere in its conformal chart."""
    return SpaceForm(n=3, c=1.0)


@pytest.fixture
def hyperbolic():
    """Hyperbolic 3-space, chart radius 2."""
    return SpaceForm(n=3, c=-1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


@pytest.fixture
def settings():
    """Deterministic small worker pool."""
    return Settings(threads=2, log_level="WARNING")


@pytest.fixture
def canonical_data():
    """Flat canonical structure: a1 = 1, a3 = 0, lambda = 1, mu = lambda'."""
    return {
        "manifold": {"n": 3, "c": 0.0},
        "coefficients": {"a1": curve("const", value=1.0), "a3": curve("const", value=0.0), "b_mode": "integrable"},
        "metric": {"lambda": curve("const", value=1.0), "mu": "kahler"},
        "sampling": {"seed": 42, "count": 8, "q_radius": 0.4, "p_radius": 1.0},
    }


@pytest.fixture
def kahler_sphere_data():
    """Three-parameter Kahler family on the sphere: a1 = 1 + t, a3 = t, lambda = 1 + t."""
    return {
        "manifold": {"n": 3, "c": 1.0},
        "coefficients": {
            "a1": curve("poly", coeffs=[1.0, 1.0]),
            "a3": curve("poly", coeffs=[0.0, 1.0]),
            "b_mode": "integrable",
        },
        "metric": {"lambda": curve("poly", coeffs=[1.0, 1.0]), "mu": "kahler"},
        # t stays below 0.2 here, far from the singular locus near t = 0.385
        "sampling": {"seed": 42, "count": 50, "q_radius": 0.4, "p_radius": 0.6},
    }


@pytest.fixture
def canonical_config(canonical_data):
    return parse_config(canonical_data)


@pytest.fixture
def kahler_sphere_config(kahler_sphere_data):
    return parse_config(kahler_sphere_data)


@pytest.fixture
def write_config(tmp_path):
    """Write a config dictionary to a JSON file and return its path."""

    def _write(data, name="run.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return _write


@pytest.fixture(autouse=True)
def reset_environment(monkeypatch):
    """Keep KLIFT_* settings from the outer shell out of the tests."""
    monkeypatch.delenv("KLIFT_THREADS", raising=False)
    monkeypatch.delenv("KLIFT_LOG_LEVEL", raising=False)
