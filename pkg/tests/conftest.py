"""
Pytest configuration for curvedbody tests.
"""

import numpy as np
import pytest

from curvedbody.dynamics.inertia import InertiaSpec
from curvedbody.geometry.charts import pseudosphere2, sphere2, torus2
from curvedbody.geometry.connection import levi_civita_connection


@pytest.fixture
def rng():
    """Seeded random generator."""
    return np.random.default_rng(0)


@pytest.fixture
def charts():
    """Built-in 2-D charts with non-unit radii."""
    return {
        'sphere': sphere2(2.0),
        'pseudosphere': pseudosphere2(1.5),
        'torus': torus2(3.0, 1.0),
    }


@pytest.fixture
def connections(charts):
    """Levi-Civita connections of the built-in 2-D charts."""
    return {name: levi_civita_connection(chart) for name, chart in charts.items()}


@pytest.fixture
def unit_inertia():
    """Gyroscopic body with m = I = 1."""
    return InertiaSpec(m=1.0, I=1.0)


@pytest.fixture
def write_config(tmp_path):
    """Write YAML text to a scenario file and return its path."""
    def write(text, name="scenario.yaml"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return write
