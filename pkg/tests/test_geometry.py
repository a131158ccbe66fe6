"""
Tests for charts, connections and curvature.
"""

import math

import numpy as np
import pytest

from curvedbody.errors import BadParams, DimensionMismatch, SingularPoint, UnsupportedChart
from curvedbody.geometry import (
    CurvatureField,
    chart_from_name,
    constant_torsion_flat3,
    covariant_derivative_along,
    curvature_at,
    custom,
    flat,
    levi_civita_at,
    levi_civita_connection,
    metric_compatibility_residual,
    scalar_curvature_at,
    sphere2,
    sphere3,
    torsion_contortion_at,
    torus2,
)


def test_sphere_scalar_curvature(connections, rng):
    """Sphere of radius 2 has scalar curvature 2/R^2 everywhere."""
    conn = connections['sphere']
    for _ in range(20):
        x = conn.chart.sample_point(rng)
        assert math.isclose(scalar_curvature_at(conn, x), 0.5, rel_tol=1e-8)


def test_pseudosphere_scalar_curvature(connections, rng):
    """Pseudosphere of radius 1.5 has scalar curvature -2/R^2."""
    conn = connections['pseudosphere']
    for _ in range(20):
        x = conn.chart.sample_point(rng)
        assert math.isclose(scalar_curvature_at(conn, x), -2.0 / 1.5 ** 2, rel_tol=1e-8)


def test_torus_scalar_curvature(connections):
    """Torus curvature changes sign between the outer and inner equator."""
    conn = connections['torus']
    for theta in (0.0, 1.0, 2.5, -2.0):
        expected = 2.0 * math.cos(theta) / (1.0 * (3.0 + math.cos(theta)))
        assert math.isclose(scalar_curvature_at(conn, [theta, 0.3]), expected, rel_tol=1e-8, abs_tol=1e-10)


def test_flat_and_sphere3_curvature(rng):
    """Flat space is flat; S^3 of radius R has scalar curvature 6/R^2."""
    conn = levi_civita_connection(flat(3))
    assert scalar_curvature_at(conn, [0.1, 0.2, 0.3]) == 0.0
    s3 = levi_civita_connection(sphere3(1.0))
    for _ in range(5):
        x = s3.chart.sample_point(rng)
        assert math.isclose(scalar_curvature_at(s3, x), 6.0, rel_tol=1e-5)


def test_christoffel_matches_numeric(charts):
    """Closed-form Christoffel symbols agree with the metric-derivative formula."""
    for chart in charts.values():
        x = np.array([0.7, 0.4])
        numeric = custom(chart.metric_fn, 2)
        np.testing.assert_allclose(chart.christoffel_fn(x), levi_civita_at(numeric, x), atol=1e-7)


def test_sphere_christoffel_rphiphi():
    """Gamma^r_phiphi = -(R/2) sin(2r/R)."""
    chart = sphere2(2.0)
    G = chart.christoffel_fn(np.array([1.0, 0.0]))
    assert math.isclose(G[0, 1, 1], -math.sin(1.0), rel_tol=1e-14)


def test_metric_compatibility(connections):
    """Levi-Civita connections are metric compatible."""
    for conn in connections.values():
        assert metric_compatibility_residual(conn, [0.7, 0.2]) < 1e-8


def test_curvature_antisymmetry(connections):
    """R^a_bij is antisymmetric in its last two indices and R_abij in the first two."""
    for conn in connections.values():
        Rm = curvature_at(conn, [0.9, 0.1])
        np.testing.assert_allclose(Rm, -Rm.transpose(0, 1, 3, 2), atol=1e-14)
        low = CurvatureField(conn).lowered([0.9, 0.1])
        np.testing.assert_allclose(low, -low.transpose(1, 0, 2, 3), atol=1e-10)


def test_torsion_chart():
    """The synthetic torsion connection is metric compatible with antisymmetric contortion."""
    conn = constant_torsion_flat3(0.3)
    x = [0.1, -0.2, 0.4]
    split = torsion_contortion_at(conn, x)
    assert math.isclose(split.torsion[0, 1, 2], 0.3, rel_tol=1e-14)
    assert split.antisymmetry_residual < 1e-14
    assert split.reconstruction_residual < 1e-14
    assert metric_compatibility_residual(conn, x) < 1e-14


def test_parallel_transport_derivative():
    """A vector with zero covariant derivative moves with dX/dt = -Gamma X v."""
    conn = levi_civita_connection(sphere2(1.0))
    x, v, X = [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]
    rate = -np.einsum("ijk,j,k->i", conn.gamma(x), X, v)
    np.testing.assert_allclose(covariant_derivative_along(conn, x, v, X, rate), 0.0, atol=1e-15)


def test_chart_errors():
    """Bad parameters, singular points and shape errors raise."""
    with pytest.raises(BadParams, match="L must exceed R"):
        torus2(1.0, 1.0)
    with pytest.raises(BadParams):
        sphere2(-1.0)
    with pytest.raises(SingularPoint):
        sphere2(1.0).check_point([0.0, 0.0])
    with pytest.raises(DimensionMismatch):
        sphere2(1.0).check_point([1.0, 0.0, 0.0])
    with pytest.raises(UnsupportedChart):
        chart_from_name("klein_bottle")


def test_chart_from_name():
    """Named charts carry their parameters."""
    chart = chart_from_name("torus2", R=0.5, L=2.0)
    assert chart.params == {"L": 2.0, "R": 0.5}
    assert chart.coordinates == ("theta", "phi")
    assert chart_from_name("flat", n=3).dim == 3
