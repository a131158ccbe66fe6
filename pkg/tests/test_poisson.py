"""
Tests for numeric Poisson brackets and the bracket-table verifier.
"""

import numpy as np
import pytest

from curvedbody.errors import DimensionMismatch
from curvedbody.poisson import (
    FrameBundleLayout,
    PhaseFunction,
    TableRow,
    anti_dual_residual,
    bracket_matrix,
    frame_bundle_functions,
    jacobi_residual,
    leibniz_residual,
    numeric_bracket,
    sample_frame_bundle_point,
    verify_su2,
    verify_tables,
)
from curvedbody.poisson.brackets import _matched_sign


def test_canonical_pair():
    """{q, p} = 1 and {p, q} = -1 in one degree of freedom."""
    q = lambda z: z[0]
    p = lambda z: z[1]
    z = np.array([0.3, -0.7])
    assert abs(numeric_bracket(q, p, z, 1) - 1.0) < 1e-10
    assert abs(numeric_bracket(p, q, z, 1) + 1.0) < 1e-10


def test_angular_momentum_algebra():
    """{L_x, L_y} = L_z for the planar-rotation generators of R^3."""
    def L(k):
        return PhaseFunction(f"L{k}", lambda z: np.cross(z[:3], z[3:])[k])

    z = np.array([0.4, -1.1, 0.6, 0.9, 0.2, -0.5])
    assert abs(numeric_bracket(L(0), L(1), z, 3) - L(2)(z)) < 1e-9
    assert jacobi_residual(L(0), L(1), L(2), z, 3) < 1e-7
    assert leibniz_residual(L(0), L(1), L(2), z, 3) < 1e-9


def test_bracket_matrix_antisymmetric(connections, rng):
    """The stacked bracket matrix is exactly antisymmetric."""
    connection = connections['sphere']
    fset = frame_bundle_functions(connection)
    B = bracket_matrix(fset, sample_frame_bundle_point(connection, rng))
    assert B.shape == (len(fset), len(fset))
    np.testing.assert_allclose(B, -B.T, atol=1e-14)


def test_anti_dual_relations(connections, rng):
    """Spatial and co-moving momenta are related through the frame."""
    connection = connections['torus']
    layout = FrameBundleLayout(2)
    z = sample_frame_bundle_point(connection, rng)
    assert anti_dual_residual(layout, connection, z) < 1e-12


def test_layout_shape_checked():
    """Phase points of the wrong size are rejected."""
    with pytest.raises(DimensionMismatch):
        FrameBundleLayout(2).unpack(np.zeros(11))


def test_table_row_update():
    """Rows keep the worst residual and count samples."""
    row = TableRow('{x,P}', tolerance=1e-7)
    for value in (1e-9, 3e-8, 2e-9):
        row.update(value)
    assert row.residual == 3e-8
    assert row.samples == 3
    assert row.passed


@pytest.mark.parametrize('name', ['sphere', 'pseudosphere', 'torus'])
def test_frame_bundle_tables(connections, name):
    """Every frame-bundle table row holds on a few random points."""
    report = verify_tables(connections[name], n_samples=3, seed=1, jacobi_triples=3)
    failed = [row.name for row in report.rows if not row.passed and row.name != '{P,Sigma}']
    assert failed == []
    assert report.row('{x,P}').samples == 3
    mixed = report.mixed_sign
    assert min(mixed['printed'], mixed['flipped']) < 1e-7
    assert mixed['consistent'] == (mixed['printed'] <= 1e-7)
    assert mixed['matched'] in ('printed', 'flipped')


def test_mixed_sign_verdict():
    """Only the printed sign counts as consistent; a double miss matches neither."""
    assert _matched_sign(1e-9, 2.0, 1e-7) == 'printed'
    assert _matched_sign(2.0, 1e-9, 1e-7) == 'flipped'
    assert _matched_sign(1e-3, 2e-3, 1e-7) == 'neither'


def test_report_is_seeded(connections):
    """Identical seeds give identical residuals."""
    a = verify_tables(connections['sphere'], n_samples=2, seed=5, jacobi_triples=2)
    b = verify_tables(connections['sphere'], n_samples=2, seed=5, jacobi_triples=2)
    assert a.to_dict() == b.to_dict()


def test_su2_algebra():
    """Drive and relative momenta close the su(2) algebras and commute across families."""
    report = verify_su2(R=1.3, n_samples=3, seed=2, jacobi_triples=3)
    assert report.passed, [(r.name, r.residual) for r in report.rows if not r.passed]
    assert report.row('{|lS_dr|^2,lS_dr}').residual < 1e-7
