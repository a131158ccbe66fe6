"""
Tests for frame fields, co-moving kinematics and deformation measures.
"""

import math

import numpy as np
import pytest

from curvedbody.errors import BadParams, SingularPhi, UnsupportedChart
from curvedbody.frames import (
    InternalConfiguration,
    aholonomic_connection,
    builtin_frame,
    comoving_velocity,
    deformation_tensors,
    gram_schmidt_frame,
    invariants_from_polar,
    polar_and_two_polar,
    rotation2,
    teleparallel_objects,
)
from curvedbody.geometry import custom, levi_civita_connection, sphere2


def test_builtin_frames_orthonormal(charts):
    """Built-in frames satisfy E^T g E = 1 and duality."""
    for chart in charts.values():
        frame = builtin_frame(chart)
        assert frame.orthonormality_residual([0.8, 0.3]) < 1e-13
        assert frame.duality_residual([0.8, 0.3]) < 1e-13


def test_torus_frame_orientation(charts):
    """The torus frame is ordered (E_phi, E_theta)."""
    E = builtin_frame(charts['torus']).legs([0.0, 0.0])
    assert E[0, 0] == 0.0 and E[1, 0] > 0.0


def test_gram_schmidt_frame(charts):
    """Gram-Schmidt legs are orthonormal for any metric."""
    chart = custom(lambda x: np.array([[2.0, 0.3], [0.3, 1.0 + x[0] ** 2]]), 2)
    frame = gram_schmidt_frame(chart)
    assert frame.orthonormality_residual([0.4, 0.1]) < 1e-12
    with pytest.raises(UnsupportedChart):
        builtin_frame(chart)


def test_teleparallel_aholonomy_agrees(charts):
    """Omega from Lie brackets equals Omega from the coframe curl."""
    for chart in charts.values():
        objects = teleparallel_objects(builtin_frame(chart), [0.9, 0.2])
        np.testing.assert_allclose(objects.omega, objects.omega_from_coframe, atol=1e-7)
        assert objects.parallel_residual < 1e-7


def test_sphere_aholonomic_connection():
    """In the orthonormal polar frame Gamma^r_phiphi = -cot(r/R)/R and Gamma_ABC is skew in A, B."""
    R, r = 2.0, 0.8
    chart = sphere2(R)
    gamma = aholonomic_connection(builtin_frame(chart), levi_civita_connection(chart), [r, 0.3])
    assert math.isclose(gamma[0, 1, 1], -1.0 / (R * math.tan(r / R)), rel_tol=1e-12)
    np.testing.assert_allclose(gamma, -gamma.transpose(1, 0, 2), atol=1e-14)


def test_internal_configuration_checks():
    """Gyroscopic phi must be orthogonal and no phi may be singular."""
    with pytest.raises(BadParams):
        InternalConfiguration([1.0, 0.0], np.diag([1.0, 2.0]), mode="gyroscopic")
    with pytest.raises(SingularPhi):
        InternalConfiguration([1.0, 0.0], np.zeros((2, 2)))
    with pytest.raises(BadParams):
        InternalConfiguration([1.0, 0.0], np.diag([1.0, -1.0]), mode="affine")


def test_gyroscope_angular_velocity():
    """On the sphere omega = dpsi/dt + cos(r/R) dphi/dt."""
    chart = sphere2(1.0)
    frame = builtin_frame(chart)
    conn = levi_civita_connection(chart)
    r, psi, phi_rate, psi_rate = 1.1, 0.4, 0.7, -0.3
    config = InternalConfiguration([r, 0.0], rotation2(psi), mode="gyroscopic")
    J2 = np.array([[0.0, -1.0], [1.0, 0.0]])
    velocity = comoving_velocity(config, [0.2, phi_rate], psi_rate * J2 @ rotation2(psi), frame, conn)
    assert math.isclose(velocity.scalar_rate, psi_rate + math.cos(r) * phi_rate, rel_tol=1e-12)
    assert velocity.skew_residual() < 1e-14


def test_deformation_invariants():
    """Green invariants of a stretch and the polar pair reproduce each other."""
    config = InternalConfiguration([0.0, 0.0], np.diag([2.0, 0.5]))
    tensors = deformation_tensors(config, np.eye(2))
    np.testing.assert_allclose(tensors.invariants, [2.0, 0.5], rtol=1e-14)
    lam, mu = invariants_from_polar(*tensors.polar_pair)
    assert math.isclose(lam, 2.0, rel_tol=1e-12)
    assert math.isclose(mu, 0.5, rel_tol=1e-12)
    gyro = InternalConfiguration([0.0, 0.0], rotation2(0.3), mode="gyroscopic")
    np.testing.assert_array_equal(deformation_tensors(gyro, np.eye(2)).green, np.eye(2))


def test_polar_decompositions(rng):
    """phi = U A = B U = L D Rm^T with det L = +1 and descending D."""
    for _ in range(10):
        phi = rng.normal(size=(3, 3))
        if np.linalg.det(phi) < 0.0:
            phi[:, 0] *= -1.0
        dec = polar_and_two_polar(phi)
        assert dec.reconstruction_residual(phi) < 1e-12
        assert math.isclose(np.linalg.det(dec.L), 1.0, rel_tol=1e-12)
        d = np.diag(dec.D)
        assert np.all(d > 0.0) and np.all(np.diff(d) <= 0.0)


def test_polar_degenerate_branch():
    """Coinciding invariants select the fallback branch."""
    dec = polar_and_two_polar(2.0 * rotation2(0.5))
    assert dec.degenerate
    np.testing.assert_allclose(dec.D, 2.0 * np.eye(2), atol=1e-14)
    assert dec.reconstruction_residual(2.0 * rotation2(0.5)) < 1e-13
    with pytest.raises(SingularPhi):
        polar_and_two_polar(np.zeros((2, 2)))
