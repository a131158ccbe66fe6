"""
Tests for the SU(2) specialization: exponential maps, invariant frames and momenta.
"""

import math

import numpy as np
import pytest

from curvedbody.dynamics import InertiaSpec, PhaseState, config_metric, integrate
from curvedbody.errors import BadParams
from curvedbody.su2 import (
    FLOW_COLUMNS,
    RotationVector,
    exp_so3,
    exp_su2,
    flat_limit_deviation,
    hat,
    killing_form_so3,
    kinetic_hamiltonian,
    kinetic_lagrangian,
    left_jacobian,
    lie_bracket_constants,
    momentum_flow,
    plane_normal_angle,
    project_su2_to_so3,
    s3_legendre,
    s3_legendre_inverse,
    s3_metric_check,
    s3_momentum_pair,
    vee,
)


def test_exp_so3_is_rotation(rng):
    """exp_so3 gives proper orthogonal matrices, including near k = 0."""
    for k in (rng.normal(size=3), np.array([1e-9, 0.0, 2e-9])):
        Rm = exp_so3(k)
        np.testing.assert_allclose(Rm.T @ Rm, np.eye(3), atol=1e-13)
        assert math.isclose(np.linalg.det(Rm), 1.0, rel_tol=1e-12)


def test_double_cover(rng):
    """u and -u project to the same rotation, which equals exp_so3."""
    k = rng.normal(size=3)
    u = exp_su2(k)
    np.testing.assert_allclose(project_su2_to_so3(u), exp_so3(k), atol=1e-13)
    np.testing.assert_allclose(project_su2_to_so3(-u), exp_so3(k), atol=1e-13)
    np.testing.assert_allclose(project_su2_to_so3(u.matrix()), exp_so3(k), atol=1e-13)


def test_hat_vee():
    """vee inverts hat and hat is the cross product."""
    v = np.array([0.3, -1.2, 0.8])
    w = np.array([1.0, 0.5, -0.2])
    np.testing.assert_allclose(vee(hat(v)), v)
    np.testing.assert_allclose(hat(v) @ w, np.cross(v, w), atol=1e-15)


def test_left_jacobian():
    """dR/dt R^T = [J_l dk/dt]x along a straight line in k."""
    k = np.array([0.7, -0.4, 1.1])
    v = np.array([0.2, 0.5, -0.3])
    h = 1e-5
    dR = (exp_so3(k + h * v) - exp_so3(k - h * v)) / (2.0 * h)
    np.testing.assert_allclose(dR @ exp_so3(k).T, hat(left_jacobian(k) @ v), atol=1e-8)


def test_killing_form():
    """The so(3) Killing form is -2 delta."""
    np.testing.assert_allclose(killing_form_so3(), -2.0 * np.eye(3), atol=1e-14)


def test_rotation_vector_limits():
    """Rotation vectors outside the chart are rejected."""
    RotationVector([0.0, 0.0, 6.0])
    with pytest.raises(BadParams):
        RotationVector([0.0, 0.0, 4.0], group='so3')
    with pytest.raises(BadParams):
        RotationVector([0.0, 7.0, 0.0])


def test_s3_metric_agrees():
    """Frame, embedding and spherical forms of the S^3 metric coincide."""
    report = s3_metric_check(1.3, samples=10, rng=np.random.default_rng(3))
    assert max(report.values()) < 1e-9


def test_invariant_frame_brackets():
    """Left frames have constant structure functions and commute with right frames."""
    R = 1.3
    x1 = np.array([0.4, -0.2, 0.3])
    x2 = np.array([-0.6, 0.5, 0.1])
    np.testing.assert_allclose(lie_bracket_constants(R, x1), lie_bracket_constants(R, x2), atol=1e-6)
    np.testing.assert_allclose(lie_bracket_constants(R, x1, 'left', 'right'), 0.0, atol=1e-6)


def test_flat_limit():
    """Invariant frames approach the identity as R grows."""
    x = np.array([0.3, 0.2, -0.1])
    assert flat_limit_deviation(1e4, x) < flat_limit_deviation(1e2, x) < flat_limit_deviation(1.0, x)
    assert flat_limit_deviation(1e4, x) < 1e-3


def test_legendre_and_energy():
    """The momentum Hamiltonian equals the velocity Lagrangian."""
    m, I, R = 1.5, 0.4, 2.0
    omega = np.array([0.3, -0.8, 0.5])
    omega_rl = np.array([1.1, 0.2, -0.4])
    pair = s3_legendre(omega, omega_rl, m, I, R)
    back = s3_legendre_inverse(pair)
    np.testing.assert_allclose(back[0], omega, rtol=1e-12)
    np.testing.assert_allclose(back[1], omega_rl, rtol=1e-12)
    assert math.isclose(kinetic_hamiltonian(pair), kinetic_lagrangian(omega, omega_rl, m, I, R), rel_tol=1e-12)
    with pytest.raises(BadParams):
        s3_legendre(omega, omega_rl, m, 0.0, R)


def test_momentum_flow_constants():
    """|S|, |S_rl|, S.S_rl and (R/2)S + S_rl stay fixed along the flow."""
    pair = s3_legendre([0.3, -0.8, 0.5], [1.1, 0.2, -0.4], 1.0, 0.5, 1.2)
    flow = momentum_flow(pair, dt=1e-3, steps=2000, output_every=100)
    assert max(flow.constants.values()) < 1e-9
    assert list(flow.to_frame().columns) == list(FLOW_COLUMNS)
    assert len(flow.times) == 21
    # the conserved vector lies in the plane of S and S_rl
    np.testing.assert_allclose(plane_normal_angle(flow), 0.5 * math.pi, atol=1e-9)


def test_frozen_flow():
    """Without the interference term the momenta do not move."""
    pair = s3_legendre([0.3, -0.8, 0.5], [1.1, 0.2, -0.4], 1.0, 0.5, 1.2)
    flow = momentum_flow(pair, dt=1e-2, steps=50, interference=0.0)
    np.testing.assert_array_equal(flow.S[-1], pair.S)
    np.testing.assert_array_equal(flow.S_rl[-1], pair.S_rl)


def test_s3_gyro_matches_momentum_flow():
    """Momenta read off a canonical s3_gyro trajectory follow the reduced flow."""
    m, I, R = 1.0, 0.5, 1.2
    metric = config_metric('s3_gyro', InertiaSpec(m=m, I=I), R=R)
    state0 = PhaseState([0.2, -0.1, 0.3, 0.4, -0.2, 0.1], [0.3, -0.5, 0.2, 0.4, 0.1, -0.3])
    traj = integrate(state0, metric, method='rk4', dt=1e-3, steps=1000, output_every=100)
    pairs = [s3_momentum_pair(q, p, m, I, R) for q, p in zip(traj.q, traj.p)]
    flow = momentum_flow(pairs[0], dt=1e-3, steps=1000, output_every=100)
    np.testing.assert_allclose(flow.times, traj.times, atol=1e-12)
    np.testing.assert_allclose(np.array([pair.S for pair in pairs]), flow.S, atol=1e-8)
    np.testing.assert_allclose(np.array([pair.S_rl for pair in pairs]), flow.S_rl, atol=1e-8)
    assert traj.drift('|S|') < 1e-9
