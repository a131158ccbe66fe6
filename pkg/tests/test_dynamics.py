"""
Tests for scenario metrics, Hamiltonian flow, integrators and the balance form.
"""

import math

import numpy as np
import pytest

from curvedbody.dynamics import (
    BodyState,
    InertiaSpec,
    PhaseState,
    PotentialSpec,
    body_energy,
    comoving_kinetic_of,
    config_metric,
    effective_cyclic,
    force_power,
    geometric_force,
    hamiltonian,
    integrate,
    integrate_balance,
    kinetic_energy,
    kinetic_gradient,
    legendre,
    legendre_inverse,
    potential_from_dict,
    resolve_modes,
    rk4_step,
    symmetric_top_energy,
)
from curvedbody.dynamics import balance
from curvedbody.errors import BadParams, IncompatibleMode, SingularPoint, StepIntoSingularity
from curvedbody.frames import rotation2
from curvedbody.numdiff import gradient, jacobian


@pytest.mark.parametrize('scenario', ['sphere_gyro', 'pseudosphere_gyro', 'torus_gyro'])
def test_gyro_kinetic_matches_comoving(scenario, rng):
    """The generalized-coordinate and co-moving kinetic energies agree for gyroscopes."""
    metric = config_metric(scenario, InertiaSpec(m=1.3, I=0.7), R=1.2, L=3.0)
    for _ in range(5):
        q = metric.sample(rng)
        qdot = rng.normal(size=metric.dim)
        assert math.isclose(kinetic_energy(metric, q, qdot), comoving_kinetic_of(metric, q, qdot), rel_tol=1e-9)


@pytest.mark.parametrize('scenario', ['sphere_affine_xy', 'sphere_affine_polar'])
def test_affine_kinetic_matches_comoving(scenario, rng):
    """The block affine metric reproduces the co-moving kinetic energy."""
    metric = config_metric(scenario, InertiaSpec(m=1.0, I=0.5, mode='affine'), R=1.0)
    for _ in range(5):
        q = metric.sample(rng)
        qdot = rng.normal(size=metric.dim)
        assert math.isclose(kinetic_energy(metric, q, qdot), comoving_kinetic_of(metric, q, qdot), rel_tol=1e-9)


def test_sphere_gyro_is_symmetric_top():
    """The sphere gyroscope is a symmetric top with I1 = m R^2, I3 = I."""
    R, m, I = 1.5, 2.0, 0.3
    metric = config_metric('sphere_gyro', InertiaSpec(m=m, I=I), R=R)
    q = np.array([0.9, 0.4, -1.1])
    qdot = np.array([0.7, -0.2, 1.3])
    top = symmetric_top_energy(m * R * R, I, (q[1], q[0] / R, q[2]), (qdot[1], qdot[0] / R, qdot[2]))
    assert math.isclose(kinetic_energy(metric, q, qdot), top, rel_tol=1e-12)


def test_lorentz_gyro_is_indefinite():
    """The Lorentz-type gyroscope metric has one negative direction."""
    metric = config_metric('pseudosphere_gyro_lorentz', InertiaSpec(m=1.0, I=1.0))
    eig = np.linalg.eigvalsh(metric.G([0.5, 0.0, 0.0]))
    assert np.sum(eig < 0.0) == 1
    assert metric.signature == 'lorentz_type'


def test_legendre_round_trip(rng):
    """Velocities survive a Legendre transform and its inverse."""
    metric = config_metric('torus_gyro', InertiaSpec(m=1.0, I=0.5), R=1.0, L=2.0)
    q = metric.sample(rng)
    qdot = rng.normal(size=3)
    np.testing.assert_allclose(legendre_inverse(metric, q, legendre(metric, q, qdot)), qdot, rtol=1e-12)


def test_hamiltonian_equals_kinetic_plus_potential():
    """H(q, p) with p from the Legendre map equals T + V."""
    metric = config_metric('sphere_point', InertiaSpec(m=1.0, I=1.0))
    potential = PotentialSpec('sphere_oscillator', {'kappa': 2.0})
    q = np.array([0.6, 0.1])
    qdot = np.array([0.3, 0.8])
    expected = kinetic_energy(metric, q, qdot) + math.tan(0.6) ** 2
    assert math.isclose(hamiltonian(metric, q, legendre(metric, q, qdot), potential), expected, rel_tol=1e-12)


def test_singular_locus_rejected():
    """Coordinates on the pole margin raise SingularPoint."""
    metric = config_metric('sphere_gyro', InertiaSpec(m=1.0, I=1.0))
    with pytest.raises(SingularPoint):
        metric.G([0.0, 0.0, 0.0])
    with pytest.raises(BadParams):
        metric.G([0.5, 0.0])


def test_unknown_scenario():
    """Scenario names are validated."""
    with pytest.raises(BadParams):
        config_metric('cylinder_gyro', InertiaSpec(m=1.0, I=1.0))


def test_inertia_expansion():
    """Scalar inertia expands to I/2 for gyroscopes and I for affine bodies."""
    np.testing.assert_allclose(InertiaSpec(m=1.0, I=2.0).J, np.eye(2))
    np.testing.assert_allclose(InertiaSpec(m=1.0, I=2.0, mode='affine').J, 2.0 * np.eye(2))
    with pytest.raises(BadParams):
        InertiaSpec(m=0.0, I=1.0)
    with pytest.raises(BadParams):
        InertiaSpec(m=1.0, J=np.array([[1.0, 0.2], [0.0, 1.0]]))


def test_potential_validation():
    """Unknown kinds and missing parameters are rejected."""
    with pytest.raises(BadParams):
        potential_from_dict({'kind': 'yukawa'})
    with pytest.raises(BadParams):
        potential_from_dict({'kind': 'sphere_kepler'})
    spec = potential_from_dict({'kind': 'pseudo_kepler', 'alpha': 2.0}, R=1.0, chart='pseudosphere2')
    assert math.isclose(spec.radial_profile(1.0), -2.0 / math.tanh(1.0), rel_tol=1e-14)


def test_separable_sphere_breaks_angle_symmetry():
    """The angular term of the separable sphere potential removes p_phi from the cyclic set."""
    metric = config_metric('sphere_point', InertiaSpec(m=1.0, I=1.0))
    potential = PotentialSpec('separable_sphere', {'kappa': 1.0, 'nu': 0.5})
    assert effective_cyclic(metric) == (1,)
    assert effective_cyclic(metric, potential) == ()


@pytest.mark.parametrize('scenario, q0', [
    ('sphere_gyro', [math.pi / 2, 0.0, 0.0]),
    ('pseudosphere_gyro', [0.8, 0.0, 0.0]),
    ('torus_gyro', [0.3, 0.0, 0.0]),
])
def test_gyro_conservation(scenario, q0):
    """Plain implicit midpoint keeps E and the cyclic momenta without any projection."""
    metric = config_metric(scenario, InertiaSpec(m=1.0, I=1.0))
    traj = integrate(PhaseState(q0, [0.3, 1.0, 0.5]), metric, dt=1e-4, steps=400, output_every=10)
    assert traj.drift('E') < 1e-8
    assert traj.drift('p_phi') < 1e-10
    assert traj.drift('p_psi') < 1e-10
    assert traj.constraint_residuals['orthogonality'] < 1e-12
    assert traj.stats.projections == 0
    assert traj.stats.capped == 0
    assert not traj.partial
    assert len(traj.points) == 41


def test_projection_reports_unprojected_drift():
    """With projection on, the energy row carries the error the steps made before projecting."""
    metric = config_metric('sphere_gyro', InertiaSpec(m=1.0, I=1.0))
    state0 = PhaseState([math.pi / 2, 0.0, 0.0], [0.3, 1.0, 0.5])
    traj = integrate(state0, metric, dt=1e-3, steps=100, output_every=10, projection=True)
    assert traj.stats.projections == 100
    assert traj.stats.unprojected_drift > 0.0
    assert traj.drift('E') >= traj.stats.unprojected_drift
    sampled = np.max(np.abs(traj.energy - traj.energy[0])) / abs(traj.energy[0])
    assert traj.drift('E') >= sampled
    # the projection never touches cyclic momenta
    assert traj.drift('p_phi') < 1e-10
    assert traj.drift('p_psi') < 1e-10


def test_midpoint_fixed_point_converges():
    """The fixed-point solve settles well before its cap."""
    metric = config_metric('sphere_gyro', InertiaSpec(m=1.0, I=1.0))
    state0 = PhaseState([math.pi / 2, 0.0, 0.0], [0.3, 1.0, 0.5])
    traj = integrate(state0, metric, dt=1e-3, steps=400, output_every=10)
    assert traj.stats.capped == 0
    assert traj.stats.iterations < 10 * 400


@pytest.mark.parametrize('scenario', [
    'sphere_point', 'pseudosphere_point', 'sphere_gyro', 'pseudosphere_gyro', 'pseudosphere_gyro_lorentz',
    'torus_gyro', 'sphere_affine_xy', 'sphere_affine_polar', 'pseudosphere_affine', 'torus_affine',
])
def test_closed_form_metric_derivative(scenario, rng):
    """Closed-form dG matches a central difference of the metric."""
    mode = 'affine' if 'affine' in scenario else 'gyroscopic'
    metric = config_metric(scenario, InertiaSpec(m=1.3, I=0.7, mode=mode), R=1.2, L=3.0)
    assert metric.metric_derivative_fn is not None
    for _ in range(5):
        q = metric.sample(rng)
        np.testing.assert_allclose(metric.dG(q), jacobian(metric.metric_fn, q), atol=1e-8)


@pytest.mark.parametrize('scenario', ['sphere_gyro', 'torus_gyro', 'sphere_affine_polar'])
def test_kinetic_gradient(scenario, rng):
    """The closed-form kinetic gradient agrees with differences of H and vanishes along cyclic coordinates."""
    mode = 'affine' if 'affine' in scenario else 'gyroscopic'
    metric = config_metric(scenario, InertiaSpec(m=1.0, I=0.5, mode=mode))
    for _ in range(5):
        q = metric.sample(rng)
        p = rng.normal(size=metric.dim)
        grad = kinetic_gradient(metric, q, p)
        scale = max(1.0, hamiltonian(metric, q, p))
        np.testing.assert_allclose(grad, gradient(lambda y: hamiltonian(metric, y, p), q), atol=1e-7 * scale)
        for i in metric.cyclic:
            assert grad[i] == 0.0


def test_s3_metric_derivative_falls_back():
    """Without a closed form the metric derivative is a central difference."""
    metric = config_metric('s3_gyro', InertiaSpec(m=1.0, I=0.5), R=1.2)
    assert metric.metric_derivative_fn is None
    q = np.array([0.2, -0.1, 0.3, 0.4, -0.2, 0.1])
    np.testing.assert_array_equal(metric.dG(q), jacobian(metric.metric_fn, q))


def test_rk4_oscillator_energy():
    """RK4 keeps the energy of a short oscillator orbit to high accuracy."""
    metric = config_metric('sphere_point', InertiaSpec(m=1.0, I=1.0))
    potential = PotentialSpec('sphere_oscillator', {'kappa': 1.0})
    traj = integrate(PhaseState([0.5, 0.0], [0.0, 0.4]), metric, potential, method='rk4', dt=1e-3, steps=1000)
    assert traj.drift('E') < 1e-9
    frame = traj.to_frame()
    assert list(frame.columns) == ['t', 'r', 'phi', 'p_r', 'p_phi', 'E']
    assert len(frame) == 1001


def test_step_into_singularity():
    """A radial fall into the pole stops with a partial trajectory."""
    metric = config_metric('sphere_point', InertiaSpec(m=1.0, I=1.0))
    with pytest.raises(StepIntoSingularity) as info:
        integrate(PhaseState([0.05, 0.0], [-1.0, 0.0]), metric, method='rk4', dt=1e-3, steps=1000)
    traj = info.value.trajectory
    assert traj.partial
    assert 0 < traj.steps < 100


def test_integrator_arguments():
    """Bad integrator settings raise BadParams."""
    metric = config_metric('sphere_point', InertiaSpec(m=1.0, I=1.0))
    state0 = PhaseState([1.0, 0.0], [0.0, 0.5])
    with pytest.raises(BadParams):
        integrate(state0, metric, method='euler')
    with pytest.raises(BadParams):
        integrate(state0, metric, dt=0.0)


def test_resolve_modes():
    """Constraint modes reduce to one effective mode or fail."""
    assert resolve_modes([]) is None
    assert resolve_modes(['gyroscopic', 'incompressible']) == 'gyroscopic'
    assert resolve_modes(['dilatational', 'rotationless']) == 'dilatational'
    with pytest.raises(IncompatibleMode):
        resolve_modes(['gyroscopic', 'dilatational'])
    with pytest.raises(BadParams):
        resolve_modes(['rigid'])


def _spinning_state(chart_point):
    return BodyState(
        x=chart_point,
        V=np.array([0.4, 0.3]),
        e=rotation2(0.3),
        W_hat=np.array([[0.0, -1.2], [1.2, 0.0]]),
    )


def test_geometric_force_does_no_work(connections):
    """The curvature force is orthogonal to the velocity."""
    inertia = InertiaSpec(m=1.0, I=1.0)
    connection = connections['sphere']
    state = _spinning_state(np.array([1.1, 0.2]))
    # legs must be orthonormal in the sphere metric
    g = connection.metric(state.x)
    state.e = np.diag(1.0 / np.sqrt(np.diag(g))) @ rotation2(0.3)
    assert np.linalg.norm(geometric_force(state, connection, inertia).curvature) > 1e-6
    assert abs(force_power(state, connection, inertia)) < 1e-12


def test_gyroscopic_balance_run(connections):
    """A spinning gyroscope on the sphere keeps its energy and constraint."""
    inertia = InertiaSpec(m=1.0, I=1.0)
    connection = connections['sphere']
    state = _spinning_state(np.array([1.1, 0.2]))
    g = connection.metric(state.x)
    state.e = np.diag(1.0 / np.sqrt(np.diag(g))) @ rotation2(0.3)
    traj = integrate_balance(state, connection, inertia, dt=1e-3, steps=200, modes=['gyroscopic'], output_every=20)
    assert traj.mode == 'gyroscopic'
    assert traj.max_abs('constraint') < 1e-9
    assert traj.max_abs('power') < 1e-12
    E0 = body_energy(traj.states[0], connection, inertia)
    assert traj.drift('energy') / E0 < 1e-8
    assert len(traj.to_frame()) == 11


def test_balance_steps_with_shared_rk4(connections, monkeypatch):
    """The balance integrator advances through the common RK4 step."""
    calls = []

    def counted(f, z, dt):
        calls.append(dt)
        return rk4_step(f, z, dt)

    monkeypatch.setattr(balance, 'rk4_step', counted)
    inertia = InertiaSpec(m=1.0, I=1.0)
    connection = connections['sphere']
    state = _spinning_state(np.array([1.1, 0.2]))
    g = connection.metric(state.x)
    state.e = np.diag(1.0 / np.sqrt(np.diag(g))) @ rotation2(0.3)
    integrate_balance(state, connection, inertia, dt=1e-3, steps=30, modes=['gyroscopic'], output_every=10)
    assert calls == [1e-3] * 30
