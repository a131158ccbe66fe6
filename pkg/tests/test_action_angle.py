"""
Tests for separable actions, energy inversion, degeneracy and orbit closure.
"""

import math

import numpy as np
import pytest

from curvedbody.action_angle import (
    actions_at,
    bertrand_closure,
    closed_form_applies,
    closed_form_energy,
    four_region_label,
    frequencies_and_degeneracy,
    integer_relations,
    invert_energy,
    rational_closure,
    relation_basis,
    separable_spec,
    spherical_gyro_closed_form,
    trajectory_action,
)
from curvedbody.dynamics import InertiaSpec, PhaseState, PotentialSpec, config_metric, integrate, radial_period
from curvedbody.errors import BadParams, BracketFailure, NoClassicalRegion, UnboundedMotion, UnsupportedForce

TWO_PI = 2.0 * math.pi


@pytest.fixture
def geodetic(unit_inertia):
    """Spherical gyroscope with I = m R^2 = 1, l = 2, s = 1."""
    return separable_spec('sphere_gyro', unit_inertia, l=2.0, s=1.0)


def test_geodetic_radial_action(geodetic):
    """At E = 4.5 the radial action of the geodetic gyroscope is 2 pi."""
    spectrum = actions_at(geodetic, 4.5)
    assert math.isclose(spectrum.actions['r'], TWO_PI, rel_tol=1e-9)
    assert math.isclose(spectrum.actions['phi'], 2.0 * TWO_PI, rel_tol=1e-15)
    assert math.isclose(spectrum.actions['psi'], TWO_PI, rel_tol=1e-15)
    assert spectrum.names == ('r', 'phi', 'psi')


def test_closed_form_geodetic():
    """The closed form reproduces J_theta = 2 pi and its energy relation."""
    result = spherical_gyro_closed_form(4.5, 2.0 * TWO_PI, TWO_PI, 1.0)
    assert math.isclose(result.J_theta, TWO_PI, rel_tol=1e-14)
    assert result.region == 'i'
    assert math.isclose(closed_form_energy(TWO_PI, 2.0 * TWO_PI, TWO_PI, 1.0), 4.5, rel_tol=1e-14)


def test_closed_form_matches_quadrature(unit_inertia):
    """With a cos-polynomial potential the closed form agrees with quadrature."""
    potential = PotentialSpec('cos_poly', {'alpha_hat': 0.3, 'beta_hat': 0.1})
    spec = separable_spec('sphere_gyro', unit_inertia, potential, l=2.0, s=1.0)
    assert closed_form_applies(spec)
    quad = actions_at(spec, 3.0).actions['r']
    closed = spherical_gyro_closed_form(3.0, 2.0 * TWO_PI, TWO_PI, 1.0, 0.3, 0.1).J_theta
    assert math.isclose(quad, closed, rel_tol=1e-8)


def test_closed_form_needs_matching_inertia():
    """The closed form only applies when I = m R^2."""
    spec = separable_spec('sphere_gyro', InertiaSpec(m=1.0, I=0.5), l=2.0, s=1.0)
    assert not closed_form_applies(spec)


def test_four_regions():
    """Each quadrant between the diagonals gets its own label."""
    assert four_region_label(3.0, 1.0) == 'i'
    assert four_region_label(1.0, 3.0) == 'ii'
    assert four_region_label(1.0, -3.0) == 'iii'
    assert four_region_label(-3.0, 1.0) == 'iv'
    assert four_region_label(2.0, 2.0) == 'boundary'


def test_below_minimum(geodetic):
    """An energy below the effective-potential minimum has no classical region."""
    with pytest.raises(NoClassicalRegion):
        actions_at(geodetic, 0.1)


def test_pseudosphere_free_motion_unbounded(unit_inertia):
    """Free motion on the pseudosphere escapes to infinity."""
    spec = separable_spec('pseudosphere_point', unit_inertia, l=1.0)
    with pytest.raises(UnboundedMotion):
        actions_at(spec, 1.0)


def test_pseudosphere_oscillator_bounded(unit_inertia):
    """Below kappa R^2 / 2 the pseudosphere oscillator has finite radial action."""
    potential = PotentialSpec('pseudo_oscillator', {'kappa': 4.0})
    spec = separable_spec('pseudosphere_point', unit_inertia, potential, l=1.0)
    J = actions_at(spec, 1.8).actions['r']
    assert math.isfinite(J) and J > 0.0


def test_harmonic_internal_stages():
    """Stages with x^2 and 1/x^2 terms have the planar-oscillator radial action."""
    inertia = InertiaSpec(m=1.0, I=0.5, mode='affine')
    potential = PotentialSpec('separable_rxy', {'kappa_x': 1.0, 'kappa_y': 2.0})
    spec = separable_spec('sphere_affine_xy', inertia, potential, l=1.0, s=0.5, j=0.2)
    spectrum = actions_at(spec, 6.0, {'C_x': 2.0, 'C_y': 2.5})
    # a = (s + j)/2, b = (s - j)/2
    assert math.isclose(spectrum.actions['x'], math.pi * (2.0 * math.sqrt(0.5 / 1.0) - 0.35), rel_tol=1e-8)
    assert math.isclose(spectrum.actions['y'], math.pi * (2.5 * math.sqrt(0.5 / 2.0) - 0.15), rel_tol=1e-8)
    assert spectrum.names == ('x', 'y', 'r', 'phi', 'alpha', 'beta')


def test_missing_levels_and_potentials(unit_inertia):
    """Chains validate their constants and potentials."""
    inertia = InertiaSpec(m=1.0, I=0.5, mode='affine')
    spec = separable_spec('sphere_affine_xy', inertia, l=1.0, s=0.5, j=0.2)
    with pytest.raises(BadParams):
        actions_at(spec, 6.0)
    with pytest.raises(BadParams):
        separable_spec('sphere_gyro', unit_inertia, l=1.0)
    with pytest.raises(UnsupportedForce):
        separable_spec('sphere_gyro', unit_inertia, PotentialSpec('separable_rxy', {'kappa_x': 1.0, 'kappa_y': 1.0}),
                       l=1.0, s=0.5)


def test_allow_unbounded():
    """An open internal stage yields an infinite action only when allowed."""
    inertia = InertiaSpec(m=1.0, I=0.5, mode='affine')
    potential = PotentialSpec('separable_rxy', {'kappa_x': 0.0, 'kappa_y': 2.0})
    levels = {'C_x': 2.0, 'C_y': 2.5}
    strict = separable_spec('sphere_affine_xy', inertia, potential, l=1.0, s=0.5, j=0.2)
    with pytest.raises(UnboundedMotion):
        actions_at(strict, 6.0, levels)
    loose = separable_spec('sphere_affine_xy', inertia, potential, l=1.0, s=0.5, j=0.2, allow_unbounded=True)
    spectrum = actions_at(loose, 6.0, levels)
    assert math.isinf(spectrum.actions['x'])
    assert math.isfinite(spectrum.actions['r'])
    with pytest.raises(BracketFailure):
        invert_energy(loose, {'x': 1.0, 'y': 1.0, 'r': 1.0, 'phi': TWO_PI, 'alpha': math.pi, 'beta': 0.4 * math.pi})


def test_inversion_round_trip(geodetic):
    """Inverting the actions recovers the energy and the region label."""
    spectrum = invert_energy(geodetic, {'r': TWO_PI, 'phi': 2.0 * TWO_PI, 'psi': TWO_PI})
    assert math.isclose(spectrum.energy, 4.5, rel_tol=1e-9)
    assert spectrum.region == 'i'
    assert 'completely degenerate' in spectrum.remark


def test_affine_inversion_round_trip():
    """Affine actions computed at given levels invert back to the same levels."""
    inertia = InertiaSpec(m=1.0, I=0.5, mode='affine')
    potential = PotentialSpec('separable_rxy', {'kappa_x': 1.0, 'kappa_y': 2.0})
    spec = separable_spec('sphere_affine_xy', inertia, potential, l=1.0, s=0.5, j=0.2)
    forward = actions_at(spec, 6.0, {'C_x': 2.0, 'C_y': 2.5})
    back = invert_energy(spec, forward.actions)
    assert math.isclose(back.energy, 6.0, rel_tol=1e-8)
    assert math.isclose(back.levels['C_x'], 2.0, rel_tol=1e-8)
    assert math.isclose(back.levels['C_y'], 2.5, rel_tol=1e-8)


def test_geodetic_degeneracy(geodetic):
    """The geodetic gyroscope has nu_r = nu_phi and no psi dependence."""
    spectrum = frequencies_and_degeneracy(actions_at(geodetic, 4.5))
    nu = spectrum.frequencies
    assert math.isclose(nu['r'], 3.0 / TWO_PI, rel_tol=1e-5)
    assert math.isclose(nu['phi'], nu['r'], rel_tol=1e-5)
    assert abs(nu['psi']) < 1e-4 * nu['r']
    coefficients = [rel.coefficients for rel in spectrum.relations]
    assert (1, -1, 0) in coefficients
    assert spectrum.multiplicity == 2


def test_integer_relations():
    """Relations are primitive and reduced to an independent basis."""
    basis = relation_basis(integer_relations([1.0, 2.0, math.sqrt(2.0)]))
    assert [rel.coefficients for rel in basis] == [(2, -1, 0)]
    assert integer_relations([1.0, math.sqrt(2.0)]) == []


def test_rational_closure():
    """Closure ratios map to small-denominator fractions."""
    assert rational_closure(1.0) == (1, 1)
    assert rational_closure(0.5 + 1e-9) == (1, 2)
    assert rational_closure(0.37) is None


@pytest.mark.parametrize('chart, kind, param, ratio', [
    ('sphere2', 'sphere_kepler', {'alpha': 1.0}, 1.0),
    ('sphere2', 'sphere_oscillator', {'kappa': 1.0}, 0.5),
    ('pseudosphere2', 'pseudo_kepler', {'alpha': 4.0}, 1.0),
    ('pseudosphere2', 'pseudo_oscillator', {'kappa': 4.0}, 0.5),
])
def test_bertrand_potentials_close(chart, kind, param, ratio):
    """Kepler orbits close after one turn and oscillator orbits after half a turn."""
    report = bertrand_closure(chart, PotentialSpec(kind, param), samples=3, seed=4)
    assert report.passed
    for sample in report.samples:
        assert math.isclose(sample.ratio, ratio, rel_tol=1e-7)


def test_bertrand_threshold():
    """Energies above the escape threshold are rejected."""
    with pytest.raises(UnboundedMotion):
        bertrand_closure('pseudosphere2', PotentialSpec('pseudo_oscillator', {'kappa': 4.0}), points=[(2.5, 1.0)])
    with pytest.raises(BadParams):
        bertrand_closure('torus2', PotentialSpec('sphere_kepler', {'alpha': 1.0}))


def test_trajectory_matches_quadrature(unit_inertia):
    """Period and actions measured on an integrated Kepler orbit match the quadrature."""
    potential = PotentialSpec('sphere_kepler', {'alpha': 1.0})
    spec = separable_spec('sphere_point', unit_inertia, potential, l=1.0)
    spectrum = frequencies_and_degeneracy(actions_at(spec, 0.3))
    assert spectrum.multiplicity == 1

    metric = config_metric('sphere_point', unit_inertia)
    state0 = PhaseState([0.25 * math.pi, 0.0], [math.sqrt(0.6), 1.0])
    traj = integrate(state0, metric, potential, method='rk4', dt=2e-3, steps=8000)
    assert traj.drift('E') < 1e-8
    assert math.isclose(radial_period(traj, 0), 1.0 / spectrum.frequencies['r'], rel_tol=1e-4)
    J_r = trajectory_action(traj.times, traj.q[:, 0], traj.p[:, 0])
    assert math.isclose(J_r, spectrum.actions['r'], rel_tol=1e-2)
    J_phi = trajectory_action(traj.times, traj.q[:, 1], traj.p[:, 1], cyclic=True)
    assert math.isclose(J_phi, TWO_PI, rel_tol=1e-12)
    np.testing.assert_allclose(traj.energy, 0.3, rtol=1e-8)
