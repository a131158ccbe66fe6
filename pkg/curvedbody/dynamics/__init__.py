"""Configuration metrics, Hamiltonian flow, balance form and trajectory integration."""

from .balance import (
    MODES,
    BalanceRates,
    BalanceTrajectory,
    BodyState,
    GeometricForce,
    affine_spin,
    balance_rhs,
    body_energy,
    constraint_project,
    constraint_residual,
    force_power,
    geometric_force,
    integrate_balance,
    internal_acceleration,
    kinematical_momenta,
    resolve_modes,
    spin_magnitude,
)
from .hamiltonian import (
    PhaseState,
    characteristic_time,
    comoving_kinetic,
    comoving_kinetic_of,
    effective_cyclic,
    eom_rhs,
    hamiltonian,
    kinetic_energy,
    kinetic_gradient,
    legendre,
    legendre_inverse,
    polar_kinetic,
    potential_energy,
    potential_gradient,
    two_polar_kinetic,
    vector_field,
)
from .inertia import InertiaSpec
from .integrators import (
    METHODS,
    StepStats,
    ConservationRow,
    Trajectory,
    TrajectoryPoint,
    implicit_midpoint_step,
    integrate,
    radial_period,
    rk4_step,
)
from .potentials import POTENTIAL_KINDS, PotentialSpec, potential_from_dict
from .scenarios import (
    SCENARIOS,
    BodyKinematics,
    ConfigMetric,
    config_metric,
    generic_metric,
    symmetric_top_energy,
    two_polar_phi,
)
