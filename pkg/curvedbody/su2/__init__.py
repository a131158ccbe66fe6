"""S^3 = SU(2) specialization: exponential maps, invariant frames and momentum flow."""

from .frames import (
    InvariantFrames,
    flat_limit_deviation,
    invariant_frames,
    levi_civita_symbol,
    lie_bracket_constants,
    s3_metric_check,
)
from .groups import (
    RotationVector,
    UnitQuaternion,
    exp_so3,
    exp_su2,
    hat,
    killing_form_so3,
    left_jacobian,
    project_su2_to_so3,
    so3_generators,
    vee,
)
from .momenta import (
    FLOW_COLUMNS,
    MomentumFlow,
    MomentumPair,
    kinetic_hamiltonian,
    kinetic_lagrangian,
    momentum_flow,
    plane_normal_angle,
    s3_legendre,
    s3_legendre_inverse,
    s3_momentum_pair,
)
