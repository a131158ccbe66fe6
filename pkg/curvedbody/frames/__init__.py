"""Frame fields, co-moving kinematics and deformation measures."""

from .deformation import (
    Decompositions,
    DeformationTensors,
    deformation_tensors,
    invariants_from_polar,
    polar_and_two_polar,
)
from .fields import (
    FrameField,
    TeleparallelObjects,
    aholonomic_connection,
    builtin_frame,
    gram_schmidt_frame,
    sphere3_coframe,
    sphere3_legs,
    teleparallel_objects,
)
from .kinematics import (
    CoMovingVelocity,
    InternalConfiguration,
    comoving_velocity,
    deformation_free_residual,
    rotation2,
)
