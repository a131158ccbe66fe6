"""Separable Hamilton-Jacobi solver: actions, spectra, degeneracy and orbit closure."""

from .bertrand import (
    BERTRAND_KINDS,
    ClosureReport,
    ClosureSample,
    bertrand_closure,
    rational_closure,
)
from .quadrature import (
    TurningPoints,
    action_integral,
    full_period_action,
    inverse_root_integral,
    turning_points,
)
from .residue import (
    REGIONS,
    ClosedFormAction,
    bohr_sommerfeld_levels,
    closed_form_applies,
    closed_form_energy,
    four_region_label,
    spherical_gyro_closed_form,
)
from .separable import (
    CHAINS,
    SEPARABLE_SCENARIOS,
    SeparableSpec,
    SeparationStage,
    separable_spec,
)
from .spectrum import (
    ActionSpectrum,
    DegeneracyRelation,
    actions_at,
    energy_of_actions,
    frequencies,
    frequencies_and_degeneracy,
    integer_relations,
    invert_energy,
    invert_stage,
    relation_basis,
    stage_action,
    stage_minimum,
    trajectory_action,
)
