"""Numeric Poisson brackets on the frame bundle and on SU(2), with table verification."""

from .brackets import (
    BracketReport,
    TableRow,
    bracket_matrix,
    frame_bundle_expectations,
    jacobi_residual,
    leibniz_residual,
    nested_bracket,
    numeric_bracket,
    su2_expectations,
    verify_su2,
    verify_tables,
)
from .phase import (
    SU2_FAMILIES,
    FrameBundleLayout,
    FrameBundleMomenta,
    FunctionSet,
    PhaseFunction,
    anti_dual_residual,
    frame_bundle_functions,
    frame_bundle_momenta,
    sample_frame_bundle_point,
    sample_su2_point,
    su2_functions,
    su2_momenta,
)
