"""Metric, connection and curvature evaluation on built-in and custom charts."""

from .charts import (
    BUILTIN_CHARTS,
    ManifoldChart,
    chart_from_name,
    custom,
    flat,
    metric_at,
    pseudosphere2,
    sphere2,
    sphere3,
    torus2,
)
from .connection import (
    ConnectionField,
    TorsionContortion,
    constant_torsion_flat3,
    contortion_from_torsion,
    levi_civita_at,
    levi_civita_connection,
    riemann_cartan_connection,
    torsion_contortion_at,
)
from .curvature import (
    CurvatureField,
    covariant_derivative_along,
    curvature_at,
    metric_compatibility_residual,
    ricci_at,
    scalar_curvature_at,
    transport_callback,
)
