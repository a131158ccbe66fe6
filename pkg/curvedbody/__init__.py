"""
curvedbody - gyroscopic and affine bodies moving in curved manifolds.

Geometry of charts and connections, co-moving kinematics, canonical and
balance-form dynamics, Poisson-bracket verification, action-angle spectra
and the S^3 = SU(2) specialization.
"""

__version__ = '0.1.0'

from .errors import CurvedBodyError
from .log import configure_logging

__all__ = ["CurvedBodyError", "configure_logging", "__version__"]
