"""
Inertial data of a structured material point.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import BadParams


@dataclass(frozen=True)
class InertiaSpec:
    """
    Mass and internal inertia.

    Scalar ``I`` expands to J = I delta for affine bodies and to
    J = (I/2) delta for gyroscopic ones, so that Tr J = I for a planar
    rotator and T_int = I |omega|^2 / 2 in three dimensions.

    Attributes:
        m (float): Translational mass
        I (Optional[float]): Isotropic internal inertia
        J (Optional[np.ndarray]): Full internal inertia J^AB
        mode (str): "affine" or "gyroscopic"
        dim (int): Internal dimension n
    """
    m: float
    I: Optional[float] = None
    J: Optional[np.ndarray] = None
    mode: str = "gyroscopic"
    dim: int = 2

    def __post_init__(self):
        if not self.m > 0.0:
            raise BadParams(f"mass must be positive, got {self.m}")
        if self.J is None:
            if self.I is None or not self.I > 0.0:
                raise BadParams(f"internal inertia I must be positive, got {self.I}")
            scale = 0.5 if self.mode == "gyroscopic" else 1.0
            object.__setattr__(self, "J", scale * float(self.I) * np.eye(self.dim))
        else:
            J = np.asarray(self.J, dtype=float)
            if J.shape != (self.dim, self.dim):
                raise BadParams(f"J must be {self.dim}x{self.dim}, got {J.shape}")
            if not np.allclose(J, J.T, rtol=0.0, atol=1e-12 * max(1.0, np.max(np.abs(J)))):
                raise BadParams("J must be symmetric")
            if np.min(np.linalg.eigvalsh(J)) <= 0.0:
                raise BadParams("J must be positive-definite")
            object.__setattr__(self, "J", J)
            if self.I is None:
                trace = float(np.trace(J))
                scale = 2.0 if self.mode == "gyroscopic" else 1.0
                object.__setattr__(self, "I", scale * trace / self.dim)

    @property
    def J_inv(self) -> np.ndarray:
        """J-tilde, the inverse of J."""
        return np.linalg.inv(self.J)

    @property
    def trace(self) -> float:
        return float(np.trace(self.J))
