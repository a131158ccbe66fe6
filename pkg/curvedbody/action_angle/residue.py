"""
Closed-form actions of the spherical gyroscope.

With I = m R^2 and a potential of the solvable class
    V = (alpha_hat cos^2(r/R) + beta_hat cos(r/R)) / sin^2(r/R)
the radial action follows from a contour integral around the poles of the
integrand:

    J = pi [2 sqrt(2I(E + alpha_hat)) - sqrt((l - s)^2 + 2I(alpha_hat + beta_hat))
                                     - sqrt((l + s)^2 + 2I(alpha_hat - beta_hat))]

For the geodetic case this is 4 pi sqrt(2IE) = 2 J + |J_phi - J_psi| + |J_phi + J_psi|,
which splits the phase space into four open regions with different
degeneracy patterns. The alpha_hat term only shifts the energy.
"""

import math
from dataclasses import dataclass
from typing import List

from ..errors import OutOfRegime

REGIONS = ("i", "ii", "iii", "iv")


@dataclass(frozen=True)
class ClosedFormAction:
    """
    Result of the closed-form evaluation.

    Attributes:
        J_theta (float): Radial action
        region (str): Four-region label
        shifted_energy (float): E + alpha_hat
    """
    J_theta: float
    region: str
    shifted_energy: float


def four_region_label(J_phi: float, J_psi: float) -> str:
    """
    Region of the (J_phi, J_psi) plane.

    (i) J_phi > |J_psi|, (ii) |J_phi| < J_psi, (iii) |J_phi| < -J_psi,
    (iv) J_phi < -|J_psi|; points on the diagonals are "boundary".
    """
    if J_phi > abs(J_psi):
        return "i"
    if abs(J_phi) < J_psi:
        return "ii"
    if abs(J_phi) < -J_psi:
        return "iii"
    if J_phi < -abs(J_psi):
        return "iv"
    return "boundary"


def spherical_gyro_closed_form(
    E: float,
    J_phi: float,
    J_psi: float,
    I: float,
    alpha_hat: float = 0.0,
    beta_hat: float = 0.0,
) -> ClosedFormAction:
    """
    Radial action of the spherical gyroscope with I = m R^2.

    Args:
        E (float): Energy
        J_phi (float): 2 pi l
        J_psi (float): 2 pi s
        I (float): Internal inertia
        alpha_hat (float): cos^2 coefficient of the potential
        beta_hat (float): cos coefficient of the potential

    Returns:
        ClosedFormAction: J_theta with its region label

    Raises:
        OutOfRegime: Negative discriminant or energy below the bounded regime
    """
    l = J_phi / (2.0 * math.pi)
    s = J_psi / (2.0 * math.pi)
    outer = 2.0 * I * (E + alpha_hat)
    minus = (l - s) ** 2 + 2.0 * I * (alpha_hat + beta_hat)
    plus = (l + s) ** 2 + 2.0 * I * (alpha_hat - beta_hat)
    for name, value in (("energy", outer), ("l - s", minus), ("l + s", plus)):
        if value < 0.0:
            raise OutOfRegime(f"negative discriminant in the {name} term: {value:.6g}")
    J = math.pi * (2.0 * math.sqrt(outer) - math.sqrt(minus) - math.sqrt(plus))
    if J < -1e-12 * max(1.0, math.sqrt(outer)):
        raise OutOfRegime(f"energy {E} lies below the effective-potential minimum")
    return ClosedFormAction(max(J, 0.0), four_region_label(J_phi, J_psi), E + alpha_hat)


def closed_form_energy(J_theta: float, J_phi: float, J_psi: float, I: float) -> float:
    """
    Geodetic energy from the four-region relation.

    Region by region this reads (i) (J_theta + J_phi)^2, (ii) (J_theta + J_psi)^2,
    (iii) (J_theta - J_psi)^2, (iv) (J_theta - J_phi)^2, each over 8 pi^2 I.
    """
    total = 2.0 * J_theta + abs(J_phi - J_psi) + abs(J_phi + J_psi)
    return total * total / (32.0 * math.pi ** 2 * I)


def bohr_sommerfeld_levels(I: float, n_max: int, hbar: float = 1.0) -> List[float]:
    """E_n = n^2 hbar^2 / (2I) for n = 0..n_max."""
    return [n * n * hbar * hbar / (2.0 * I) for n in range(n_max + 1)]


def closed_form_applies(spec) -> bool:
    """True for a spherical gyroscope with I = m R^2 and a zero or cos-polynomial potential."""
    if spec.scenario != "sphere_gyro" or spec.potential.kind not in ("zero", "cos_poly"):
        return False
    return math.isclose(spec.inertia.I, spec.inertia.m * spec.R ** 2, rel_tol=1e-12)


def geodetic_remark(spec) -> str:
    if not closed_form_applies(spec) or spec.potential.kind != "zero":
        return ""
    return ("completely degenerate: E depends on J_theta + J_phi (or J_psi) only; "
            "with J = n h the levels read E_n = n^2 hbar^2 / (2I)")
