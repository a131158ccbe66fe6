"""
Phase-space layouts and the built-in phase functions.

The frame-bundle phase space is stacked as z = (x^i, e^i_A, p_i, p^A_i),
with e and its conjugate momenta stored as [i, A] arrays in row-major
order. These are Darboux coordinates; the physically relevant momenta
    P_i = p_i - Sigma^j_k Gamma^k_ji,   Sigma^i_j = e^i_A p^A_j,
    Sigma_hat^A_B = p^A_i e^i_B,        P_hat_A = P_i e^i_A
are not.

The SU(2) phase space is z = (r-bar, kappa, p, pi), with drive momenta
built from the invariant frames of S^3(0, R) and relative momenta from
the invariant frames of SO(3) in rotation-vector coordinates.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

import numpy as np

from ..errors import DimensionMismatch
from ..geometry.connection import ConnectionField
from ..su2.frames import invariant_frames
from ..su2.groups import left_jacobian


@dataclass(frozen=True)
class PhaseFunction:
    """
    Named scalar function on a phase space.

    Attributes:
        name (str): Label used in reports
        fn (Callable): z -> float
    """
    name: str
    fn: Callable[[np.ndarray], float]

    def __call__(self, z) -> float:
        return float(self.fn(np.asarray(z, dtype=float)))

    def __mul__(self, other: "PhaseFunction") -> "PhaseFunction":
        return PhaseFunction(f"({self.name})*({other.name})", lambda z: self(z) * other(z))


@dataclass(frozen=True)
class FrameBundleLayout:
    """Index bookkeeping for z = (x, e, p, p_e) over an n-dimensional chart."""
    n: int

    @property
    def q_dim(self) -> int:
        return self.n + self.n * self.n

    @property
    def size(self) -> int:
        return 2 * self.q_dim

    def unpack(self, z) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        z = np.asarray(z, dtype=float)
        if z.shape != (self.size,):
            raise DimensionMismatch(f"phase point must have shape ({self.size},), got {z.shape}")
        n, nn, q = self.n, self.n * self.n, self.q_dim
        return z[:n], z[n:q].reshape(n, n), z[q:q + n], z[q + n:].reshape(n, n)

    def pack(self, x, e, p, pe) -> np.ndarray:
        return np.concatenate([
            np.asarray(x, dtype=float), np.asarray(e, dtype=float).ravel(),
            np.asarray(p, dtype=float), np.asarray(pe, dtype=float).ravel(),
        ])


@dataclass
class FrameBundleMomenta:
    """
    Derived momenta at a phase point.

    Attributes:
        P (np.ndarray): P_i
        P_affine (np.ndarray): P^A_i stored as [i, A]
        Sigma (np.ndarray): Sigma^i_j
        Sigma_hat (np.ndarray): Sigma_hat^A_B
        P_hat (np.ndarray): P_hat_A
    """
    P: np.ndarray
    P_affine: np.ndarray
    Sigma: np.ndarray
    Sigma_hat: np.ndarray
    P_hat: np.ndarray


def frame_bundle_momenta(layout: FrameBundleLayout, connection: ConnectionField, z) -> FrameBundleMomenta:
    """Evaluate P, P^A, Sigma, Sigma_hat and P_hat at a phase point."""
    x, e, p, pe = layout.unpack(z)
    Sigma = e @ pe.T
    Gam = connection.smooth_gamma(x)
    P = p - np.einsum("kji,jk->i", Gam, Sigma)
    return FrameBundleMomenta(
        P=P,
        P_affine=pe,
        Sigma=Sigma,
        Sigma_hat=pe.T @ e,
        P_hat=P @ e,
    )


def anti_dual_residual(layout: FrameBundleLayout, connection: ConnectionField, z) -> float:
    """
    Residual of the relations between spatial and co-moving momenta.

    Sigma_hat = e^-1 Sigma e and P = e^-T P_hat must hold at every point.
    """
    _, e, _, _ = layout.unpack(z)
    mom = frame_bundle_momenta(layout, connection, z)
    e_inv = np.linalg.inv(e)
    r1 = np.max(np.abs(mom.Sigma_hat - e_inv @ mom.Sigma @ e))
    r2 = np.max(np.abs(mom.P - e_inv.T @ mom.P_hat))
    return float(max(r1, r2))


class FunctionSet:
    """
    Ordered collection of phase functions with a stacked evaluator.

    ``values`` evaluates every function at once so that a single Jacobian
    of the stack yields all pairwise brackets.
    """

    def __init__(self, names: List[str], stacked: Callable[[np.ndarray], np.ndarray], q_dim: int):
        self.names = list(names)
        self.index = {name: k for k, name in enumerate(self.names)}
        self._stacked = stacked
        self.q_dim = q_dim

    def __len__(self) -> int:
        return len(self.names)

    def values(self, z) -> np.ndarray:
        return np.asarray(self._stacked(np.asarray(z, dtype=float)), dtype=float)

    def function(self, name: str) -> PhaseFunction:
        k = self.index[name]
        return PhaseFunction(name, lambda z: self.values(z)[k])

    def functions(self) -> Dict[str, PhaseFunction]:
        return {name: self.function(name) for name in self.names}


def frame_bundle_functions(connection: ConnectionField) -> FunctionSet:
    """
    Built-in functions x, e, P, P^A, Sigma, Sigma_hat and P_hat.

    Names use zero-based indices: ``x[i]``, ``e[i,A]``, ``P[i]``,
    ``PA[A,i]``, ``Sigma[i,j]``, ``SigmaHat[A,B]``, ``PHat[A]``.
    """
    n = connection.dim
    layout = FrameBundleLayout(n)
    rng = range(n)
    names = (
        [f"x[{i}]" for i in rng]
        + [f"e[{i},{A}]" for i in rng for A in rng]
        + [f"P[{i}]" for i in rng]
        + [f"PA[{A},{i}]" for A in rng for i in rng]
        + [f"Sigma[{i},{j}]" for i in rng for j in rng]
        + [f"SigmaHat[{A},{B}]" for A in rng for B in rng]
        + [f"PHat[{A}]" for A in rng]
    )

    def stacked(z):
        x, e, _, _ = layout.unpack(z)
        mom = frame_bundle_momenta(layout, connection, z)
        return np.concatenate([
            x, e.ravel(), mom.P, mom.P_affine.T.ravel(),
            mom.Sigma.ravel(), mom.Sigma_hat.ravel(), mom.P_hat,
        ])

    return FunctionSet(names, stacked, layout.q_dim)


def sample_frame_bundle_point(connection: ConnectionField, rng: np.random.Generator,
                              spread: float = 0.3, min_det: float = 0.3) -> np.ndarray:
    """
    Random phase point away from singular loci.

    The frame is drawn from a box around the identity and redrawn until
    det e >= min_det; momenta are standard normal.
    """
    n = connection.dim
    layout = FrameBundleLayout(n)
    x = connection.chart.sample_point(rng)
    connection.chart.check_point(x)
    while True:
        e = np.eye(n) + rng.uniform(-spread, spread, size=(n, n))
        if np.linalg.det(e) >= min_det:
            break
    return layout.pack(x, e, rng.standard_normal(n), rng.standard_normal((n, n)))


SU2_Q_DIM = 6


def _su2_split(z: np.ndarray):
    return z[:3], z[3:6], z[6:9], z[9:12]


def su2_momenta(R: float, z) -> Dict[str, np.ndarray]:
    """
    Drive and relative momenta of a body on S^3(0, R).

    Returns:
        Dict[str, np.ndarray]: lS_dr, rS_dr, lS_rl, rS_rl as 3-vectors
    """
    z = np.asarray(z, dtype=float)
    if z.shape != (2 * SU2_Q_DIM,):
        raise DimensionMismatch(f"SU(2) phase point must have 12 entries, got {z.shape}")
    r, k, p, pi = _su2_split(z)
    frames = invariant_frames(R, r)
    Jl = left_jacobian(k)
    return {
        "lS_dr": frames.left.T @ p,
        "rS_dr": frames.right.T @ p,
        "lS_rl": np.linalg.solve(Jl.T, pi),
        "rS_rl": np.linalg.solve(Jl, pi),
    }


SU2_FAMILIES = ("lS_dr", "rS_dr", "lS_rl", "rS_rl")


def su2_functions(R: float) -> FunctionSet:
    """Components ``<family>[A]`` of the four SU(2) momenta and their squared norms ``|<family>|^2``."""
    names = [f"{fam}[{A}]" for fam in SU2_FAMILIES for A in range(3)]
    names += [f"|{fam}|^2" for fam in SU2_FAMILIES]

    def stacked(z):
        mom = su2_momenta(R, z)
        comps = np.concatenate([mom[fam] for fam in SU2_FAMILIES])
        norms = np.array([mom[fam] @ mom[fam] for fam in SU2_FAMILIES])
        return np.concatenate([comps, norms])

    return FunctionSet(names, stacked, SU2_Q_DIM)


def sample_su2_point(R: float, rng: np.random.Generator) -> np.ndarray:
    """Random phase point with |r| <= 0.6 pi R and |kappa| <= 2."""
    while True:
        r = rng.uniform(-0.6 * np.pi * R, 0.6 * np.pi * R, size=3) / np.sqrt(3.0)
        k = rng.uniform(-2.0, 2.0, size=3) / np.sqrt(3.0)
        if np.linalg.norm(r) > 1e-3 and np.linalg.norm(k) > 1e-3:
            break
    return np.concatenate([r, k, rng.standard_normal(3), rng.standard_normal(3)])
