"""
Numerical Poisson brackets and verification of the bracket tables.

Brackets are taken in the Darboux coordinates of the phase space,
{f, g} = df/dq dg/dp - df/dp dg/dq, with fourth-order central
differences and step eps**(1/3) * (1 + |z|). Nested brackets (Jacobi
identity) differentiate the inner bracket with the larger eps**(1/5)
step.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..geometry.connection import ConnectionField
from ..geometry.curvature import curvature_at
from ..numdiff import FIRST_ORDER, NESTED, gradient, jacobian
from ..su2.frames import levi_civita_symbol
from .phase import (
    FrameBundleLayout,
    FunctionSet,
    PhaseFunction,
    anti_dual_residual,
    frame_bundle_functions,
    sample_frame_bundle_point,
    sample_su2_point,
    su2_functions,
)

logger = logging.getLogger(__name__)

ScalarFn = Callable[[np.ndarray], float]


def numeric_bracket(f: ScalarFn, g: ScalarFn, z, q_dim: int, exponent: float = FIRST_ORDER) -> float:
    """
    Canonical Poisson bracket of two phase functions.

    Args:
        f (Callable): z -> float
        g (Callable): z -> float
        z: Phase point (q, p) with len(q) == q_dim
        q_dim (int): Number of configuration coordinates
        exponent (float): Difference-step exponent

    Returns:
        float: {f, g} at z

    Raises:
        NumericalDifferentiationFailure: Step underflow or non-finite values
    """
    z = np.asarray(z, dtype=float)
    df = gradient(f, z, exponent, offset=True)
    dg = gradient(g, z, exponent, offset=True)
    return float(df[:q_dim] @ dg[q_dim:] - df[q_dim:] @ dg[:q_dim])


def bracket_matrix(fset: FunctionSet, z, exponent: float = FIRST_ORDER) -> np.ndarray:
    """All pairwise brackets B[a, b] = {f_a, f_b} from one Jacobian of the stack."""
    D = jacobian(fset.values, np.asarray(z, dtype=float), exponent, offset=True)
    Dq, Dp = D[:, :fset.q_dim], D[:, fset.q_dim:]
    return Dq @ Dp.T - Dp @ Dq.T


def nested_bracket(f: ScalarFn, inner: Tuple[ScalarFn, ScalarFn], z, q_dim: int) -> float:
    """{f, {g, h}} with the inner bracket differentiated once more."""
    g, h = inner
    return numeric_bracket(f, lambda y: numeric_bracket(g, h, y, q_dim), z, q_dim, NESTED)


def jacobi_residual(f: ScalarFn, g: ScalarFn, h: ScalarFn, z, q_dim: int) -> float:
    """|{f,{g,h}} + {g,{h,f}} + {h,{f,g}}|."""
    total = (
        nested_bracket(f, (g, h), z, q_dim)
        + nested_bracket(g, (h, f), z, q_dim)
        + nested_bracket(h, (f, g), z, q_dim)
    )
    return abs(total)


def leibniz_residual(f: PhaseFunction, g: PhaseFunction, h: PhaseFunction, z, q_dim: int) -> float:
    """|{f, g h} - {f, g} h - g {f, h}|."""
    lhs = numeric_bracket(f, g * h, z, q_dim)
    rhs = numeric_bracket(f, g, z, q_dim) * h(z) + g(z) * numeric_bracket(f, h, z, q_dim)
    return abs(lhs - rhs)


@dataclass
class TableRow:
    """
    Worst deviation of one bracket-table row over the samples.

    Attributes:
        name (str): Row label, e.g. "{P,P}"
        residual (float): max |numeric - expected|
        tolerance (float): Acceptance bound
        samples (int): Number of phase points checked
    """
    name: str
    residual: float = 0.0
    tolerance: float = 1e-7
    samples: int = 0

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def update(self, residual: float) -> None:
        self.residual = max(self.residual, float(residual))
        self.samples += 1


@dataclass
class BracketReport:
    """
    Outcome of a bracket-table verification.

    Attributes:
        suite (str): "frame_bundle" or "su2"
        chart (str): Chart or connection label
        seed (int): Sampling seed
        rows (List[TableRow]): Table rows in check order
        mixed_sign (Optional[Dict]): printed vs flipped residual of {P, Sigma}
    """
    suite: str
    chart: str
    seed: int
    rows: List[TableRow] = field(default_factory=list)
    mixed_sign: Optional[Dict] = None

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def row(self, name: str) -> TableRow:
        for row in self.rows:
            if row.name == name:
                return row
        raise KeyError(name)

    def to_dict(self) -> Dict:
        return {
            "suite": self.suite,
            "chart": self.chart,
            "seed": self.seed,
            "passed": self.passed,
            "rows": [
                {"name": r.name, "residual": r.residual, "tolerance": r.tolerance,
                 "samples": r.samples, "passed": r.passed}
                for r in self.rows
            ],
            "mixed_sign": self.mixed_sign,
        }


def _indices(fset: FunctionSet, pattern: str, *shape: int) -> np.ndarray:
    """Index array of functions whose names fill ``pattern`` over the index grid."""
    grid = np.indices(shape).reshape(len(shape), -1).T
    flat = [fset.index[pattern.format(*idx)] for idx in grid]
    return np.array(flat, dtype=int).reshape(shape)


def _block(B: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    return B[np.ix_(rows.ravel(), cols.ravel())].reshape(rows.shape + cols.shape)


def frame_bundle_expectations(fset: FunctionSet, B: np.ndarray, z,
                              connection: ConnectionField) -> Dict[str, Tuple[np.ndarray, np.ndarray]]:
    """
    Numeric and expected blocks of every frame-bundle table row.

    Returns:
        Dict[str, Tuple[np.ndarray, np.ndarray]]: row -> (numeric, expected)
    """
    n = connection.dim
    layout = FrameBundleLayout(n)
    x, e, _, pe = layout.unpack(z)
    I = np.eye(n)
    Gam = connection.gamma(x)
    Rm = curvature_at(connection, x)
    S = connection.torsion(x)
    e_inv = np.linalg.inv(e)

    vals = fset.values(z)
    Sigma = vals[_indices(fset, "Sigma[{},{}]", n, n)]
    Sigma_hat = vals[_indices(fset, "SigmaHat[{},{}]", n, n)]
    P_hat = vals[_indices(fset, "PHat[{}]", n)]

    X = _indices(fset, "x[{}]", n)
    E = _indices(fset, "e[{},{}]", n, n)
    P = _indices(fset, "P[{}]", n)
    PA = _indices(fset, "PA[{},{}]", n, n)
    Sg = _indices(fset, "Sigma[{},{}]", n, n)
    SH = _indices(fset, "SigmaHat[{},{}]", n, n)
    PH = _indices(fset, "PHat[{}]", n)

    R_hat = np.einsum("Li,ijmn,jK,mA,nB->LKAB", e_inv, Rm, e, e, e)
    S_hat = np.einsum("Ki,ijm,jA,mB->KAB", e_inv, S, e, e)

    zero = lambda rows, cols: np.zeros(rows.shape + cols.shape)
    return {
        "{x,x}": (_block(B, X, X), zero(X, X)),
        "{e,e}": (_block(B, E, E), zero(E, E)),
        "{x,e}": (_block(B, X, E), zero(X, E)),
        "{PA,PA}": (_block(B, PA, PA), zero(PA, PA)),
        "{PA,x}": (_block(B, PA, X), zero(PA, X)),
        # [i, A, B, j] = delta^i_j delta^B_A
        "{e,PA}": (_block(B, E, PA), np.einsum("ij,AB->iABj", I, I)),
        "{x,P}": (_block(B, X, P), I.copy()),
        "{P,P}": (_block(B, P, P), np.einsum("kl,lkij->ij", Sigma, Rm)),
        # [i, A, j] = -P^A_k Gamma^k_ji
        "{P,PA}": (_block(B, P, PA), -np.einsum("kA,kji->iAj", pe, Gam)),
        # [i, j, A] = e^k_A Gamma^j_ki
        "{P,e}": (_block(B, P, E), np.einsum("kA,jki->ijA", e, Gam)),
        "{Sigma,Sigma}": (
            _block(B, Sg, Sg),
            np.einsum("il,kj->ijkl", I, Sigma) - np.einsum("kj,il->ijkl", I, Sigma),
        ),
        # [i, k, j] = Sigma^l_j Gamma^k_li - Sigma^k_l Gamma^l_ji
        "{P,Sigma}": (
            _block(B, P, Sg),
            np.einsum("lj,kli->ikj", Sigma, Gam) - np.einsum("kl,lji->ikj", Sigma, Gam),
        ),
        "{PHat,PHat}": (
            _block(B, PH, PH),
            np.einsum("KL,LKAB->AB", Sigma_hat, R_hat) - 2.0 * np.einsum("K,KAB->AB", P_hat, S_hat),
        ),
        "{SigmaHat,PHat}": (_block(B, SH, PH), -np.einsum("B,AC->ABC", P_hat, I)),
        "{SigmaHat,SigmaHat}": (
            _block(B, SH, SH),
            np.einsum("CB,AD->ABCD", I, Sigma_hat) - np.einsum("AD,CB->ABCD", I, Sigma_hat),
        ),
        "{Sigma,SigmaHat}": (_block(B, Sg, SH), zero(Sg, SH)),
    }


def su2_expectations(fset: FunctionSet, B: np.ndarray, z, R: float) -> Dict[str, Tuple[np.ndarray, np.ndarray]]:
    """Numeric and expected blocks of the SU(2) momentum algebra."""
    eps = levi_civita_symbol()
    vals = fset.values(z)
    idx = {fam: _indices(fset, fam + "[{}]", 3) for fam in ("lS_dr", "rS_dr", "lS_rl", "rS_rl")}
    v = {fam: vals[ix] for fam, ix in idx.items()}
    zero = np.zeros((3, 3))

    def algebra(fam: str, scale: float):
        return _block(B, idx[fam], idx[fam]), scale * np.einsum("ABC,C->AB", eps, v[fam])

    rows = {
        "{lS_dr,lS_dr}": algebra("lS_dr", 2.0 / R),
        "{rS_dr,rS_dr}": algebra("rS_dr", -2.0 / R),
        "{lS_dr,rS_dr}": (_block(B, idx["lS_dr"], idx["rS_dr"]), zero),
        "{lS_rl,lS_rl}": algebra("lS_rl", 1.0),
        "{rS_rl,rS_rl}": algebra("rS_rl", -1.0),
        "{lS_rl,rS_rl}": (_block(B, idx["lS_rl"], idx["rS_rl"]), zero),
        "{lS_dr,lS_rl}": (_block(B, idx["lS_dr"], idx["lS_rl"]), zero),
        "{rS_dr,rS_rl}": (_block(B, idx["rS_dr"], idx["rS_rl"]), zero),
    }
    for fam in ("lS_dr", "lS_rl"):
        cas = np.array([fset.index[f"|{fam}|^2"]])
        rows[f"{{|{fam}|^2,{fam}}}"] = (_block(B, cas, idx[fam]), np.zeros((1, 3)))
    return rows


def _random_triples(fset: FunctionSet, count: int, rng: np.random.Generator) -> List[Tuple[str, str, str]]:
    picks = rng.choice(len(fset), size=(count, 3))
    return [tuple(fset.names[k] for k in row) for row in picks]


def _identity_rows(fset: FunctionSet, points: List[np.ndarray], triples: int, rng: np.random.Generator,
                   jacobi_tolerance: float) -> List[TableRow]:
    jac = TableRow("jacobi", tolerance=jacobi_tolerance)
    leib = TableRow("leibniz", tolerance=1e-8)
    anti = TableRow("antisymmetry", tolerance=1e-8)
    funcs = fset.functions()
    for k, (a, b, c) in enumerate(_random_triples(fset, triples, rng)):
        z = points[k % len(points)]
        f, g, h = funcs[a], funcs[b], funcs[c]
        scale = max(1.0, abs(f(z)), abs(g(z)), abs(h(z)))
        jac.update(jacobi_residual(f, g, h, z, fset.q_dim) / scale)
        leib.update(leibniz_residual(f, g, h, z, fset.q_dim) / scale ** 2)
        anti.update(abs(numeric_bracket(f, g, z, fset.q_dim) + numeric_bracket(g, f, z, fset.q_dim)))
    return [anti, leib, jac]


def _collect(rows: Dict[str, TableRow], blocks: Dict[str, Tuple[np.ndarray, np.ndarray]],
             tolerance: float, scale: float) -> None:
    for name, (numeric, expected) in blocks.items():
        row = rows.setdefault(name, TableRow(name, tolerance=tolerance))
        row.update(np.max(np.abs(numeric - expected)) / scale if numeric.size else 0.0)


def _map(fn, items, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _matched_sign(printed: float, flipped: float, tolerance: float) -> str:
    """Which sign convention of the mixed bracket the numerics agree with."""
    if printed <= tolerance:
        return "printed"
    if flipped <= tolerance:
        return "flipped"
    return "neither"


def verify_tables(
    connection: ConnectionField,
    n_samples: int = 200,
    seed: int = 0,
    tolerance: float = 1e-7,
    jacobi_triples: int = 50,
    jacobi_tolerance: float = 1e-6,
    threads: int = 1,
) -> BracketReport:
    """
    Check every frame-bundle bracket row on random phase points.

    Residuals are divided by max(1, |momenta|) at each point so the
    tolerance is relative to the sampled momentum scale. Never raises on
    a failed row; the report carries the verdict.

    Args:
        connection (ConnectionField): Chart and connection under test
        n_samples (int): Number of phase points
        seed (int): Seed of the sampling generator
        tolerance (float): Bound for the table rows
        jacobi_triples (int): Random function triples for the identity checks
        jacobi_tolerance (float): Bound for the Jacobi residual
        threads (int): Worker threads over sample points

    Returns:
        BracketReport: Rows, identity checks and the mixed-bracket sign flag
    """
    rng = np.random.default_rng(seed)
    logger.info("verifying bracket tables on %s (%d samples, seed %d)", connection.name, n_samples, seed)
    fset = frame_bundle_functions(connection)
    layout = FrameBundleLayout(connection.dim)
    points = [sample_frame_bundle_point(connection, rng) for _ in range(n_samples)]

    def evaluate(z):
        B = bracket_matrix(fset, z)
        return B, frame_bundle_expectations(fset, B, z, connection), anti_dual_residual(layout, connection, z)

    rows: Dict[str, TableRow] = {}
    printed, flipped = 0.0, 0.0
    anti_dual = TableRow("anti_dual", tolerance=1e-12)
    for z, (B, blocks, ad) in zip(points, _map(evaluate, points, threads)):
        scale = max(1.0, float(np.max(np.abs(z[layout.q_dim:]))))
        _collect(rows, blocks, tolerance, scale)
        numeric, expected = blocks["{P,Sigma}"]
        printed = max(printed, float(np.max(np.abs(numeric - expected))) / scale)
        flipped = max(flipped, float(np.max(np.abs(numeric + expected))) / scale)
        anti_dual.update(ad / scale)

    report = BracketReport("frame_bundle", connection.chart.name + "/" + connection.name, seed,
                           list(rows.values()) + [anti_dual])
    if points:
        report.rows += _identity_rows(fset, points, jacobi_triples, rng, jacobi_tolerance)
    report.mixed_sign = {
        "printed": printed,
        "flipped": flipped,
        "consistent": bool(printed <= tolerance),
        "matched": _matched_sign(printed, flipped, tolerance),
    }
    if report.mixed_sign["matched"] != "printed":
        logger.warning("mixed bracket {P, Sigma} matches %s sign (printed %.3g, flipped %.3g)",
                       report.mixed_sign["matched"], printed, flipped)
    for row in report.rows:
        if not row.passed:
            logger.warning("bracket row %s: residual %.3g above %.1g", row.name, row.residual, row.tolerance)
    return report


def verify_su2(
    R: float = 1.0,
    n_samples: int = 200,
    seed: int = 0,
    tolerance: float = 1e-7,
    jacobi_triples: int = 20,
    jacobi_tolerance: float = 1e-6,
    threads: int = 1,
) -> BracketReport:
    """
    Check the drive/relative momentum algebra of a body on S^3(0, R).

    Args:
        R (float): Radius of S^3
        n_samples (int): Number of phase points
        seed (int): Sampling seed
        tolerance (float): Bound for the table rows
        jacobi_triples (int): Random triples for the identity checks
        jacobi_tolerance (float): Bound for the Jacobi residual
        threads (int): Worker threads over sample points

    Returns:
        BracketReport: Algebra, involution and Casimir rows
    """
    rng = np.random.default_rng(seed)
    logger.info("verifying SU(2) momentum algebra (R=%s, %d samples, seed %d)", R, n_samples, seed)
    fset = su2_functions(R)
    points = [sample_su2_point(R, rng) for _ in range(n_samples)]

    def evaluate(z):
        B = bracket_matrix(fset, z)
        return su2_expectations(fset, B, z, R)

    rows: Dict[str, TableRow] = {}
    for z, blocks in zip(points, _map(evaluate, points, threads)):
        scale = max(1.0, float(np.max(np.abs(z[fset.q_dim:]))))
        _collect(rows, blocks, tolerance, scale)

    report = BracketReport("su2", f"sphere3(R={R})", seed, list(rows.values()))
    if points:
        report.rows += _identity_rows(fset, points, jacobi_triples, rng, jacobi_tolerance)
    return report
