"""
Run orchestration for the four commands: simulate, actions, verify, bertrand.

Every command returns a RunReport and writes its artifacts into the
output directory; ``run`` adds the report files in the requested formats.
"""

import logging
import math
import time
from dataclasses import asdict
from pathlib import Path
from typing import Callable, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from ..action_angle import (
    SEPARABLE_SCENARIOS,
    actions_at,
    bertrand_closure,
    bohr_sommerfeld_levels,
    closed_form_applies,
    frequencies_and_degeneracy,
    invert_energy,
    separable_spec,
    spherical_gyro_closed_form,
)
from ..dynamics.balance import BodyState, integrate_balance
from ..dynamics.hamiltonian import PhaseState, legendre
from ..dynamics.integrators import integrate
from ..errors import BadParams, IoError, StepIntoSingularity, UnsupportedChart
from ..geometry.charts import BUILTIN_CHARTS, chart_from_name
from ..geometry.connection import ConnectionField, constant_torsion_flat3, levi_civita_connection
from ..geometry.curvature import curvature_at, metric_compatibility_residual, scalar_curvature_at
from ..poisson import BracketReport, TableRow, verify_su2, verify_tables
from ..su2 import lie_bracket_constants, s3_metric_check
from .config import ScenarioSpec
from .report import CheckRow, RunReport, emit_report

logger = logging.getLogger(__name__)

COMMANDS = ("simulate", "actions", "verify", "bertrand")
SUITES = ("geometry", "poisson", "su2", "all")
TORSION_CHART = "flat3_torsion"

DEFAULT_TOLERANCES = {
    "energy_drift": 1e-8,
    "cyclic_drift": 1e-10,
    "invariant_drift": 1e-8,
    "constraint": 1e-9,
    "power": 1e-12,
    "curvature": 1e-8,
    "numeric_curvature": 1e-5,
    "compatibility": 1e-9,
    "antisymmetry": 1e-12,
    "closed_form": 1e-6,
    "frame_metric": 1e-9,
    "lie_bracket": 1e-6,
}


def _tolerance(spec: ScenarioSpec, key: str) -> float:
    return float(spec.section("tolerances").get(key, DEFAULT_TOLERANCES[key]))


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    """Locale-independent CSV: '.' decimals, LF line ends, 17 significant digits."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    logger.info("wrote %s", path)
    return path


def _drift_tolerance(spec: ScenarioSpec, quantity: str) -> float:
    if quantity == "E":
        return _tolerance(spec, "energy_drift")
    if quantity.startswith("p_"):
        return _tolerance(spec, "cyclic_drift")
    return _tolerance(spec, "invariant_drift")


def _initial_momenta(spec: ScenarioSpec) -> PhaseState:
    initial = spec.section("initial")
    metric = spec.metric
    if "q" not in initial:
        raise BadParams("simulate needs initial.q")
    q = np.asarray(initial["q"], dtype=float)
    if "p" in initial:
        p = np.asarray(initial["p"], dtype=float)
    elif "qdot" in initial:
        p = legendre(metric, q, initial["qdot"])
    else:
        p = np.zeros(metric.dim)
    return PhaseState(q, p, float(initial.get("t", 0.0)))


def simulate(spec: ScenarioSpec, out_dir: Union[str, Path]) -> RunReport:
    """
    Integrate a scenario and write its trajectory CSV.

    Args:
        spec (ScenarioSpec): Validated scenario
        out_dir (Union[str, Path]): Output directory

    Returns:
        RunReport: Conservation table and integrator statistics

    Raises:
        StepIntoSingularity: After the partial trajectory and report are written
    """
    integrator = spec.section("integrator")
    if integrator.get("method") == "balance":
        return _simulate_balance(spec, out_dir)
    out_dir = Path(out_dir)
    report = RunReport("simulate", spec.name, seed=spec.seed)
    state = _initial_momenta(spec)
    pending: Optional[StepIntoSingularity] = None
    try:
        traj = integrate(
            state, spec.metric, spec.potential,
            method=integrator.get("method", "implicit_midpoint"),
            dt=float(integrator.get("dt", 1e-3)),
            steps=int(integrator.get("steps", 1000)),
            output_every=int(integrator.get("output_every", 1)),
            projection=bool(integrator.get("projection", False)),
            tol=float(integrator.get("tol", 1e-12)),
        )
    except StepIntoSingularity as exc:
        traj = exc.trajectory
        pending = exc
    report.partial = traj.partial
    for row in traj.conservation:
        report.conservation.append(CheckRow(row.quantity, row.initial, row.final, row.max_drift,
                                            _drift_tolerance(spec, row.quantity)))
    report.constraint_residuals = dict(traj.constraint_residuals)
    limit = _tolerance(spec, "constraint")
    report.failures.extend(f"constraint {k}" for k, v in traj.constraint_residuals.items() if v > limit)
    report.stats = {"method": traj.method, "dt": traj.dt, "steps": traj.steps, **asdict(traj.stats)}
    report.wall_time = traj.wall_time
    if "csv" in spec.section("outputs").get("formats", ["csv"]):
        report.artifacts.append(write_csv(traj.to_frame(), out_dir / "trajectory.csv").name)
    if pending is not None:
        report.remarks.append(f"stopped at a singular locus: {pending}")
        _emit_all(report, spec, out_dir)
        raise pending
    return report


def _simulate_balance(spec: ScenarioSpec, out_dir: Union[str, Path]) -> RunReport:
    """Balance-form run on an arbitrary built-in chart."""
    out_dir = Path(out_dir)
    integrator = spec.section("integrator")
    initial = spec.section("initial")
    n = spec.chart.dim
    x = initial.get("x", initial.get("q"))
    if x is None:
        raise BadParams("balance runs need initial.x")
    state = BodyState(
        x=x,
        V=initial.get("V", np.zeros(n)),
        e=initial.get("e", np.eye(n)),
        W_hat=initial.get("W_hat", np.zeros((n, n))),
    )
    modes = spec.section("body").get("constraints", ["gyroscopic"] if spec.inertia.mode == "gyroscopic" else [])
    report = RunReport("simulate", spec.name, seed=spec.seed)
    pending = None
    start = time.perf_counter()
    try:
        traj = integrate_balance(
            state, levi_civita_connection(spec.chart), spec.inertia,
            dt=float(integrator.get("dt", 1e-3)),
            steps=int(integrator.get("steps", 1000)),
            modes=modes,
            output_every=int(integrator.get("output_every", 1)),
        )
    except StepIntoSingularity as exc:
        traj = exc.trajectory
        pending = exc
    report.wall_time = time.perf_counter() - start
    report.partial = traj.partial
    energy = traj.monitors["energy"]
    if energy:
        e0 = energy[0]
        rel = traj.drift("energy") / abs(e0) if abs(e0) > 1e-12 else traj.drift("energy")
        report.conservation.append(CheckRow("E", e0, energy[-1], rel, _tolerance(spec, "energy_drift")))
        spin = traj.monitors["spin"]
        report.conservation.append(CheckRow("|S|", spin[0], spin[-1], traj.drift("spin")))
        report.conservation.append(CheckRow("geometric power", 0.0, traj.monitors["power"][-1],
                                            traj.max_abs("power"), _tolerance(spec, "power")))
    report.constraint_residuals = {traj.mode or "none": traj.max_abs("constraint")}
    if traj.max_abs("constraint") > _tolerance(spec, "constraint"):
        report.failures.append(f"constraint {traj.mode}")
    report.stats = {"method": "balance", "dt": traj.dt, "steps": traj.steps, "mode": traj.mode or "none"}
    if "csv" in spec.section("outputs").get("formats", ["csv"]):
        report.artifacts.append(write_csv(traj.to_frame(), out_dir / "trajectory.csv").name)
    if pending is not None:
        report.remarks.append(f"stopped at a singular locus: {pending}")
        _emit_all(report, spec, out_dir)
        raise pending
    return report


def _constants(spec: ScenarioSpec) -> Dict[str, float]:
    initial = spec.section("initial")
    return {key: float(initial.get(key, 0.0)) for key in ("l", "s", "j")}


def actions(spec: ScenarioSpec, out_dir: Union[str, Path], allow_unbounded: bool = False) -> RunReport:
    """
    Action spectrum of a separable scenario.

    The state is given either by action targets (``spectrum.J``) or by the
    energy and constants of motion in ``initial`` (E, l, s, j and the
    separation constants C_x, C_y or A, C).

    Returns:
        RunReport: Spectrum payload; the closed-form residual is a checked row
            when the scenario admits the closed form
    """
    if spec.scenario not in SEPARABLE_SCENARIOS:
        raise BadParams(f"scenario {spec.scenario} has no separation chain; allowed: {', '.join(SEPARABLE_SCENARIOS)}")
    out_dir = Path(out_dir)
    section = spec.section("spectrum")
    initial = spec.section("initial")
    start = time.perf_counter()
    chain = separable_spec(spec.scenario, spec.inertia, spec.potential, R=spec.R, L=spec.L,
                           chain=section.get("chain", ""), allow_unbounded=allow_unbounded, **_constants(spec))
    targets = section.get("J")
    if targets:
        spectrum = invert_energy(chain, {k: float(v) for k, v in targets.items()})
    else:
        if "E" not in initial:
            raise BadParams("actions needs spectrum.J targets or initial.E")
        levels = {k: float(initial[k]) for k in chain.internal_levels if k in initial}
        spectrum = actions_at(chain, float(initial["E"]), levels)

    report = RunReport("actions", spec.name, seed=spec.seed)
    if all(math.isfinite(v) for v in spectrum.actions.values()):
        frequencies_and_degeneracy(spectrum, n_max=int(section.get("n_max", 8)),
                                   tolerance=float(section.get("tolerance", 1e-4)))
    else:
        report.remarks.append("open internal stage: infinite action, frequencies not defined")
    if closed_form_applies(spectrum.spec):
        params = spectrum.spec.potential.params
        closed = spherical_gyro_closed_form(
            spectrum.energy, spectrum.actions["phi"], spectrum.actions["psi"], spec.inertia.I,
            float(params.get("alpha_hat", 0.0)), float(params.get("beta_hat", 0.0)))
        J = spectrum.actions[spectrum.spec.stages[-1].name]
        report.conservation.append(CheckRow("J_theta closed form", closed.J_theta, J,
                                            abs(J - closed.J_theta) / max(abs(closed.J_theta), 1e-12),
                                            _tolerance(spec, "closed_form")))
        if spectrum.spec.potential.kind == "zero":
            levels = ", ".join(f"{e:.6g}" for e in bohr_sommerfeld_levels(spec.inertia.I, 4))
            report.remarks.append(f"Bohr-Sommerfeld levels E_0..E_4 (hbar = 1): {levels}")
    if spectrum.remark:
        report.remarks.append(spectrum.remark)
    report.payload = {"spectrum": spectrum.to_dict()}
    report.wall_time = time.perf_counter() - start

    if "csv" in spec.section("outputs").get("formats", ["csv"]):
        rows = [{"n": " ".join(str(k) for k in rel.coefficients), "residual": rel.residual, "kind": rel.label}
                for rel in spectrum.relations]
        table = pd.DataFrame(rows, columns=["n", "residual", "kind"])
        report.artifacts.append(write_csv(table, out_dir / "degeneracy.csv").name)
    return report


def _reference_curvature(chart_name: str, params: Dict[str, float], x: np.ndarray) -> float:
    R = params.get("R", 1.0)
    if chart_name == "sphere2":
        return 2.0 / R ** 2
    if chart_name == "pseudosphere2":
        return -2.0 / R ** 2
    if chart_name == "sphere3":
        return 6.0 / R ** 2
    if chart_name == "torus2":
        c = math.cos(x[0])
        return 2.0 * c / (R * (params["L"] + R * c))
    return 0.0


def geometry_suite(connection: ConnectionField, samples: int, seed: int,
                   tolerances: Optional[Dict[str, float]] = None) -> BracketReport:
    """
    Curvature constants, metric compatibility and curvature antisymmetry at random points.

    Args:
        connection (ConnectionField): Levi-Civita connection of a built-in chart
        samples (int): Number of points
        seed (int): Sampling seed
        tolerances (Optional[Dict[str, float]]): Overrides of the default bounds

    Returns:
        BracketReport: Suite "geometry" with one row per check
    """
    tol = dict(DEFAULT_TOLERANCES, **(tolerances or {}))
    chart = connection.chart
    rng = np.random.default_rng(seed)
    exact = chart.christoffel_derivative_fn is not None
    rows = [
        TableRow("scalar_curvature", tolerance=tol["curvature"] if exact else tol["numeric_curvature"]),
        TableRow("metric_compatibility", tolerance=tol["compatibility"]),
        TableRow("curvature_antisymmetry", tolerance=tol["antisymmetry"]),
    ]
    scale = 1.0 / chart.params.get("R", 1.0) ** 2
    for _ in range(samples):
        x = chart.sample_point(rng)
        expected = _reference_curvature(chart.name, chart.params, x)
        rows[0].update(abs(scalar_curvature_at(connection, x) - expected) / max(abs(expected), scale))
        rows[1].update(metric_compatibility_residual(connection, x))
        Rm = curvature_at(connection, x)
        rows[2].update(float(np.max(np.abs(Rm + Rm.transpose(0, 1, 3, 2)))))
    report = BracketReport("geometry", chart.name, seed, rows)
    logger.info("geometry suite on %s: %s", chart.name, "pass" if report.passed else "fail")
    return report


def su2_suite(R: float, samples: int, seed: int, jacobi_triples: int, threads: int,
              tolerances: Optional[Dict[str, float]] = None) -> List[BracketReport]:
    """Momentum algebra on S^3 plus the four-way metric check and the invariant-frame brackets."""
    tol = dict(DEFAULT_TOLERANCES, **(tolerances or {}))
    algebra = verify_su2(R, n_samples=samples, seed=seed, jacobi_triples=jacobi_triples, threads=threads)
    rng = np.random.default_rng(seed)
    frames = BracketReport("su2_frames", "sphere3", seed)
    for name, residual in s3_metric_check(R, samples, rng).items():
        row = TableRow(f"metric_{name}", tolerance=tol["frame_metric"])
        row.residual, row.samples = float(residual), samples
        frames.rows.append(row)
    chart = chart_from_name("sphere3", R=R)
    commuting = TableRow("left_right_commute", tolerance=tol["lie_bracket"])
    constancy = TableRow("left_structure_constancy", tolerance=tol["lie_bracket"])
    reference = lie_bracket_constants(R, chart.sample_point(rng), "left", "left")
    for _ in range(min(samples, 50)):
        x = chart.sample_point(rng)
        commuting.update(float(np.max(np.abs(lie_bracket_constants(R, x, "left", "right")))))
        constancy.update(float(np.max(np.abs(lie_bracket_constants(R, x, "left", "left") - reference))))
    frames.rows.extend([commuting, constancy])
    return [algebra, frames]


def _verify_connection(chart_name: str, spec: Optional[ScenarioSpec]) -> ConnectionField:
    if chart_name == TORSION_CHART:
        return constant_torsion_flat3()
    if chart_name not in BUILTIN_CHARTS:
        raise UnsupportedChart(f"unknown chart {chart_name!r}; allowed: {', '.join(BUILTIN_CHARTS + (TORSION_CHART,))}")
    manifold = spec.section("manifold") if spec is not None else {}
    margin = float(spec.settings.get("margin", 1e-6)) if spec is not None else 1e-6
    params = {k: manifold[k] for k in ("R", "L", "n") if k in manifold}
    return levi_civita_connection(chart_from_name(chart_name, margin, **params))


def verify(spec: Optional[ScenarioSpec], suite: str = "all", chart: Optional[str] = None,
           seed: Optional[int] = None, threads: int = 1) -> RunReport:
    """
    Run the geometry, poisson and su2 verification suites.

    Args:
        spec (Optional[ScenarioSpec]): Scenario supplying chart parameters and sample sizes
        suite (str): geometry, poisson, su2 or all
        chart (Optional[str]): Chart name, or flat3_torsion for the torsion test chart
        seed (Optional[int]): Sampling seed (overrides the scenario)
        threads (int): Worker threads

    Returns:
        RunReport: One payload entry per suite; failed rows are listed as failures
    """
    if suite not in SUITES:
        raise BadParams(f"unknown suite {suite!r}; allowed: {', '.join(SUITES)}")
    settings = spec.section("verify") if spec is not None else {}
    tolerances = spec.section("tolerances") if spec is not None else {}
    seed = seed if seed is not None else (spec.seed if spec is not None else 0)
    chart_name = chart or (spec.section("manifold").get("name") if spec is not None else "sphere2")
    samples = int(settings.get("samples", 200))
    triples = int(settings.get("jacobi_triples", 50))
    start = time.perf_counter()

    reports: List[BracketReport] = []
    if suite in ("geometry", "all") and chart_name != TORSION_CHART:
        reports.append(geometry_suite(_verify_connection(chart_name, spec), samples, seed, tolerances))
    if suite in ("poisson", "all"):
        reports.append(verify_tables(_verify_connection(chart_name, spec), n_samples=samples, seed=seed,
                                     tolerance=float(settings.get("tolerance", 1e-7)),
                                     jacobi_triples=triples,
                                     jacobi_tolerance=float(settings.get("jacobi_tolerance", 1e-6)),
                                     threads=threads))
    if suite in ("su2", "all"):
        R = spec.R if spec is not None else 1.0
        reports.extend(su2_suite(R, samples, seed, min(triples, 20), threads, tolerances))

    report = RunReport("verify", spec.name if spec is not None else chart_name, seed=seed)
    report.payload = {"suites": [r.to_dict() for r in reports]}
    for r in reports:
        report.failures.extend(f"{r.suite}:{row.name}" for row in r.rows if not row.passed)
        if r.mixed_sign:
            report.remarks.append(f"mixed P/Sigma bracket sign: {r.mixed_sign}")
    report.wall_time = time.perf_counter() - start
    return report


def bertrand(spec: ScenarioSpec, out_dir: Union[str, Path], chart: Optional[str] = None,
             seed: Optional[int] = None, threads: int = 1) -> RunReport:
    """
    Orbit-closure table of a central potential.

    Returns:
        RunReport: Closure payload; a failed verdict is listed as a failure

    Raises:
        UnboundedMotion: An explicit (E, l) pair lies above the bounded regime
    """
    out_dir = Path(out_dir)
    section = spec.section("bertrand")
    seed = seed if seed is not None else spec.seed
    points = section.get("points")
    start = time.perf_counter()
    closure = bertrand_closure(
        chart or spec.section("manifold").get("name", "sphere2"), spec.potential,
        samples=int(section.get("samples", 50)), seed=seed,
        method=section.get("method", "quadrature"), threads=threads, inertia=spec.inertia,
        points=None if points is None else [tuple(map(float, pair)) for pair in points],
    )
    report = RunReport("bertrand", spec.name, seed=seed)
    report.payload = {"closure": closure.to_dict()}
    if not closure.passed:
        report.failures.append(f"closure {closure.potential}: closed fraction {closure.closed_fraction:.2f}")
    report.wall_time = time.perf_counter() - start
    if "csv" in spec.section("outputs").get("formats", ["csv"]):
        frame = pd.DataFrame([s.to_dict() for s in closure.samples])
        report.artifacts.append(write_csv(frame, out_dir / "closure.csv").name)
    return report


def _emit_all(report: RunReport, spec: Optional[ScenarioSpec], out_dir: Path) -> List[Path]:
    outputs = spec.section("outputs") if spec is not None else {}
    formats = outputs.get("formats", ["json", "text"])
    timing = bool(outputs.get("timing", False))
    return [emit_report(report, fmt, out_dir, timing) for fmt in ("json", "text") if fmt in formats]


def run(command: str, spec: Optional[ScenarioSpec], out_dir: Union[str, Path], allow_unbounded: bool = False,
        suite: str = "all", chart: Optional[str] = None, seed: Optional[int] = None,
        threads: Optional[int] = None) -> RunReport:
    """
    Execute one command and write its artifacts and report files.

    Args:
        command (str): simulate, actions, verify or bertrand
        spec (Optional[ScenarioSpec]): Validated scenario (optional for verify)
        out_dir (Union[str, Path]): Output directory
        allow_unbounded (bool): Report infinite actions instead of failing
        suite (str): Verification suite
        chart (Optional[str]): Chart override for verify and bertrand
        seed (Optional[int]): Seed override
        threads (Optional[int]): Worker threads; the scenario setting when omitted

    Returns:
        RunReport: The report that was written
    """
    if command not in COMMANDS:
        raise BadParams(f"unknown command {command!r}; allowed: {', '.join(COMMANDS)}")
    if spec is None and command != "verify":
        raise BadParams(f"{command} needs --config")
    out_dir = Path(out_dir)
    if spec is not None and seed is not None:
        spec.settings["seed"] = int(seed)
    threads = threads or (spec.threads if spec is not None else 1)
    logger.info("%s: %s -> %s", command, spec.name if spec is not None else chart, out_dir)
    handlers: Dict[str, Callable[[], RunReport]] = {
        "simulate": lambda: simulate(spec, out_dir),
        "actions": lambda: actions(spec, out_dir, allow_unbounded),
        "verify": lambda: verify(spec, suite, chart, seed, threads),
        "bertrand": lambda: bertrand(spec, out_dir, chart, seed, threads),
    }
    report = handlers[command]()
    _emit_all(report, spec, out_dir)
    logger.info("%s finished with status %s", command, report.status)
    return report
