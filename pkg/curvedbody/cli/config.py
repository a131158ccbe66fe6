"""
Scenario configuration files.

A scenario file is YAML with named sections (manifold, body, potential,
initial, integrator, spectrum, verify, bertrand, tolerances, outputs).
The packaged ``config/defaults.yaml`` is deep-merged under the user file;
``ScenarioSpec.to_dict`` gives back only what the user wrote.
"""

import copy
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import yaml

from ..dynamics.inertia import InertiaSpec
from ..dynamics.integrators import METHODS
from ..dynamics.potentials import POTENTIAL_KINDS, PotentialSpec, potential_from_dict
from ..dynamics.scenarios import SCENARIOS, ConfigMetric, config_metric
from ..errors import CurvedBodyError, ParseError, ValidationError
from ..frames.fields import builtin_frame
from ..geometry.charts import BUILTIN_CHARTS, ManifoldChart, chart_from_name

logger = logging.getLogger(__name__)

DEFAULTS_PATH = Path(__file__).resolve().parent.parent / "config" / "defaults.yaml"

SECTIONS = ("manifold", "body", "potential", "initial", "integrator", "spectrum",
            "verify", "bertrand", "tolerances", "outputs", "seed", "threads", "margin")
BODY_MODES = ("gyroscopic", "affine", "point")
SIM_METHODS = METHODS + ("balance",)
OUTPUT_FORMATS = ("csv", "json", "text")

# (manifold, mode) -> default scenario
_DEFAULT_SCENARIO = {
    ("sphere2", "point"): "sphere_point",
    ("sphere2", "gyroscopic"): "sphere_gyro",
    ("sphere2", "affine"): "sphere_affine_xy",
    ("pseudosphere2", "point"): "pseudosphere_point",
    ("pseudosphere2", "gyroscopic"): "pseudosphere_gyro",
    ("pseudosphere2", "affine"): "pseudosphere_affine",
    ("torus2", "gyroscopic"): "torus_gyro",
    ("torus2", "affine"): "torus_affine",
    ("sphere3", "gyroscopic"): "s3_gyro",
}

_SCENARIO_MANIFOLD = {"sphere": "sphere2", "pseudosphere": "pseudosphere2", "torus": "torus2", "s3": "sphere3"}


def deep_merge(base: Dict, override: Dict) -> Dict:
    """Recursive dict merge; ``override`` wins, nested mappings merge key by key."""
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _load_yaml(text: str, source: str) -> Dict:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        problem = getattr(exc, "problem", None) or str(exc)
        if mark is not None:
            raise ParseError(f"{source}: {problem}", mark.line + 1, mark.column + 1) from exc
        raise ParseError(f"{source}: {problem}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ParseError(f"{source}: top level must be a mapping of sections", 1, 1)
    return data


def load_defaults() -> Dict:
    with open(DEFAULTS_PATH, "r", encoding="utf-8") as fh:
        return _load_yaml(fh.read(), str(DEFAULTS_PATH))


@dataclass
class ScenarioSpec:
    """
    Validated scenario.

    Attributes:
        source (Dict): Keys exactly as written in the configuration file
        settings (Dict): Defaults merged with the source
        scenario (str): Scenario name
        chart (ManifoldChart): Base chart
        inertia (InertiaSpec): Mass and internal inertia
        potential (PotentialSpec): Potential energy
        metric (Optional[ConfigMetric]): Scenario metric (None for balance runs)
        path (Optional[Path]): File the spec was read from
    """
    source: Dict
    settings: Dict
    scenario: str
    chart: ManifoldChart
    inertia: InertiaSpec
    potential: PotentialSpec
    metric: Optional[ConfigMetric] = None
    path: Optional[Path] = None
    name: str = field(default="")

    def section(self, name: str) -> Dict:
        value = self.settings.get(name)
        return value if isinstance(value, dict) else {}

    @property
    def R(self) -> float:
        return float(self.section("manifold").get("R", 1.0))

    @property
    def L(self) -> float:
        return float(self.section("manifold").get("L", 2.0))

    @property
    def seed(self) -> int:
        return int(self.settings.get("seed", 0))

    @property
    def threads(self) -> int:
        threads = int(self.settings.get("threads", 0))
        return threads if threads > 0 else (os.cpu_count() or 1)

    def to_dict(self) -> Dict:
        return copy.deepcopy(self.source)


class _Problems:
    """Collects (field, reason) pairs."""

    def __init__(self):
        self.items: List[Tuple[str, str]] = []

    def add(self, name: str, reason: str) -> None:
        self.items.append((name, reason))

    def positive(self, section: Dict, key: str, where: str) -> Optional[float]:
        if key not in section:
            return None
        value = section[key]
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
            self.add(f"{where}.{key}", "must be a number")
            return None
        if not value > 0:
            self.add(f"{where}.{key}", "must be positive")
            return None
        return float(value)


def _scenario_name(manifold: Dict, body: Dict, problems: _Problems) -> Optional[str]:
    name = manifold.get("name")
    mode = body.get("mode", "gyroscopic")
    scenario = body.get("scenario")
    if scenario is None:
        scenario = _DEFAULT_SCENARIO.get((name, mode))
        if scenario is None:
            problems.add("body.mode", f"no built-in scenario for mode {mode!r} on {name!r}; set body.scenario")
        return scenario
    if scenario not in SCENARIOS:
        problems.add("body.scenario", f"unknown scenario {scenario!r}; allowed: {', '.join(SCENARIOS)}")
        return None
    expected = _SCENARIO_MANIFOLD.get(scenario.split("_", 1)[0])
    if expected is not None and expected != name:
        problems.add("body.scenario", f"{scenario} lives on {expected}, not {name}")
    return scenario


def validate(source: Dict, defaults: Optional[Dict] = None, path: Optional[Path] = None) -> ScenarioSpec:
    """
    Merge a parsed file with the defaults and check every rule.

    Args:
        source (Dict): Parsed user file
        defaults (Optional[Dict]): Defaults; the packaged file when omitted
        path (Optional[Path]): Origin, for messages

    Returns:
        ScenarioSpec: The validated scenario

    Raises:
        ValidationError: With every problem found
    """
    problems = _Problems()
    for key in source:
        if key not in SECTIONS:
            problems.add(key, f"unknown section; allowed: {', '.join(SECTIONS)}")
    settings = deep_merge(defaults if defaults is not None else load_defaults(), source)
    for key in ("manifold", "body", "potential", "initial", "integrator", "spectrum", "outputs"):
        if not isinstance(settings.setdefault(key, {}), dict):
            problems.add(key, "must be a mapping")
            settings[key] = {}

    manifold, body = settings["manifold"], settings["body"]
    chart_name = manifold.get("name")
    if chart_name not in BUILTIN_CHARTS:
        problems.add("manifold.name", f"unknown manifold {chart_name!r}; allowed: {', '.join(BUILTIN_CHARTS)}")
    R = problems.positive(manifold, "R", "manifold")
    L = problems.positive(manifold, "L", "manifold")
    if chart_name == "torus2" and R is not None and L is not None and not L > R:
        problems.add("manifold.L", "L must exceed R")

    mode = body.get("mode", "gyroscopic")
    if mode not in BODY_MODES:
        problems.add("body.mode", f"unknown mode {mode!r}; allowed: {', '.join(BODY_MODES)}")
    m = problems.positive(body, "m", "body")
    I = problems.positive(body, "I", "body")
    if "m" not in body:
        problems.add("body.m", "is required")
    J = body.get("J")
    if J is not None and (not isinstance(J, list) or not all(isinstance(v, (int, float)) and v > 0 for v in J)):
        problems.add("body.J", "must be a list of positive diagonal entries")
        J = None
    balance = settings["integrator"].get("method") == "balance"
    scenario = None
    if chart_name in BUILTIN_CHARTS and not balance:
        scenario = _scenario_name(manifold, body, problems)

    potential = None
    pot = settings.get("potential") or {"kind": "zero"}
    kind = pot.get("kind", "zero")
    if kind not in POTENTIAL_KINDS:
        problems.add("potential.kind", f"unknown potential kind {kind!r}; allowed: {', '.join(POTENTIAL_KINDS)}")
    elif chart_name in BUILTIN_CHARTS:
        try:
            potential = potential_from_dict(pot, R or 1.0, chart_name)
        except CurvedBodyError as exc:
            problems.add("potential", str(exc))

    integrator = settings["integrator"]
    method = integrator.get("method", "implicit_midpoint")
    if method not in SIM_METHODS:
        problems.add("integrator.method", f"unknown method {method!r}; allowed: {', '.join(SIM_METHODS)}")
    problems.positive(integrator, "dt", "integrator")
    problems.positive(integrator, "tol", "integrator")
    steps = integrator.get("steps", 0)
    if not isinstance(steps, int) or steps < 0:
        problems.add("integrator.steps", "must be a non-negative integer")
    every = integrator.get("output_every", 1)
    if not isinstance(every, int) or every < 1:
        problems.add("integrator.output_every", "must be a positive integer")
    if method == "balance" and kind != "zero":
        problems.add("potential.kind", "balance runs take no scenario potential")

    formats = settings["outputs"].get("formats", list(OUTPUT_FORMATS))
    if not isinstance(formats, list) or any(f not in OUTPUT_FORMATS for f in formats):
        problems.add("outputs.formats", f"must be a list drawn from {', '.join(OUTPUT_FORMATS)}")

    inertia = chart = metric = None
    if m is not None and chart_name in BUILTIN_CHARTS and not any(p[0].startswith("manifold") for p in problems.items):
        try:
            chart = chart_from_name(chart_name, float(settings.get("margin", 1e-6)),
                                    R=R or 1.0, L=L or 2.0, n=int(manifold.get("n", 2)))
            n = 3 if scenario == "s3_gyro" else (chart.dim if scenario in (None, "generic") else 2)
            inertia_mode = "affine" if mode == "affine" else "gyroscopic"
            inertia = InertiaSpec(m=m, I=I, J=None if J is None else _diag(J), mode=inertia_mode, dim=n)
        except CurvedBodyError as exc:
            problems.add("body", str(exc))
    if inertia is not None and scenario is not None and method != "balance":
        try:
            frame = builtin_frame(chart) if scenario == "generic" else None
            metric = config_metric(scenario, inertia, R=R or 1.0, L=L or 2.0,
                                   margin=float(settings.get("margin", 1e-6)), frame=frame)
        except CurvedBodyError as exc:
            problems.add("body.scenario", str(exc))
    if metric is not None:
        _check_initial(settings.get("initial") or {}, metric, problems)

    if problems.items:
        logger.debug("configuration problems: %s", problems.items)
        raise ValidationError(problems.items)
    return ScenarioSpec(source=copy.deepcopy(source), settings=settings, scenario=scenario, chart=chart,
                        inertia=inertia, potential=potential, metric=metric, path=path,
                        name=path.stem if path else (scenario or chart_name))


def _diag(values: List[float]) -> np.ndarray:
    return np.diag(np.asarray(values, dtype=float))


def _check_initial(initial: Dict, metric: ConfigMetric, problems: _Problems) -> None:
    q = initial.get("q")
    if q is None:
        return
    if not isinstance(q, list) or len(q) != metric.dim:
        problems.add("initial.q", f"needs {metric.dim} entries {list(metric.coordinates)}")
        return
    try:
        metric.check(q)
    except CurvedBodyError as exc:
        problems.add("initial.q", f"inadmissible: {exc}")
    for key in ("p", "qdot"):
        value = initial.get(key)
        if value is not None and (not isinstance(value, list) or len(value) != metric.dim):
            problems.add(f"initial.{key}", f"needs {metric.dim} entries")
    if "p" in initial and "qdot" in initial:
        problems.add("initial", "give either p or qdot, not both")


def parse_text(text: str, source: str = "<config>", defaults: Optional[Dict] = None) -> ScenarioSpec:
    """Parse and validate configuration text."""
    return validate(_load_yaml(text, source), defaults)


def parse_config(path: Union[str, Path], defaults: Optional[Dict] = None) -> ScenarioSpec:
    """
    Read and validate a scenario file.

    Args:
        path (Union[str, Path]): YAML file
        defaults (Optional[Dict]): Override of the packaged defaults

    Returns:
        ScenarioSpec: The validated scenario

    Raises:
        ParseError: Malformed YAML, with 1-based line and column
        ValidationError: Every rule violation found
        OSError: File cannot be read
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    logger.info("reading scenario %s", path)
    return validate(_load_yaml(text, str(path)), defaults, path)
