"""
Run reports and their JSON/text renderings.

JSON is written with a fixed key order and Python's shortest round-trip
float representation, so two identical runs give byte-identical files.
Wall time is kept out of the JSON unless the scenario asks for it.
"""

import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from rich.console import Console
from rich.table import Table

from ..errors import IoError

logger = logging.getLogger(__name__)

REPORT_FORMATS = ("json", "text")
STATUSES = ("pass", "fail", "partial")


@dataclass
class CheckRow:
    """
    One tolerance-checked quantity.

    Attributes:
        quantity (str): Label
        initial (float): Value at the start (nan when not a time series)
        final (float): Value at the end
        max_drift (float): Worst deviation or residual
        tolerance (Optional[float]): Bound, None for informational rows
    """
    quantity: str
    initial: float
    final: float
    max_drift: float
    tolerance: Optional[float] = None

    @property
    def passed(self) -> bool:
        return self.tolerance is None or self.max_drift <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {
            "quantity": self.quantity,
            "initial": self.initial,
            "final": self.final,
            "max_drift": self.max_drift,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass
class RunReport:
    """
    Outcome of one CLI command.

    Attributes:
        command (str): simulate, actions, verify or bertrand
        name (str): Scenario label
        seed (int): Seed used by every sampling step
        conservation (List[CheckRow]): Conservation table
        constraint_residuals (Dict[str, float]): Constraint residual maxima
        stats (Dict[str, Any]): Integrator counters
        payload (Dict[str, Any]): Command-specific results (spectrum, suites, closure)
        artifacts (List[str]): Files written
        remarks (List[str]): Free-text notes
        wall_time (float): Seconds spent
        partial (bool): Run stopped early
        failures (List[str]): Failed checks outside the conservation table
    """
    command: str
    name: str
    seed: int = 0
    conservation: List[CheckRow] = field(default_factory=list)
    constraint_residuals: Dict[str, float] = field(default_factory=dict)
    stats: Dict[str, Any] = field(default_factory=dict)
    payload: Dict[str, Any] = field(default_factory=dict)
    artifacts: List[str] = field(default_factory=list)
    remarks: List[str] = field(default_factory=list)
    wall_time: float = 0.0
    partial: bool = False
    failures: List[str] = field(default_factory=list)

    @property
    def status(self) -> str:
        if self.partial:
            return "partial"
        if self.failures or not all(row.passed for row in self.conservation):
            return "fail"
        return "pass"

    def failed_checks(self) -> List[str]:
        return [row.quantity for row in self.conservation if not row.passed] + list(self.failures)

    def to_dict(self, timing: bool = False) -> Dict[str, Any]:
        data = {
            "command": self.command,
            "name": self.name,
            "status": self.status,
            "seed": self.seed,
            "conservation": [row.to_dict() for row in self.conservation],
            "constraint_residuals": dict(sorted(self.constraint_residuals.items())),
            "stats": dict(sorted(self.stats.items())),
            "payload": self.payload,
            "failures": self.failed_checks(),
            "remarks": list(self.remarks),
            "artifacts": list(self.artifacts),
        }
        if timing:
            data["wall_time"] = self.wall_time
        return data


def _plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def report_json(report: RunReport, timing: bool = False) -> str:
    return json.dumps(_plain(report.to_dict(timing)), indent=2) + "\n"


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _table(title: str, columns: List[str], rows: List[List[Any]]) -> Table:
    table = Table(title=title)
    for name in columns:
        table.add_column(name)
    for row in rows:
        table.add_row(*(_fmt(v) for v in row))
    return table


def _payload_tables(payload: Dict[str, Any]) -> List[Table]:
    tables = []
    spectrum = payload.get("spectrum")
    if spectrum:
        rows = [[name, spectrum["actions"][name], spectrum["frequencies"].get(name, math.nan)]
                for name in spectrum["actions"]]
        tables.append(_table(f"Actions at E = {_fmt(spectrum['energy'])}", ["action", "J", "nu"], rows))
        relations = [[r["n"], r["residual"], r["label"]] for r in spectrum["relations"]]
        tables.append(_table(f"Degeneracy (multiplicity {spectrum['multiplicity']})",
                             ["k", "|k . nu|", "kind"], relations))
    for suite in payload.get("suites", []):
        rows = [[r["name"], r["residual"], r["tolerance"], r["samples"], "ok" if r["passed"] else "FAIL"]
                for r in suite["rows"]]
        tables.append(_table(f"{suite['suite']} on {suite['chart']} (seed {suite['seed']})",
                             ["row", "residual", "tolerance", "samples", "status"], rows))
    closure = payload.get("closure")
    if closure:
        rows = [[s["E"], s["l"], s["ratio"], s["fraction"] or "-", "yes" if s["closed"] else "no"]
                for s in closure["samples"]]
        tables.append(_table(f"Closure {closure['chart']} / {closure['potential']} "
                             f"({closure['closed_fraction']:.2f} closed)",
                             ["E", "l", "dphi/2pi", "p/q", "closed"], rows))
    return tables


def report_text(report: RunReport) -> str:
    """Render a report as plain text through a recording rich console."""
    console = Console(record=True, width=110, file=io.StringIO(), color_system=None)
    console.print(f"{report.command} {report.name}: status {report.status} (seed {report.seed})")
    if report.conservation:
        rows = [[r.quantity, r.initial, r.final, r.max_drift,
                 "-" if r.tolerance is None else r.tolerance, "ok" if r.passed else "FAIL"]
                for r in report.conservation]
        console.print(_table("Conservation", ["quantity", "initial", "final", "max drift", "tolerance", "status"],
                             rows))
    if report.constraint_residuals:
        console.print(_table("Constraint residuals", ["constraint", "max"],
                             [[k, v] for k, v in sorted(report.constraint_residuals.items())]))
    for table in _payload_tables(_plain(report.payload)):
        console.print(table)
    if report.stats:
        console.print(_table("Integrator", ["counter", "value"], [[k, v] for k, v in sorted(report.stats.items())]))
    for remark in report.remarks:
        console.print(f"note: {remark}")
    console.print(f"wall time {report.wall_time:.3f} s")
    return console.export_text()


def emit_report(report: RunReport, fmt: str, out_dir: Union[str, Path], timing: bool = False) -> Path:
    """
    Write a report file.

    Args:
        report (RunReport): Completed run
        fmt (str): "json" or "text"
        out_dir (Union[str, Path]): Output directory, created when missing
        timing (bool): Include wall time in the JSON

    Returns:
        Path: The file written

    Raises:
        IoError: Directory or file cannot be written
    """
    if fmt not in REPORT_FORMATS:
        raise IoError(f"unknown report format {fmt!r}; allowed: {', '.join(REPORT_FORMATS)}")
    out_dir = Path(out_dir)
    path = out_dir / ("report.json" if fmt == "json" else "report.txt")
    body = report_json(report, timing) if fmt == "json" else report_text(report)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(body)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    logger.info("wrote %s", path)
    return path
