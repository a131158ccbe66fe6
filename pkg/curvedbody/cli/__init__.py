"""Scenario files, run orchestration and report emission."""

from .config import (
    DEFAULTS_PATH,
    SECTIONS,
    ScenarioSpec,
    deep_merge,
    load_defaults,
    parse_config,
    parse_text,
    validate,
)
from .main import build_parser, main
from .report import CheckRow, RunReport, emit_report, report_json, report_text
from .runner import COMMANDS, SUITES, actions, bertrand, geometry_suite, run, simulate, verify, write_csv
