"""
Tests for scenario files, reports and the command-line entry point.
"""

import json
import logging
import math

import pytest
import yaml

from curvedbody.cli.config import parse_config, parse_text
from curvedbody.cli.main import EXIT_OK, EXIT_PARSE, EXIT_RUNTIME, EXIT_TOLERANCE, EXIT_VALIDATION, main
from curvedbody.cli.report import CheckRow, RunReport, report_json
from curvedbody.cli.runner import run
from curvedbody.errors import BadParams, ParseError, ValidationError
from curvedbody.log import configure_logging

GYRO = """\
manifold:
  name: sphere2
  R: 1.0
body:
  mode: gyroscopic
  m: 1.0
  I: 1.0
initial:
  q: [1.5707963267948966, 0.0, 0.0]
  p: [0.3, 1.0, 0.5]
integrator:
  method: implicit_midpoint
  dt: 0.00025
  steps: 200
  output_every: 10
"""

GEODETIC = """\
manifold:
  name: sphere2
  R: 1.0
body:
  mode: gyroscopic
  m: 1.0
  I: 1.0
initial:
  E: 4.5
  l: 2.0
  s: 1.0
"""


def test_parse_error_position(write_config):
    """A tab in the indentation is reported with its line and column."""
    path = write_config("manifold:\n\tname: sphere2\n")
    with pytest.raises(ParseError) as info:
        parse_config(path)
    assert info.value.line == 2
    assert info.value.column == 1


def test_top_level_must_be_mapping():
    """A bare list is not a scenario."""
    with pytest.raises(ParseError):
        parse_text("- sphere2\n- torus2\n")


def test_validation_collects_every_problem():
    """All rule violations are reported together."""
    text = "manifold:\n  name: torus2\n  R: 2.0\n  L: 1.5\npotential:\n  kind: yukawa\nfoo: 1\n"
    with pytest.raises(ValidationError) as info:
        parse_text(text)
    problems = dict(info.value.problems)
    assert problems['manifold.L'] == 'L must exceed R'
    assert problems['potential.kind'].startswith('unknown potential kind')
    assert problems['foo'].startswith('unknown section')


def test_initial_state_checked():
    """Initial coordinates need the scenario's dimension and one momentum form."""
    text = "initial:\n  q: [1.0, 0.0]\n"
    with pytest.raises(ValidationError) as info:
        parse_text(text)
    assert 'initial.q' in dict(info.value.problems)
    text = "initial:\n  q: [1.0, 0.0, 0.0]\n  p: [0.0, 1.0, 0.0]\n  qdot: [0.0, 1.0, 0.0]\n"
    with pytest.raises(ValidationError) as info:
        parse_text(text)
    assert ('initial', 'give either p or qdot, not both') in info.value.problems


def test_balance_takes_no_potential():
    """Balance-form runs reject a scenario potential."""
    text = "integrator:\n  method: balance\npotential:\n  kind: sphere_kepler\n  alpha: 1.0\n"
    with pytest.raises(ValidationError) as info:
        parse_text(text)
    assert ('potential.kind', 'balance runs take no scenario potential') in info.value.problems


def test_defaults_merged_but_not_echoed():
    """Defaults fill missing keys; to_dict returns only what was written."""
    spec = parse_text(GYRO)
    assert spec.scenario == 'sphere_gyro'
    assert spec.settings['tolerances']['energy_drift'] == 1e-8
    assert spec.section('integrator')['steps'] == 200
    assert spec.to_dict() == yaml.safe_load(GYRO)
    assert 'tolerances' not in spec.to_dict()


def test_report_status():
    """A failed row or an early stop changes the status."""
    report = RunReport('simulate', 'demo')
    report.conservation.append(CheckRow('E', 1.0, 1.0, 1e-12, 1e-8))
    assert report.status == 'pass'
    report.conservation.append(CheckRow('p_phi', 1.0, 1.1, 0.1, 1e-10))
    assert report.status == 'fail'
    assert report.failed_checks() == ['p_phi']
    report.partial = True
    assert report.status == 'partial'


def test_report_json_timing():
    """Wall time reaches the JSON only on request; non-finite values become strings."""
    report = RunReport('actions', 'demo', wall_time=1.25, payload={'J': math.inf})
    assert 'wall_time' not in json.loads(report_json(report))
    data = json.loads(report_json(report, timing=True))
    assert data['wall_time'] == 1.25
    assert data['payload']['J'] == 'inf'


def test_simulate_writes_artifacts(tmp_path):
    """simulate writes the trajectory and both report files."""
    spec = parse_text(GYRO)
    report = run('simulate', spec, tmp_path)
    assert report.status == 'pass'
    assert (tmp_path / 'trajectory.csv').exists()
    assert (tmp_path / 'report.txt').exists()
    data = json.loads((tmp_path / 'report.json').read_text())
    assert data['command'] == 'simulate'
    assert [row['quantity'] for row in data['conservation']][:3] == ['E', 'p_phi', 'p_psi']
    assert data['stats']['projections'] == 0
    assert data['stats']['capped'] == 0


def test_simulate_projection_reports_step_error(tmp_path):
    """An opted-in projection still reports the energy error of the raw steps."""
    spec = parse_text(GYRO + '  projection: true\n')
    run('simulate', spec, tmp_path)
    data = json.loads((tmp_path / 'report.json').read_text())
    stats = data['stats']
    assert stats['projections'] == 200
    assert stats['unprojected_drift'] > 0.0
    assert data['conservation'][0]['max_drift'] >= stats['unprojected_drift']


def test_reports_are_reproducible(tmp_path):
    """Two identical runs give byte-identical JSON reports."""
    first, second = tmp_path / 'a', tmp_path / 'b'
    run('simulate', parse_text(GYRO), first)
    run('simulate', parse_text(GYRO), second)
    assert (first / 'report.json').read_bytes() == (second / 'report.json').read_bytes()


def test_run_needs_config(tmp_path):
    """Only verify runs without a scenario."""
    with pytest.raises(BadParams):
        run('simulate', None, tmp_path)
    with pytest.raises(BadParams):
        run('plot', parse_text(GYRO), tmp_path)


def test_verify_geometry_suite(tmp_path):
    """The geometry suite reports one row per check at the configured sample size."""
    spec = parse_text("manifold:\n  name: sphere2\n  R: 2.0\nverify:\n  samples: 3\n")
    report = run('verify', spec, tmp_path, suite='geometry', seed=7)
    suites = report.payload['suites']
    assert [s['suite'] for s in suites] == ['geometry']
    rows = {row['name']: row for row in suites[0]['rows']}
    assert set(rows) == {'scalar_curvature', 'metric_compatibility', 'curvature_antisymmetry'}
    assert rows['scalar_curvature']['passed']
    assert rows['scalar_curvature']['samples'] == 3
    assert report.seed == 7
    assert (tmp_path / 'report.json').exists()


def test_main_simulate(write_config, tmp_path):
    """A clean simulation exits with 0."""
    path = write_config(GYRO)
    assert main(['simulate', '--config', str(path), '--out', str(tmp_path / 'out')]) == EXIT_OK
    assert (tmp_path / 'out' / 'trajectory.csv').exists()


def test_main_actions(write_config, tmp_path):
    """The geodetic gyroscope spectrum matches its closed form."""
    path = write_config(GEODETIC)
    out = tmp_path / 'out'
    assert main(['actions', '--config', str(path), '--out', str(out)]) == EXIT_OK
    data = json.loads((out / 'report.json').read_text())
    assert data['status'] == 'pass'
    assert data['conservation'][0]['quantity'] == 'J_theta closed form'
    assert math.isclose(data['payload']['spectrum']['actions']['r'], 2.0 * math.pi, rel_tol=1e-9)
    assert (out / 'degeneracy.csv').exists()


def test_main_exit_codes(write_config, tmp_path):
    """Parse, validation, runtime and tolerance failures map to their exit codes."""
    out = str(tmp_path / 'out')
    bad_yaml = write_config("manifold:\n\tname: sphere2\n", 'bad.yaml')
    assert main(['simulate', '--config', str(bad_yaml), '--out', out]) == EXIT_PARSE
    invalid = write_config("potential:\n  kind: yukawa\n", 'invalid.yaml')
    assert main(['simulate', '--config', str(invalid), '--out', out]) == EXIT_VALIDATION
    missing = tmp_path / 'missing.yaml'
    assert main(['simulate', '--config', str(missing), '--out', out]) == EXIT_RUNTIME
    strict = GYRO.replace('implicit_midpoint', 'rk4') + "tolerances:\n  energy_drift: 1.0e-300\n"
    assert main(['simulate', '--config', str(write_config(strict, 'strict.yaml')), '--out', out]) == EXIT_TOLERANCE


def test_logging_configuration(monkeypatch):
    """The environment sets the level and repeated setup keeps one handler."""
    monkeypatch.setenv('CURVEDBODY_LOG', 'DEBUG')
    logger = configure_logging()
    assert logger.level == logging.DEBUG
    handlers = len(logger.handlers)
    assert configure_logging('error').level == logging.ERROR
    assert len(logger.handlers) == handlers
    assert configure_logging('loud').level == logging.WARNING
