#!/usr/bin/env python3
"""
Tests for the ttstar command line
"""

import csv
import io
import json

import pytest

from config import Config
from app.cli import RunConfig, build_parser, compare_golden_table, dispatch
from app.core.cache_manager import ExpansionCache
from app.core.exact_algebra import APoly
from app.core.exceptions import UsageError
from app.core.painleve import oracle_fn
from app.core.utils import load_golden_table


def run(capsys, *argv):
    code = dispatch(list(argv))
    return code, capsys.readouterr().out


def test_negative_order_is_usage_error(capsys):
    code, _ = run(capsys, 'expand-h', '--order', '-1')
    assert code == 2


def test_unknown_command_is_usage_error(capsys):
    code, _ = run(capsys, 'frobnicate')
    assert code == 2


def test_bad_tolerance_is_usage_error(capsys):
    assert run(capsys, 'oracle', '--order', '1', '--tol', 'nonsense=1')[0] == 2
    assert run(capsys, 'oracle', '--order', '1', '--tol', 'numeric=abc')[0] == 2


def test_expand_h_csv(capsys):
    code, out = run(capsys, 'expand-h', '--order', '2', '--format', 'csv')
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 11
    lines = out.splitlines()
    assert lines[0] == 'n,a_exponent,coefficient'
    assert '1,3,1/1' in lines
    assert '2,3,121/4' in lines


def test_expand_h_json_is_deterministic(capsys):
    _, first = run(capsys, 'expand-h', '--order', '2', '--format', 'json')
    _, second = run(capsys, 'expand-h', '--order', '2', '--format', 'json')
    assert first == second
    payload = json.loads(first)
    assert payload['F']['0'] == {'1': '1/1'}
    assert payload['source'] == 'birkhoff'


def test_cross_check_command(capsys):
    code, _ = run(capsys, 'cross-check', '--order', '4', '--format', 'json')
    assert code == 0


def test_cv_check_command(capsys):
    code, out = run(capsys, 'cv-check', '--order', '2', '--format', 'json')
    assert code == 0
    assert json.loads(out)['passed'] is True


def test_birkhoff_command(capsys):
    code, out = run(capsys, 'birkhoff', '--order', '3', '--json')
    assert code == 0
    payload = json.loads(out)
    assert payload['emit'] == 'BBtilde'
    assert payload['factorization_residual_terms'] == 0


def test_gamma_command(capsys):
    code, out = run(capsys, 'gamma', '--gram')
    assert code == 0
    assert json.loads(out)['gram']['rounded'] == [[1, -1], [1, 0]]


def test_sl2_check_command(capsys):
    code, out = run(capsys, 'sl2-check', '--n', '3', '--format', 'json')
    assert code == 0
    assert [row['space'] for row in json.loads(out)['spaces']] == ['P1', 'P2', 'P3']


def test_transversality_command(capsys):
    code, out = run(capsys, 'transversality', '--space', 'P3', '--format', 'json')
    assert code == 0
    assert json.loads(out)['limit']['invertible'] is True


def test_transversality_bad_space(capsys):
    assert run(capsys, 'transversality', '--space', 'Q7')[0] == 2


def test_ode_profile_bad_range(capsys):
    assert run(capsys, 'ode-profile', '--qmin', '2', '--qmax', '1')[0] == 2


@pytest.mark.slow
def test_verify_paper_table_with_blocks(capsys):
    code, out = run(capsys, 'verify-paper-table', '--bbtilde', '--format', 'json')
    assert code == 0
    payload = json.loads(out)
    assert payload['coefficients_checked'] == 55
    assert payload['passed'] is True


def test_compare_golden_table_reports_changes():
    golden = load_golden_table(Config.GOLDEN_H_TABLE)
    computed = [golden[n] for n in range(7)]
    assert compare_golden_table(computed, golden) == []
    computed[1] = computed[1] + APoly.monomial(2)
    diffs = compare_golden_table(computed, golden)
    assert diffs == [{'n': 1, 'a_exponent': 2, 'expected': '4/1', 'computed': '5/1'}]


def test_run_config_flags_override_defaults():
    args = build_parser().parse_args(['oracle', '--order', '3', '--tol', 'ode_rtol=1e-6', '--format', 'csv'])
    config = RunConfig.from_args(args)
    assert config.order == 3
    assert config.format == 'csv'
    assert config.tolerances['ode_rtol'] == 1e-6
    assert config.ode_options().rtol == 1e-6

    args = build_parser().parse_args(['oracle', '--tol', 'missing'])
    with pytest.raises(UsageError):
        RunConfig.from_args(args)


def test_ode_profile_csv_leaves_series_blank_past_switch(capsys):
    code, out = run(capsys, 'ode-profile', '--qmin', '0.1', '--qmax', '10', '--samples', '2')
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]['h_series'] != ''
    assert rows[-1]['h_series'] == ''


def test_cache_command_status_and_clear(capsys, tmp_path, monkeypatch):
    monkeypatch.setattr(Config, 'CACHE_DIR', str(tmp_path))
    ExpansionCache(str(tmp_path)).save_expansion(1, oracle_fn(1))

    code, out = run(capsys, 'cache', '--format', 'json')
    assert code == 0
    status = json.loads(out)
    assert status['status'] == 'Ready'
    assert status['orders'] == [1]

    code, out = run(capsys, 'cache', '--clear', '--format', 'json')
    assert code == 0
    status = json.loads(out)
    assert status['removed'] == 1
    assert status['status'] == 'No data'
