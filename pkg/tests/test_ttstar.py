#!/usr/bin/env python3
"""
Tests for the metric expansion and the Cecotti-Vafa identities
"""

from dataclasses import replace

import pytest

from config import Config
from app.core.exact_algebra import APoly, BiSeries
from app.core.exceptions import PolynomialityError
from app.core.ttstar import (
    MetricSeries,
    check_cv_equations,
    curvature_identity_residual,
    cv_data,
    hermitian_matrix,
    metric_h,
    tt_star_pde_residual,
)
from app.core.utils import load_golden_table

A = APoly.var()


@pytest.fixture(scope="module")
def golden():
    return load_golden_table(Config.GOLDEN_H_TABLE)


def test_metric_matches_table_to_order_3(golden):
    metric = metric_h(3, use_cache=False)
    assert metric.source == "birkhoff"
    assert metric.coefficients == [golden[n] for n in range(4)]
    assert metric.F(1) == A ** 3 + 4 * A * A + 8 * A + 8


@pytest.mark.slow
def test_metric_matches_full_table(golden):
    metric = metric_h(6, use_cache=False)
    assert metric.coefficients == [golden[n] for n in range(7)]


def test_metric_structure():
    metric = metric_h(2, use_cache=False)
    metric.check_structure()
    assert metric.h.is_z_free()
    assert all(n == m for (n, m) in metric.h.support())


def test_structure_check_rejects_bad_coefficients():
    with pytest.raises(PolynomialityError):
        MetricSeries(order=1, h=BiSeries.zero(2), coefficients=[A, A * A]).check_structure()
    with pytest.raises(PolynomialityError):
        MetricSeries(order=0, h=BiSeries.zero(0), coefficients=[APoly.monomial(-1)]).check_structure()
    with pytest.raises(PolynomialityError):
        MetricSeries(order=0, h=BiSeries.zero(0), coefficients=[A * 2]).check_structure()


def test_negative_order_rejected():
    with pytest.raises(ValueError):
        metric_h(-1)


def test_hermitian_matrix_is_diagonal():
    order = 2
    hermitian = hermitian_matrix(order)
    h = metric_h(order, use_cache=False).h
    assert hermitian[0, 1].is_zero()
    assert hermitian[1, 0].is_zero()
    assert hermitian[0, 0] == h
    assert hermitian[1, 1] * h == BiSeries.one(h.truncation)


def test_cv_equations_hold():
    report = check_cv_equations(cv_data(3))
    assert report.passed, report.failures()
    assert 'kappa^2 = 1' in report.residuals
    assert 'tt* equation for h' in report.residuals


@pytest.mark.slow
def test_cv_equations_hold_to_order_6():
    assert check_cv_equations(cv_data(6)).passed


def test_cv_check_catches_wrong_cbar():
    data = cv_data(2)
    report = check_cv_equations(replace(data, C1bar=data.C1))
    assert not report.passed
    assert 'Cbar = kappa C kappa' in report.failures()


def test_tt_star_equation_residual():
    h = metric_h(3, use_cache=False).h
    assert tt_star_pde_residual(h).is_zero()
    wrong = h + BiSeries.monomial(h.truncation, 1, 1, 1)
    assert not tt_star_pde_residual(wrong).is_zero()


def test_curvature_identity():
    assert curvature_identity_residual(3).is_zero()


def test_metric_cache_round_trip(tmp_path, monkeypatch):
    monkeypatch.setattr(Config, 'CACHE_DIR', str(tmp_path))
    first = metric_h(1, use_cache=True)
    second = metric_h(1, use_cache=True)
    assert first.source == "birkhoff"
    assert second.source == "cache"
    assert second.coefficients == first.coefficients
    assert second.h == first.h
