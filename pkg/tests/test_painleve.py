#!/usr/bin/env python3
"""
Tests for the F_n recursion, the Painleve III profile and the total curvature
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from config import Config, TestingConfig
from app.core.exact_algebra import APoly
from app.core.exceptions import OdeDivergenceError, TailConvergenceError
from app.core.painleve import (
    DERIVED_TOTAL_CURVATURE,
    OdeOptions,
    SSeries,
    asymptotic_agreement,
    asymptotic_h,
    bessel_h,
    connection_check,
    cross_check,
    curvature_density,
    ode_h,
    ode_profile,
    oracle_fn,
    pde_residual,
    sensitivity_report,
    series_branch,
    series_h,
    solve_profile,
    tail_start,
    total_curvature,
)
from app.core.utils import load_golden_table

A = APoly.var()


def test_recursion_matches_table():
    golden = load_golden_table(Config.GOLDEN_H_TABLE)
    assert oracle_fn(4) == [golden[n] for n in range(5)]
    assert oracle_fn(0) == [A]


def test_cross_check_against_birkhoff():
    assert cross_check(3)


@pytest.mark.slow
def test_cross_check_to_order_8():
    assert cross_check(8)


def test_cross_check_detects_mismatch():
    fn = oracle_fn(2)
    assert not cross_check(2, fn[:2] + [fn[2] + 1])
    assert not cross_check(2, fn[:2])


def test_recursion_series_solves_equation():
    fn = oracle_fn(4)
    assert all(c.is_zero() for c in pde_residual(SSeries.from_list(fn)).coefficients())
    bumped = fn[:2] + [fn[2] + A] + fn[3:]
    assert not all(c.is_zero() for c in pde_residual(SSeries.from_list(bumped)).coefficients())


def test_s_series_inverse():
    h = SSeries.from_list(oracle_fn(3))
    assert h * h.inverse() == SSeries.from_list([APoly.one()], truncation=3)


def test_oracle_negative_order():
    with pytest.raises(ValueError):
        oracle_fn(-1)


@pytest.mark.parametrize("q_abs", [0.01, 0.03])
def test_ode_matches_series_near_zero(q_abs):
    assert abs(ode_h(q_abs) - series_h(q_abs)) / series_h(q_abs) < 1e-6


def test_ode_matches_asymptotics():
    agreement = asymptotic_agreement([4.0, 9.0, 16.0, 25.0])
    assert all(rel < 1e-3 for rel in agreement.values())


def test_profile_is_positive_and_finite():
    rows = ode_profile(np.geomspace(1e-3, 10, 50))
    assert len(rows) == 50
    for row in rows:
        assert all(math.isfinite(v) for v in row.values() if v is not None)
        assert row['h_ode'] > 0


def test_profile_drops_series_past_switch():
    opts = OdeOptions()
    near, far = ode_profile([0.1, 10.0], opts)
    assert abs(near['h_series'] - near['h_ode']) / near['h_ode'] < 1e-6
    assert far['h_series'] is None


def test_branches_meet():
    report = connection_check(OdeOptions.from_config(Config))
    assert report['u_relative_difference'] < 1e-4
    assert report['du_relative_difference'] < 2e-4


@pytest.mark.parametrize("far_q", [36.0, 64.0, 144.0, 400.0])
def test_tail_branch_independent_of_start(far_q):
    baseline = ode_h(1.5)
    assert abs(ode_h(1.5, replace(OdeOptions(), far_q=far_q)) - baseline) / baseline < 1e-7


def test_tail_branch_unchanged_by_far_targets():
    u_alone, _ = solve_profile([1.5])
    u_with_far, _ = solve_profile([1.5, 25.0, 400.0])
    assert abs(u_with_far[0] - u_alone[0]) / abs(u_alone[0]) < 1e-7


def test_tail_tolerance_follows_start_value():
    opts = OdeOptions()
    r_far, y, atol = tail_start(20.0, opts)
    assert r_far == max(32.0, 20.0 + opts.far_margin_r)
    assert atol == pytest.approx(opts.far_atol_scale * abs(y[0]))


@pytest.mark.parametrize("q_abs", [0.5, 0.75, Config.ODE_SWITCH_Q])
def test_series_branch_reaches_bessel_regime(q_abs):
    u, _ = series_branch([q_abs])
    u_bessel = 2 * math.log(bessel_h(q_abs) * math.sqrt(q_abs))
    assert abs(u[0] - u_bessel) / abs(u_bessel) < 2e-4


def test_switch_point_past_overlap_is_detected():
    at_default = connection_check()['u_relative_difference']
    too_far = connection_check(replace(OdeOptions(), switch_q=2.0))['u_relative_difference']
    assert too_far > 10 * at_default


def test_anchor_choice_does_not_matter():
    report = sensitivity_report(1.0)
    assert set(report) == {'anchor_order-2', 'anchor_q/2', 'rtol*10'}
    assert all(v < 1e-4 for v in report.values())


def test_non_positive_q_rejected():
    with pytest.raises(ValueError):
        asymptotic_h(-1.0)
    with pytest.raises(ValueError):
        ode_h(0.0)


def test_forward_integration_leaves_separatrix():
    with pytest.raises(OdeDivergenceError):
        solve_profile([50.0], replace(OdeOptions(), switch_q=100.0))


def test_total_curvature_rejects_window_outside_series():
    with pytest.raises(TailConvergenceError):
        total_curvature(replace(OdeOptions(), qmin=0.1))


@pytest.mark.slow
def test_total_curvature_is_minus_half_pi():
    report = total_curvature()
    assert report.relative_error < 1e-5
    assert abs(report.value - DERIVED_TOTAL_CURVATURE) < 0.01 * math.pi
    assert abs(report.ratio_to_printed - 2) < 0.02


def test_options_from_config():
    opts = OdeOptions.from_config(TestingConfig, {'ode_rtol': 1e-8, 'curvature_epsrel': 1e-6, 'numeric': 1.0})
    assert opts.rtol == 1e-8
    assert opts.epsrel == 1e-6
    assert opts.atol == TestingConfig.ODE_ATOL
    assert OdeOptions.from_config() == OdeOptions()


def test_curvature_density_sign():
    assert curvature_density(0.5, -0.2) < 0
    assert curvature_density(0.5, 0.0) == 0
