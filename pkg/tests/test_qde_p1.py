#!/usr/bin/env python3
"""
Tests for the J-function and the fundamental solution of the quantum differential equation
"""

from fractions import Fraction

import pytest

from app.core.exact_algebra import BiSeries, LoopMatrix, ZLoop
from app.core.qde_p1 import (
    FundamentalMatrix,
    QuantumProductData,
    brute_force_j_coefficient,
    fundamental_matrix,
    grading_data,
    harmonic_number,
    j_coeffs,
    qde_residual,
    quantum_ring_relation,
    verify_unitarity,
)


def test_harmonic_numbers():
    assert harmonic_number(0) == 0
    assert harmonic_number(3) == Fraction(11, 6)


def test_j_coefficients_match_product_expansion():
    j0, j1 = j_coeffs(4)
    for k in range(5):
        c0, c1 = brute_force_j_coefficient(k)
        assert j0.coefficient(k, 0) == c0
        assert j1.coefficient(k, 0) == c1


def test_j_coefficients_first_terms():
    j0, j1 = j_coeffs(2)
    assert j0.coefficient(0, 0) == ZLoop.one()
    assert j0.coefficient(2, 0) == ZLoop.monomial(-4, Fraction(1, 4))
    assert j1.coefficient(1, 0) == ZLoop.monomial(-2, -2)
    assert j1.coefficient(2, 0) == ZLoop.monomial(-4, Fraction(-3, 4))
    assert j0.support() == [(0, 0), (1, 0), (2, 0)]


def test_negative_order_rejected():
    with pytest.raises(ValueError):
        j_coeffs(-1)


def test_unitarity_to_order_8():
    assert verify_unitarity(8).is_zero()


def test_quantum_differential_equation():
    assert qde_residual(6).is_zero()


def test_qde_detects_perturbed_solution():
    order = 4
    fundamental = fundamental_matrix(order)
    bump = LoopMatrix([[BiSeries.q(order), 0], [0, 0]], order)
    perturbed = FundamentalMatrix(order=order, Q=fundamental.Q + bump, J0=fundamental.J0, J1=fundamental.J1)
    assert not qde_residual(order, perturbed).is_zero()
    assert not verify_unitarity(order, perturbed).is_zero()


def test_quantum_ring_relation():
    assert quantum_ring_relation(3).is_zero()


def test_grading_is_anti_self_adjoint():
    data = grading_data()
    assert data.is_anti_self_adjoint()
    assert data.mu[0][0] == Fraction(-1, 2)


def test_fundamental_matrix_constant_term():
    q_matrix = fundamental_matrix(3).Q
    assert q_matrix.coefficient(0, 0) == ((ZLoop.one(), ZLoop.zero()), (ZLoop.zero(), ZLoop.one()))
    assert all(m == 0 for (_, m) in q_matrix.support())


def test_quantum_product_by_omega():
    order = 3
    product = QuantumProductData()
    omega = product.omega_matrix(order)
    assert omega @ omega == LoopMatrix.identity(2, order) * BiSeries.q(order)
    assert product.cup_matrix(order) @ product.cup_matrix(order) == LoopMatrix.zero(2, order)
