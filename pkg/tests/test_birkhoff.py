#!/usr/bin/env python3
"""
Tests for the loop matrix S and its Birkhoff factorization
"""

import pytest

from config import Config
from app.core.birkhoff import (
    ConstantFactors,
    GaugedInvolution,
    b_btilde,
    birkhoff_factorize,
    ctilde_c_is_nonpositive,
    factorization,
    factorization_residual,
    frame_gauge_normalisation,
    frame_identity_residual,
    s_matrix,
    s_matrix_transcribed,
    verify_gamma_cancellation,
)
from app.core.exact_algebra import (
    APoly,
    BiSeries,
    LoopMatrix,
    ZLoop,
    coefficient_identity,
    coefficient_zero,
)
from app.core.exceptions import FactorizationError
from app.core.utils import load_golden_blocks


def test_gamma_cancels():
    assert verify_gamma_cancellation()


def test_constant_factors():
    factors = ConstantFactors(3)
    identity = LoopMatrix.identity(2, 3)
    assert factors.product_matches_involution()
    assert factors.B @ factors.B_inv == identity
    assert factors.C @ factors.C_inv == identity


def test_gauged_involution_squares_to_identity():
    order = 2
    k = GaugedInvolution().matrix(order)
    assert k @ k.bar() == LoopMatrix.identity(2, order)


def test_s_matrix_matches_entrywise_formula():
    assert s_matrix(4) == s_matrix_transcribed(4)


def test_s_matrix_starts_at_identity():
    assert s_matrix(3).coefficient(0, 0) == coefficient_identity(2)


@pytest.mark.parametrize("order", [1, 5, 8, 12])
def test_factorization_reproduces_s(order):
    assert factorization_residual(order).is_zero()


def test_factor_shapes():
    factors = factorization(4)
    for key, block in factors.Btilde.coefficients().items():
        exponents = [k for row in block for x in row for k in x.z_exponents()]
        if key == (0, 0):
            assert block == coefficient_identity(2)
        else:
            assert all(k >= 1 for k in exponents)
    for key, block in factors.Ctilde.coefficients().items():
        assert all(k <= 0 for row in block for x in row for k in x.z_exponents())


def test_b_btilde_normalisation():
    assert frame_gauge_normalisation(4) == {}


def test_frame_lies_in_both_subspaces():
    assert frame_identity_residual(4).is_zero()
    assert ctilde_c_is_nonpositive(4)


def test_b_btilde_golden_blocks():
    golden = load_golden_blocks(Config.GOLDEN_BBTILDE)
    bbt = b_btilde(3)
    for total in range(4):
        for n in range(total + 1):
            m = total - n
            assert bbt.coefficient(n, m) == golden.get((n, m), coefficient_zero(2)), (n, m)


def test_b_btilde_first_block_entry():
    bbt = b_btilde(1)
    assert bbt.coefficient(1, 0) == coefficient_zero(2)
    assert bbt.coefficient(0, 1)[0][1].z_exponents() == [3]


def test_factorization_needs_identity_constant_term():
    with pytest.raises(FactorizationError):
        birkhoff_factorize(LoopMatrix.identity(2, 2) * 2)


def test_factorization_of_a_product():
    # S = B0 C0 with B0 strictly positive and C0 non-positive is recovered exactly
    T = 3
    q, qbar = BiSeries.q(T), BiSeries.qbar(T)
    z = ZLoop.monomial(1)
    b0 = LoopMatrix([[1, q * z], [qbar * z * APoly.var(), 1]], T)
    c0 = LoopMatrix([[1, 0], [q * qbar * ZLoop.monomial(-1), 1 + qbar]], T)
    factors = birkhoff_factorize(b0 @ c0)
    assert factors.Btilde == b0
    assert factors.Ctilde == c0
