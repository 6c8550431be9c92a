#!/usr/bin/env python3
"""
Tests for the exact coefficient rings
"""

import random
from fractions import Fraction

import pytest

from config import Config
from app.core.exact_algebra import (
    APoly,
    BiSeries,
    LoopMatrix,
    ZLoop,
    coefficient_split,
    commutator,
    format_scalar,
    parse_scalar,
    series_exp,
    series_log,
    series_log_derivative,
    z_split,
)
from app.core.exceptions import NonUnitError, SeriesDomainError, TruncationMismatchError

A = APoly.var()
Z = ZLoop.monomial(1)


def random_apoly(rng):
    return APoly({rng.randint(-2, 3): Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(3)})


def random_series(rng, truncation, unit=True):
    terms = {}
    for n in range(truncation + 1):
        for m in range(truncation + 1 - n):
            if rng.random() < 0.5:
                terms[(n, m)] = ZLoop({rng.randint(-2, 2): random_apoly(rng)})
    terms[(0, 0)] = ZLoop.constant(APoly.monomial(rng.randint(-1, 1), rng.choice([1, 2, -3]))) if unit else 0
    return BiSeries(truncation, terms)


def test_scalar_format():
    assert format_scalar(Fraction(3)) == "3/1"
    assert format_scalar(Fraction(-6, 4)) == "-3/2"
    assert parse_scalar("121/4") == Fraction(121, 4)
    assert parse_scalar("7") == Fraction(7)
    with pytest.raises(ValueError):
        parse_scalar("0.5")
    with pytest.raises(ValueError):
        parse_scalar("1e3")


def test_apoly_arithmetic():
    assert (A + 1) ** 2 == A * A + 2 * A + 1
    assert APoly({0: Fraction(2, 4)}) == APoly.constant(Fraction(1, 2))
    assert (A * 2).inverse() == APoly.monomial(-1, Fraction(1, 2))
    assert (A ** -2) * (A ** 2) == APoly.one()
    assert (A ** 3 + A).derivative() == 3 * A * A + 1
    assert (A + 1 - A - 1).is_zero()
    assert (A ** 3 + 4 * A).degree() == 3
    assert APoly.monomial(-2).valuation() == -2
    assert not APoly.monomial(-1).is_polynomial()
    assert str(A ** 2 - 3) == "a^2 - 3"


def test_apoly_non_unit():
    with pytest.raises(NonUnitError):
        (A + 1).inverse()


def test_zloop_split_and_involutions():
    p = ZLoop({-2: A, 0: 3, 1: A * A, 4: 1})
    positive, rest = z_split(p)
    assert positive + rest == p
    assert positive.z_exponents() == [1, 4]
    assert rest.z_exponents() == [-2, 0]
    assert p.reflect().coefficient(1) == -(A * A)
    assert p.conjugate().coefficient(2) == A
    assert p.conjugate().conjugate() == p
    assert (Z * Z.inverse()) == ZLoop.one()


def test_coefficient_split_entrywise():
    block = ((ZLoop({0: 1, 1: A}), ZLoop({-1: 2})), (ZLoop.zero(), Z))
    positive, rest = coefficient_split(block)
    assert positive[0][0] == A * Z
    assert rest[0][0] == ZLoop.one()
    assert positive[1][1] == Z
    assert rest[0][1] == ZLoop({-1: 2})


def test_series_truncation():
    q = BiSeries.q(3)
    assert (q ** 4).is_zero()
    geometric = BiSeries(3, {(k, 0): 1 for k in range(4)})
    assert (1 - q) * geometric == BiSeries.one(3)


def test_series_inverse_random():
    rng = random.Random(Config.SEED)
    for _ in range(5):
        s = random_series(rng, 4)
        assert s * s.inverse() == BiSeries.one(4)


def test_series_non_unit_inverse():
    with pytest.raises(NonUnitError):
        (BiSeries.one(2) * (A + 1)).inverse()


def test_truncation_mismatch():
    with pytest.raises(TruncationMismatchError):
        BiSeries.q(2) + BiSeries.q(3)
    with pytest.raises(TruncationMismatchError):
        LoopMatrix.identity(2, 2) @ LoopMatrix.identity(2, 3)


def test_bar_and_derivations():
    rng = random.Random(Config.SEED + 1)
    x, y = random_series(rng, 3), random_series(rng, 3)
    assert BiSeries.q(3).bar() == BiSeries.qbar(3)
    assert x.bar().bar() == x
    assert (x * y).bar() == x.bar() * y.bar()
    assert BiSeries.q(3).d1() == BiSeries.q(3)
    assert BiSeries.constant(3, A).d1() == BiSeries.constant(3, -1)
    assert (x * y).d1() == x.d1() * y + x * y.d1()
    assert (x * y).d1bar() == x.d1bar() * y + x * y.d1bar()
    assert x.d1().bar() == x.bar().d1bar()


def test_log_and_exp():
    q = BiSeries.q(4)
    one_plus_q = BiSeries.one(4) + q
    assert series_exp(series_log(one_plus_q)) == one_plus_q
    assert series_log(series_exp(q * BiSeries.qbar(4))) == q * BiSeries.qbar(4)
    with pytest.raises(SeriesDomainError):
        series_log(BiSeries.constant(4, 2))
    with pytest.raises(SeriesDomainError):
        series_exp(one_plus_q)


def test_log_derivative_with_laurent_unit():
    T = 4
    h = BiSeries.constant(T, A) + BiSeries.q(T) * BiSeries.qbar(T) * (A ** 3 + 4 * A * A + 8 * A + 8)
    lam = series_log_derivative(h, BiSeries.d1)
    assert lam * h == h.d1()
    assert lam.constant_term() == ZLoop.constant(-APoly.monomial(-1))


def test_loop_matrix_inverse_and_commutator():
    T = 3
    q, qbar = BiSeries.q(T), BiSeries.qbar(T)
    m = LoopMatrix([[1, q * Z], [qbar, 1 + q * qbar * A]], T)
    identity = LoopMatrix.identity(2, T)
    assert m @ m.inverse() == identity
    assert m.inverse() @ m == identity
    assert commutator(m, identity).is_zero()
    assert m.transpose().transpose() == m
    assert (m * 2 - m - m).is_zero()
    assert m.coefficient(1, 0)[0][1] == Z


def test_loop_matrix_apply():
    T = 2
    m = LoopMatrix([[0, 1], [1, 0]], T)
    v = [BiSeries.q(T), BiSeries.one(T)]
    assert m.apply(v) == [BiSeries.one(T), BiSeries.q(T)]


def random_zloop(rng):
    return ZLoop({rng.randint(-2, 2): random_apoly(rng) for _ in range(3)})


@pytest.mark.parametrize("seed", range(5))
def test_ring_axioms_random(seed):
    rng = random.Random(Config.SEED + 100 + seed)
    for make in (random_apoly, random_zloop, lambda r: random_series(r, 3, unit=r.random() < 0.5)):
        x, y, w = make(rng), make(rng), make(rng)
        assert (x * y) * w == x * (y * w)
        assert x * (y + w) == x * y + x * w
        assert (x + y) * w == x * w + y * w
        assert x * y == y * x


@pytest.mark.parametrize("seed", range(4))
def test_z_split_reassembles(seed):
    rng = random.Random(Config.SEED + 200 + seed)
    for _ in range(2500):
        p = ZLoop({rng.randint(-4, 4): Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(4)})
        positive, rest = z_split(p)
        assert positive + rest == p
        assert all(k > 0 for k in positive.z_exponents())
        assert all(k <= 0 for k in rest.z_exponents())


@pytest.mark.parametrize("seed", range(5))
def test_derivations_commute(seed):
    rng = random.Random(Config.SEED + 300 + seed)
    x = random_series(rng, 4, unit=False)
    assert x.d1().d1bar() == x.d1bar().d1()
