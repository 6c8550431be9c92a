#!/usr/bin/env python3
"""
Tests for the Gamma-integral structure and the real involutions
"""

import random

import numpy as np
import pytest

from config import Config
from app.core.gamma_structure import (
    KClass,
    euler_characteristic,
    galois_check,
    gamma_class,
    gram_matrix,
    kappa_h_apply,
    kappa_v_apply,
    kappa_v_square_residual,
    mukai_pairing,
    pairing_V,
    psi_map,
    real_form_residual,
)

O = KClass.line_bundle(0)
PT = KClass.point()
SHEAVES = [KClass.line_bundle(n) for n in range(-5, 6)] + [PT]


def test_euler_characteristic():
    assert euler_characteristic(O) == 1
    assert euler_characteristic(KClass.line_bundle(3)) == 4
    assert euler_characteristic(KClass.line_bundle(-1)) == 0
    assert euler_characteristic(PT) == 1


def test_k_group_relations():
    assert KClass.line_bundle(1) - O == PT
    assert KClass.line_bundle(2).tensor(KClass.line_bundle(-3)) == KClass.line_bundle(-1)
    assert PT.tensor(PT) == KClass(0, 0)
    assert (2 * PT).dual() == KClass(0, -2)


def test_mukai_pairing():
    assert mukai_pairing(KClass.line_bundle(1), O) == 2
    assert mukai_pairing(O, KClass.line_bundle(1)) == 0
    assert mukai_pairing(O, PT) == -1
    assert mukai_pairing(PT, O) == 1


def test_gram_matrix_both_ways():
    gram = gram_matrix()
    assert gram['riemann_roch'] == [[1, -1], [1, 0]]
    assert gram['rounded'] == [[1, -1], [1, 0]]
    assert gram['residual'] < 1e-10
    assert gram['integrality_error'] < 1e-10
    assert abs(gram['determinant']) == 1


def test_galois_compatibility():
    for v in (O, PT, KClass.line_bundle(2), KClass.line_bundle(-1)):
        assert galois_check(v) < 1e-10


def test_kappa_v_is_an_involution_fixing_the_lattice():
    assert kappa_v_square_residual() < 1e-12
    assert real_form_residual((1.0, 3.0)) < 1e-10
    for v in (O, PT, KClass.line_bundle(5)):
        x = psi_map(v)
        assert np.allclose(kappa_v_apply(x), x, atol=1e-10)


def test_kappa_v_moves_non_real_vectors():
    x = 1j * psi_map(O)
    assert not np.allclose(kappa_v_apply(x), x)


def test_gamma_class():
    g = gamma_class(0.5)
    assert g[0] == 1
    assert g[1] == -1


def test_kappa_h_on_unit_circle():
    z = np.exp(0.7j)
    value = np.array([1 + 2j, -0.5j])
    assert np.allclose(kappa_h_apply(kappa_h_apply(value, z), z), value, atol=1e-12)
    with pytest.raises(ValueError):
        kappa_h_apply(value, 2.0)


@pytest.mark.parametrize("v1", SHEAVES, ids=str)
def test_pairing_on_images_is_mukai_pairing(v1):
    for v2 in SHEAVES:
        assert abs(pairing_V(psi_map(v1), psi_map(v2)) - mukai_pairing(v1, v2)) < 1e-10, (v1, v2)


@pytest.mark.parametrize("seed", range(5))
def test_mukai_pairing_is_bilinear(seed):
    rng = random.Random(Config.SEED + seed)
    a, b, c = (KClass(rng.randint(-4, 4), rng.randint(-6, 6)) for _ in range(3))
    k = rng.randint(-3, 3)
    assert mukai_pairing(a + b, c) == mukai_pairing(a, c) + mukai_pairing(b, c)
    assert mukai_pairing(c, a + b) == mukai_pairing(c, a) + mukai_pairing(c, b)
    assert mukai_pairing(k * a, c) == k * mukai_pairing(a, c)
    assert mukai_pairing(c, k * a) == k * mukai_pairing(c, a)

