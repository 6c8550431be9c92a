#!/usr/bin/env python3
"""
Tests for the JSON codec, golden files and the expansion cache
"""

import json
import os
from fractions import Fraction

from config import Config
from app.core.cache_manager import ExpansionCache, validate_cache_data
from app.core.exact_algebra import APoly, BiSeries, LoopMatrix, ZLoop
from app.core.utils import (
    decode_biseries,
    decode_loop_matrix,
    encode_apoly,
    encode_biseries,
    encode_zloop,
    load_golden_blocks,
    load_golden_table,
    safe_json_load,
    to_json,
    validate_golden_table,
)

A = APoly.var()


def test_apoly_encoding_is_ordered_and_exact():
    poly = A ** 2 + APoly.monomial(-1, Fraction(3, 4)) + 8
    assert encode_apoly(poly) == {"-1": "3/4", "0": "8/1", "2": "1/1"}
    assert list(encode_apoly(poly)) == ["-1", "0", "2"]
    assert encode_zloop(ZLoop({2: A, -1: 1})) == {"-1": {"0": "1/1"}, "2": {"1": "1/1"}}


def test_series_and_matrix_decode():
    T = 3
    s = BiSeries(T, {(0, 0): A, (1, 2): ZLoop({-2: Fraction(1, 3)})})
    assert decode_biseries(encode_biseries(s)) == s
    m = LoopMatrix([[s, 1], [BiSeries.q(T), 0]], T)
    assert decode_loop_matrix(json.loads(to_json(m))) == m


def test_to_json_is_deterministic():
    payload = {'F': {str(n): encode_apoly(A ** n + n) for n in range(4)}, 'x': Fraction(5, 2)}
    assert to_json(payload) == to_json(payload)
    assert '"x": "5/2"' in to_json(payload)


def test_golden_table_loads():
    table = load_golden_table(Config.GOLDEN_H_TABLE)
    assert sorted(table) == list(range(7))
    assert table[0] == A
    assert table[3].coefficient(3) == Fraction(9539, 18)
    assert table[4].coefficient(0) == Fraction(736622003, 497664)
    assert table[6].coefficient(0) == Fraction(15268380040196927, 251942400000)
    assert sum(len(p) for p in table.values()) == 55


def test_golden_blocks_load():
    blocks = load_golden_blocks(Config.GOLDEN_BBTILDE)
    assert set(blocks) == {(0, 0), (0, 1), (1, 1), (0, 2), (1, 2), (0, 3)}
    assert blocks[(0, 0)][0][1] == ZLoop({1: APoly.monomial(-1)})
    assert blocks[(1, 1)][1][0].is_zero()


def test_golden_validation_rejects_bad_data():
    assert not validate_golden_table({'F': {}})
    assert not validate_golden_table({'provenance': 'x', 'F': {'one': {}}})
    assert validate_golden_table({'provenance': 'x', 'F': {'0': {'1': '1/1'}}})


def test_safe_json_load_missing(tmp_path):
    assert safe_json_load(os.path.join(tmp_path, 'missing.json')) is None


def test_expansion_cache_round_trip(tmp_path):
    cache = ExpansionCache(str(tmp_path))
    coefficients = [A, A ** 3 + 4 * A * A + 8 * A + 8, APoly({5: 1, 0: Fraction(145, 4)})]

    assert cache.get_cache_status()['status'] == 'No data'
    assert cache.save_expansion(2, coefficients)
    assert cache.cached_orders() == [2]
    assert cache.load_expansion(1) == coefficients[:2]
    assert cache.load_expansion(2) == coefficients
    assert cache.load_expansion(3) is None

    status = cache.get_cache_status()
    assert status['status'] == 'Ready'
    assert status['max_order'] == 2

    assert cache.clear_cache() == 1
    assert cache.cached_orders() == []


def test_cache_validation():
    assert validate_cache_data({'order': 1, 'F': {'0': {}, '1': {}}})
    assert not validate_cache_data({'order': 2, 'F': {'0': {}}})
    assert not validate_cache_data([])
