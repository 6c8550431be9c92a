import json
import logging
import os
import time
from fractions import Fraction

import numpy as np

from .exact_algebra import APoly, BiSeries, LoopMatrix, ZLoop, format_scalar, parse_scalar

logger = logging.getLogger(__name__)


def encode_apoly(p):
    """{"<a-exponent>": "p/q"} with keys in ascending exponent order"""
    return {str(k): format_scalar(c) for k, c in p.items()}


def decode_apoly(data):
    return APoly({int(k): parse_scalar(v) for k, v in data.items()})


def encode_zloop(p):
    return {str(k): encode_apoly(c) for k, c in p.items()}


def decode_zloop(data):
    return ZLoop({int(k): decode_apoly(v) for k, v in data.items()})


def encode_biseries(s):
    return {
        "truncation": s.truncation,
        "terms": [{"n": n, "m": m, "coeff": encode_zloop(c)}
                  for (n, m), c in sorted(s.items(), key=lambda kv: kv[0])],
    }


def decode_biseries(data):
    terms = {(int(t["n"]), int(t["m"])): decode_zloop(t["coeff"]) for t in data["terms"]}
    return BiSeries(int(data["truncation"]), terms)


def encode_loop_matrix(matrix):
    return {
        "dim": matrix.dim,
        "truncation": matrix.truncation,
        "entries": [[encode_biseries(x) for x in row] for row in matrix.rows],
    }


def decode_loop_matrix(data):
    rows = [[decode_biseries(x) for x in row] for row in data["entries"]]
    return LoopMatrix(rows, int(data["truncation"]))


def json_serializer(obj):
    """Custom JSON serializer for numpy types and the exact algebra types"""
    if isinstance(obj, Fraction):
        return format_scalar(obj)
    if isinstance(obj, APoly):
        return encode_apoly(obj)
    if isinstance(obj, ZLoop):
        return encode_zloop(obj)
    if isinstance(obj, BiSeries):
        return encode_biseries(obj)
    if isinstance(obj, LoopMatrix):
        return encode_loop_matrix(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    elif isinstance(obj, np.floating):
        return float(obj)
    elif isinstance(obj, np.ndarray):
        return obj.tolist()
    elif isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"Object of type {type(obj)} is not JSON serializable")


def to_json(data, **kwargs):
    """Deterministic JSON text; identical inputs give byte-identical output"""
    kwargs.setdefault('indent', 2)
    return json.dumps(data, default=json_serializer, **kwargs)


def safe_json_dump(data, file_path, **kwargs):
    """Safely dump data to JSON file with error handling"""
    try:
        ensure_directory(os.path.dirname(os.path.abspath(file_path)))
        with open(file_path, 'w') as f:
            json.dump(data, f, default=json_serializer, **kwargs)
        return True
    except Exception as e:
        logger.error(f"Error saving JSON to {file_path}: {e}")
        return False


def safe_json_load(file_path):
    """Safely load data from JSON file with error handling"""
    try:
        with open(file_path, 'r') as f:
            return json.load(f)
    except Exception as e:
        logger.error(f"Error loading JSON from {file_path}: {e}")
        return None


def timed(func, *args, **kwargs):
    """Run func and return (result, elapsed seconds)"""
    start = time.perf_counter()
    result = func(*args, **kwargs)
    elapsed = time.perf_counter() - start
    logger.debug(f"{func.__name__} finished in {elapsed:.2f}s")
    return result, elapsed


def ensure_directory(path):
    """Ensure directory exists, create if it doesn't"""
    os.makedirs(path, exist_ok=True)
    return path


def validate_golden_table(data):
    """Validate the structure of the bundled h-table file"""
    if not isinstance(data, dict):
        return False
    if 'provenance' not in data or 'F' not in data:
        return False
    if not isinstance(data['F'], dict):
        return False
    for key, poly in data['F'].items():
        if not key.isdigit() or not isinstance(poly, dict):
            return False
    return True


def load_golden_table(file_path):
    """Return {n: APoly} from the bundled golden h-table, or None if unreadable"""
    data = safe_json_load(file_path)
    if data is None or not validate_golden_table(data):
        logger.error(f"❌ Invalid golden table at {file_path}")
        return None
    return {int(n): decode_apoly(poly) for n, poly in data['F'].items()}


def load_golden_blocks(file_path):
    """Return {(n, m): 2x2 tuple of ZLoop} from the bundled B·B̃ golden file"""
    data = safe_json_load(file_path)
    if not isinstance(data, dict) or 'blocks' not in data:
        logger.error(f"❌ Invalid golden block file at {file_path}")
        return None
    blocks = {}
    for block in data['blocks']:
        entries = tuple(tuple(decode_zloop(x) for x in row) for row in block['matrix'])
        blocks[(int(block['n']), int(block['m']))] = entries
    return blocks
