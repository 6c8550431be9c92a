"""
Command-line front end for the tt* toolkit

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

import argparse
import csv
import io
import logging
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from tabulate import tabulate

from config import get_config
from app.core import birkhoff, gamma_structure, painleve, qde_p1, sl2_lefschetz, ttstar
from app.core.cache_manager import ExpansionCache
from app.core.exact_algebra import coefficient_zero, format_scalar
from app.core.exceptions import TtStarError, UsageError
from app.core.utils import (
    encode_apoly,
    encode_biseries,
    encode_loop_matrix,
    load_golden_blocks,
    load_golden_table,
    timed,
    to_json,
)

logger = logging.getLogger(__name__)

FORMATS = ('json', 'csv', 'pretty')
EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


@dataclass
class RunConfig:
    order: int = 6
    format: str = 'pretty'
    tolerances: Dict[str, float] = field(default_factory=dict)
    seed: int = 0
    log_level: str = 'INFO'
    use_cache: bool = False

    @classmethod
    def from_args(cls, args, base=None) -> "RunConfig":
        """Config defaults first, flags win"""
        base = base or get_config()
        tolerances = dict(base.tolerances())
        for item in args.tol or []:
            name, sep, value = item.partition('=')
            if not sep or name not in tolerances:
                raise UsageError(f"bad --tol {item!r}; known names: {', '.join(sorted(tolerances))}")
            try:
                tolerances[name] = float(value)
            except ValueError:
                raise UsageError(f"--tol {name} needs a number, got {value!r}")
        order = getattr(args, 'order', None)
        return cls(
            order=base.ORDER if order is None else order,
            format=args.format or base.FORMAT,
            tolerances=tolerances,
            seed=base.SEED if args.seed is None else args.seed,
            log_level=args.log_level or base.LOG_LEVEL,
            use_cache=base.USE_CACHE and not args.no_cache,
        )

    def ode_options(self) -> painleve.OdeOptions:
        return painleve.OdeOptions.from_config(get_config(), self.tolerances)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def emit(payload, fmt: str, rows: Optional[List[dict]] = None, out=None) -> None:
    """JSON prints payload; csv and pretty print rows (falling back to payload)"""
    out = out or sys.stdout
    if fmt == 'json' or rows is None:
        out.write(to_json(payload) + "\n")
        return
    if fmt == 'csv':
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=list(rows[0].keys()) if rows else [], lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        out.write(buffer.getvalue())
        return
    out.write(tabulate(rows, headers="keys", tablefmt="github") + "\n")


def _apoly_rows(coefficients) -> List[dict]:
    return [{'n': n, 'a_exponent': k, 'coefficient': format_scalar(c)}
            for n, poly in enumerate(coefficients) for k, c in poly.items()]


def _non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"order must be >= 0, got {value}")
    return value


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_jfun(args, run: RunConfig) -> int:
    fundamental = qde_p1.fundamental_matrix(run.order)
    payload = {'order': run.order, 'J0': encode_biseries(fundamental.J0), 'J1': encode_biseries(fundamental.J1)}
    if args.json:
        emit(payload, 'json')
        return EXIT_OK
    rows = []
    for name, series in (('J0', fundamental.J0), ('J1', fundamental.J1)):
        for (n, _), loop in series.items():
            for z_exp, coeff in loop.items():
                rows.append({'series': name, 'q_power': n, 'z_power': z_exp, 'coefficient': str(coeff)})
    emit(payload, run.format, rows)
    return EXIT_OK


def cmd_gamma(args, run: RunConfig) -> int:
    tol = run.tolerances['numeric']
    gram = gamma_structure.gram_matrix()
    basis = {'O': gamma_structure.KClass.line_bundle(0), 'O_pt': gamma_structure.KClass.point(),
             'O(1)': gamma_structure.KClass.line_bundle(1)}
    payload = {
        'gram': gram,
        'galois_residuals': {name: gamma_structure.galois_check(v) for name, v in basis.items()},
        'kappa_v_square_residual': gamma_structure.kappa_v_square_residual(),
        'real_form_residual': gamma_structure.real_form_residual((1.0, -2.0)),
    }
    residuals = [gram['residual'], gram['integrality_error'], payload['kappa_v_square_residual'],
                 payload['real_form_residual'], *payload['galois_residuals'].values()]
    ok = max(residuals) < tol and gram['rounded'] == [[1, -1], [1, 0]] and abs(gram['determinant']) == 1
    if args.gram or run.format == 'json':
        emit(payload, 'json')
    else:
        rows = [{'check': 'gram residual', 'value': gram['residual']},
                {'check': 'integrality', 'value': gram['integrality_error']},
                {'check': 'determinant', 'value': gram['determinant']},
                {'check': 'kappa_V^2 - 1', 'value': payload['kappa_v_square_residual']}]
        rows += [{'check': f'galois {k}', 'value': v} for k, v in payload['galois_residuals'].items()]
        emit(payload, run.format, rows)
    if not ok:
        logger.error("❌ Gamma structure checks failed")
    return EXIT_OK if ok else EXIT_FAILED


def cmd_birkhoff(args, run: RunConfig) -> int:
    factors = birkhoff.factorization(run.order)
    matrices = {
        'BBtilde': lambda: birkhoff.b_btilde(run.order),
        'S': lambda: birkhoff.s_matrix(run.order),
        'Ctilde': lambda: factors.Ctilde,
    }
    residual = birkhoff.factorization_residual(run.order)
    payload = {'order': run.order, 'emit': args.emit, 'matrix': encode_loop_matrix(matrices[args.emit]()),
               'factorization_residual_terms': residual.nonzero_terms()}
    if args.json or run.format == 'json':
        emit(payload, 'json')
    else:
        matrix = matrices[args.emit]()
        rows = []
        for (n, m), block in matrix.coefficients().items():
            rows.append({'n': n, 'm': m, **{f'{i + 1}{j + 1}': str(x) for i, row in enumerate(block)
                                             for j, x in enumerate(row)}})
        emit(payload, run.format, rows)
    return EXIT_OK if residual.is_zero() else EXIT_FAILED


def cmd_expand_h(args, run: RunConfig) -> int:
    metric = ttstar.metric_h(run.order, use_cache=run.use_cache)
    payload = {'order': run.order, 'source': metric.source,
               'F': {str(n): encode_apoly(p) for n, p in enumerate(metric.coefficients)}}
    emit(payload, run.format, _apoly_rows(metric.coefficients))
    return EXIT_OK


def cmd_cv_check(args, run: RunConfig) -> int:
    report = ttstar.check_cv_equations(ttstar.cv_data(run.order))
    rows = [{'identity': name, 'nonzero_terms': value} for name, value in report.residuals.items()]
    emit({'order': report.order, 'passed': report.passed, 'residuals': report.residuals}, run.format, rows)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_oracle(args, run: RunConfig) -> int:
    fn = painleve.oracle_fn(run.order)
    emit({'order': run.order, 'F': {str(n): encode_apoly(p) for n, p in enumerate(fn)}},
         run.format, _apoly_rows(fn))
    return EXIT_OK


def cmd_cross_check(args, run: RunConfig) -> int:
    ok = painleve.cross_check(run.order, ttstar.metric_h(run.order, use_cache=run.use_cache).coefficients)
    emit({'order': run.order, 'agree': ok}, run.format, [{'order': run.order, 'agree': ok}])
    return EXIT_OK if ok else EXIT_FAILED


def cmd_ode(args, run: RunConfig) -> int:
    if not 0 < args.qmin < args.qmax or args.samples < 2:
        raise UsageError("need 0 < qmin < qmax and samples >= 2")
    q_values = np.geomspace(args.qmin, args.qmax, args.samples)
    rows = painleve.ode_profile(list(q_values), run.ode_options())
    fmt = 'csv' if args.csv else run.format
    emit({'rows': rows}, fmt, rows)
    positive = all(row['h_ode'] > 0 for row in rows)
    return EXIT_OK if positive else EXIT_FAILED


def cmd_total_curvature(args, run: RunConfig) -> int:
    report = painleve.total_curvature(run.ode_options())
    payload = {
        'value': report.value,
        'bulk': report.bulk,
        'lower_tail': report.lower_tail,
        'upper_tail': report.upper_tail,
        'derived_value': report.derived_value,
        'printed_value': report.printed_value,
        'ratio_to_printed': report.ratio_to_printed,
        'relative_error': report.relative_error,
    }
    emit(payload, run.format, [{'quantity': k, 'value': v} for k, v in payload.items()])
    return EXIT_OK if report.relative_error < 0.01 else EXIT_FAILED


def _spaces(args) -> List[sl2_lefschetz.GradedSpace]:
    if args.n is not None:
        return [sl2_lefschetz.projective_space(n) for n in range(1, args.n + 1)]
    try:
        return [sl2_lefschetz.parse_space(args.space)]
    except ValueError as e:
        raise UsageError(str(e))


def cmd_sl2_check(args, run: RunConfig) -> int:
    rows = []
    for space in _spaces(args):
        triple = sl2_lefschetz.lefschetz_triple(space)
        filtrations = sl2_lefschetz.lefschetz_filtration_matches(space)
        exp_report = sl2_lefschetz.exp_lemma_check(space)
        rows.append({'space': space.name, 'sl2_relations': triple.is_valid(),
                     'weight_filtration_a': filtrations['raising'],
                     'weight_filtration_a_dag': filtrations['lowering'],
                     'exp_lemma': exp_report.passed})
    ok = all(all(v for k, v in row.items() if k != 'space') for row in rows)
    emit({'passed': ok, 'spaces': rows}, run.format, rows)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_transversality(args, run: RunConfig) -> int:
    space = _spaces(args)[-1]
    model_cls = sl2_lefschetz.KAPPA_MODELS[args.kappa]
    model = model_cls(args.c) if args.kappa == 'shifted' and args.c is not None else model_cls()
    report = sl2_lefschetz.transversality_rank(space, model, args.t, args.k)
    limit = sl2_lefschetz.limit_transversality(space, report.k)
    rows = [{'t': t, 'rank': report.ranks[t], 'expected': report.expected_rank,
             'intersection_dim': report.intersection_dims[t]} for t in args.t]
    emit({'space': space.name, 'k': report.k, 'model': report.model, 'rows': rows,
          't0': report.t0, 'limit': limit}, run.format, rows)
    ok = limit['invertible'] and report.full_rank[max(args.t)]
    return EXIT_OK if ok else EXIT_FAILED


def compare_golden_table(computed, golden) -> List[dict]:
    """Per-coefficient diff rows; empty when everything matches"""
    diffs = []
    for n, expected in sorted(golden.items()):
        actual = computed[n]
        for k in sorted(set(expected.exponents()) | set(actual.exponents()), reverse=True):
            if expected.coefficient(k) != actual.coefficient(k):
                diffs.append({'n': n, 'a_exponent': k, 'expected': format_scalar(expected.coefficient(k)),
                              'computed': format_scalar(actual.coefficient(k))})
    return diffs


def compare_golden_blocks(order: int, golden) -> List[dict]:
    bbt = birkhoff.b_btilde(order)
    diffs = []
    for total in range(order + 1):
        for n in range(total + 1):
            m = total - n
            expected = golden.get((n, m), coefficient_zero(2))
            actual = bbt.coefficient(n, m)
            for i in range(2):
                for j in range(2):
                    if expected[i][j] != actual[i][j]:
                        diffs.append({'n': n, 'm': m, 'entry': f'{i + 1}{j + 1}',
                                      'expected': str(expected[i][j]), 'computed': str(actual[i][j])})
    return diffs


def cmd_verify_paper_table(args, run: RunConfig) -> int:
    config = get_config()
    golden = load_golden_table(args.table or config.GOLDEN_H_TABLE)
    if golden is None:
        raise UsageError("golden h-table could not be read")
    metric = ttstar.metric_h(max(golden), use_cache=run.use_cache)
    diffs = compare_golden_table(metric.coefficients, golden)
    checked = sum(len(p) for p in golden.values())

    block_diffs = []
    if args.bbtilde:
        blocks = load_golden_blocks(config.GOLDEN_BBTILDE)
        if blocks is None:
            raise UsageError("golden B·B̃ file could not be read")
        block_diffs = compare_golden_blocks(max(n + m for n, m in blocks), blocks)

    ok = not diffs and not block_diffs
    payload = {'coefficients_checked': checked, 'mismatches': diffs, 'block_mismatches': block_diffs, 'passed': ok}
    rows = diffs + block_diffs or [{'coefficients_checked': checked, 'passed': ok}]
    emit(payload, run.format, rows)
    if ok:
        logger.info(f"✅ All {checked} golden coefficients reproduced exactly")
    else:
        logger.error(f"❌ {len(diffs) + len(block_diffs)} golden coefficients differ")
    return EXIT_OK if ok else EXIT_FAILED


def cmd_cache(args, run: RunConfig) -> int:
    cache = ExpansionCache()
    payload = {}
    if args.clear:
        payload['removed'] = cache.clear_cache()
    payload.update(cache.get_cache_status())
    payload['cache_dir'] = cache.cache_dir
    emit(payload, run.format, [payload])
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    config = get_config()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--format', choices=FORMATS, default=None, help=f"output format (default {config.FORMAT})")
    common.add_argument('--log-level', default=None, help="logging level")
    common.add_argument('--no-cache', action='store_true', help="ignore the expansion cache")
    common.add_argument('--tol', action='append', metavar='NAME=VALUE', help="override a named tolerance")
    common.add_argument('--seed', type=int, default=None, help="seed for randomized checks")

    def with_order(p, help_text="truncation order"):
        p.add_argument('--order', type=_non_negative_int, default=None, help=f"{help_text} (default {config.ORDER})")
        return p

    parser = argparse.ArgumentParser(prog='ttstar', description="tt* geometry of the projective line")
    sub = parser.add_subparsers(dest='command', required=True)

    p = with_order(sub.add_parser('jfun', parents=[common], help="J-function coefficients"))
    p.add_argument('--json', action='store_true')
    p.set_defaults(func=cmd_jfun)

    p = sub.add_parser('gamma', parents=[common], help="Gamma-integral structure checks")
    p.add_argument('--gram', action='store_true', help="print the Mukai Gram matrix as JSON")
    p.set_defaults(func=cmd_gamma)

    p = with_order(sub.add_parser('birkhoff', parents=[common], help="S and its Birkhoff factors"),
                   "total (q, qbar) truncation")
    p.add_argument('--emit', choices=('BBtilde', 'S', 'Ctilde'), default='BBtilde')
    p.add_argument('--json', action='store_true')
    p.set_defaults(func=cmd_birkhoff)

    for name, func, help_text in (('expand-h', cmd_expand_h, "metric coefficients F_n"),
                                  ('cv-check', cmd_cv_check, "tt* identities"),
                                  ('oracle', cmd_oracle, "F_n from the tt* recursion"),
                                  ('cross-check', cmd_cross_check, "recursion vs Birkhoff")):
        with_order(sub.add_parser(name, parents=[common], help=help_text)).set_defaults(func=func)

    for name in ('ode', 'ode-profile'):
        p = sub.add_parser(name, parents=[common], help="radial Painleve III profile")
        p.add_argument('--qmin', type=float, default=1e-3)
        p.add_argument('--qmax', type=float, default=10.0)
        p.add_argument('--samples', type=int, default=50)
        p.add_argument('--csv', action='store_true', default=name == 'ode-profile')
        p.set_defaults(func=cmd_ode)

    sub.add_parser('total-curvature', parents=[common],
                   help="integral of the Gauss curvature").set_defaults(func=cmd_total_curvature)

    for name, func in (('sl2-check', cmd_sl2_check), ('transversality', cmd_transversality)):
        p = sub.add_parser(name, parents=[common], help="Lefschetz linear algebra")
        p.add_argument('--space', default='P1', help="Pn or PnxPm")
        p.add_argument('--n', type=_non_negative_int, default=None, help="check P1..Pn")
        p.set_defaults(func=func)
        if name == 'transversality':
            p.add_argument('--t', type=_float_list, default=[0.1, 1.0, 10.0])
            p.add_argument('--k', type=int, default=None)
            p.add_argument('--kappa', choices=sorted(sl2_lefschetz.KAPPA_MODELS), default='sign')
            p.add_argument('--c', type=float, default=None, help="shift for the shifted model")

    p = sub.add_parser('verify-paper-table', parents=[common], help="compare F_n with the bundled table")
    p.add_argument('--table', default=None, help="alternative golden table")
    p.add_argument('--bbtilde', action='store_true', help="also compare the bundled B·B̃ blocks")
    p.set_defaults(func=cmd_verify_paper_table)

    p = sub.add_parser('cache', parents=[common], help="status of the expansion cache")
    p.add_argument('--clear', action='store_true', help="remove every cached expansion")
    p.set_defaults(func=cmd_cache)
    return parser


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        run = RunConfig.from_args(args)
        logging.getLogger().setLevel(run.log_level.upper())
        logger.debug(f"Running {args.command} with {run}")
        code, elapsed = timed(args.func, args, run)
        logger.info(f"{args.command} finished in {elapsed:.2f}s with exit code {code}")
        return code
    except UsageError as e:
        logger.error(f"❌ {e}")
        return EXIT_USAGE
    except TtStarError as e:
        logger.error(f"❌ {args.command} failed: {e}")
        return EXIT_FAILED
    except ValueError as e:
        logger.error(f"❌ {e}")
        return EXIT_USAGE
