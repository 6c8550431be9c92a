"""
Independent checks on the metric: the recursion for F_n from the tt* equation,
the radial Painleve III equation, its decaying asymptotics and the total curvature.

On functions of s = q qbar and a, both d1 and d1bar act as D = s d/ds - d/da,
so the tt* equation for h = sum F_n s^n reads

    D(D h / h) = -h^-2 + s h^2.

With x = log|q|, r = 4|q|^{1/2} and u = 2 log h + x the same equation becomes

    u'' + u'/r = 4 sinh u,          h = e^{u/2} |q|^{-1/2}.

The solution is the separatrix between solutions blowing up at finite r, so
forward integration loses accuracy like e^{2r}.  ode_h therefore uses two branches:
the series-anchored forward solution up to ODE_SWITCH_Q and, beyond it, a backward
integration from the decaying tail u = -(4/pi) K0(2r).
"""

import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import sympy
from scipy import integrate, special

from config import Config
from .exact_algebra import APoly, to_scalar
from .exceptions import (
    InconsistentSystemError,
    OdeDivergenceError,
    SingularSystemError,
    StepSizeError,
    TailConvergenceError,
)

logger = logging.getLogger(__name__)

PRINTED_TOTAL_CURVATURE = -math.pi / 4
DERIVED_TOTAL_CURVATURE = -math.pi / 2
TAIL_AMPLITUDE = -4 / math.pi


class SSeries:
    """sum_n c_n(a) s^n truncated at n <= truncation, c_n Laurent polynomials in a"""

    __slots__ = ("truncation", "_coeffs")

    def __init__(self, truncation: int, coefficients: Optional[Mapping[int, object]] = None):
        self.truncation = truncation
        self._coeffs: Dict[int, APoly] = {}
        for n, c in (coefficients or {}).items():
            if n > truncation:
                continue
            c = c if isinstance(c, APoly) else APoly.constant(c)
            if c:
                self._coeffs[n] = c

    @classmethod
    def from_list(cls, coefficients: Sequence[APoly], truncation: Optional[int] = None) -> "SSeries":
        truncation = len(coefficients) - 1 if truncation is None else truncation
        return cls(truncation, dict(enumerate(coefficients)))

    @classmethod
    def s(cls, truncation: int) -> "SSeries":
        return cls(truncation, {1: APoly.one()})

    @property
    def terms(self) -> Dict[Tuple[int, int], Fraction]:
        return {(n, k): c for n, poly in self._coeffs.items() for k, c in poly.items()}

    def coefficient(self, n: int) -> APoly:
        return self._coeffs.get(n, APoly.zero())

    def coefficients(self) -> List[APoly]:
        return [self.coefficient(n) for n in range(self.truncation + 1)]

    def _coerce(self, other) -> "SSeries":
        if isinstance(other, SSeries):
            if other.truncation != self.truncation:
                raise ValueError(f"truncation mismatch {self.truncation} vs {other.truncation}")
            return other
        return SSeries(self.truncation, {0: other if isinstance(other, APoly) else to_scalar(other)})

    def __add__(self, other) -> "SSeries":
        other = self._coerce(other)
        out = dict(self._coeffs)
        for n, c in other._coeffs.items():
            out[n] = out[n] + c if n in out else c
        return SSeries(self.truncation, out)

    __radd__ = __add__

    def __neg__(self) -> "SSeries":
        return SSeries(self.truncation, {n: -c for n, c in self._coeffs.items()})

    def __sub__(self, other) -> "SSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "SSeries":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "SSeries":
        if isinstance(other, (int, Fraction, APoly)):
            return SSeries(self.truncation, {n: c * other for n, c in self._coeffs.items()})
        other = self._coerce(other)
        out: Dict[int, APoly] = {}
        for i, x in self._coeffs.items():
            for j, y in other._coeffs.items():
                if i + j <= self.truncation:
                    out[i + j] = out[i + j] + x * y if i + j in out else x * y
        return SSeries(self.truncation, out)

    __rmul__ = __mul__

    def inverse(self) -> "SSeries":
        inv0 = self.coefficient(0).inverse()
        out = {0: inv0}
        for n in range(1, self.truncation + 1):
            acc = APoly.zero()
            for i in range(1, n + 1):
                if i in self._coeffs and (n - i) in out:
                    acc = acc + self._coeffs[i] * out[n - i]
            if acc:
                out[n] = -(inv0 * acc)
        return SSeries(self.truncation, out)

    def D(self) -> "SSeries":
        """s d/ds - d/da, the common action of d1 and d1bar"""
        return SSeries(self.truncation, {n: c * n - c.derivative() for n, c in self._coeffs.items()})

    def log_derivative(self) -> "SSeries":
        return self.D() * self.inverse()

    def __eq__(self, other) -> bool:
        if not isinstance(other, SSeries):
            return NotImplemented
        return self.truncation == other.truncation and self._coeffs == other._coeffs

    def __repr__(self) -> str:
        return f"SSeries(N={self.truncation}, {self._coeffs})"


def pde_residual(h: SSeries) -> SSeries:
    """D(D h / h) + h^-2 - s h^2"""
    h_inv = h.inverse()
    return h.log_derivative().D() + h_inv * h_inv - SSeries.s(h.truncation) * h * h


def _to_sympy(value: Fraction) -> sympy.Rational:
    return sympy.Rational(value.numerator, value.denominator)


def solve_next_coefficient(known: Sequence[APoly]) -> APoly:
    """F_n from F_0..F_{n-1} via the ansatz F_n = sum_{j <= 2n+1} c_j a^j.

    The s^n coefficient of the residual is affine in F_n, so its columns are
    differences against the residual with F_n = 0.
    """
    n = len(known)
    base = SSeries.from_list(list(known) + [APoly.zero()])
    constant = pde_residual(base).coefficient(n)
    columns = []
    for j in range(2 * n + 2):
        trial = base + SSeries(n, {n: APoly.monomial(j)})
        columns.append(pde_residual(trial).coefficient(n) - constant)

    exponents = sorted(set(constant.exponents()).union(*(c.exponents() for c in columns)))
    matrix = sympy.Matrix([[_to_sympy(col.coefficient(k)) for col in columns] for k in exponents])
    rhs = sympy.Matrix([-_to_sympy(constant.coefficient(k)) for k in exponents])

    if matrix.rank() != len(columns):
        raise SingularSystemError(f"linear system for F_{n} has rank {matrix.rank()} < {len(columns)}")
    try:
        solution, params = matrix.gauss_jordan_solve(rhs)
    except ValueError as e:
        raise InconsistentSystemError(f"no polynomial F_{n} of degree {2 * n + 1} solves the recursion") from e
    if params.shape[0]:
        raise SingularSystemError(f"F_{n} is not determined uniquely")
    return APoly({j: Fraction(int(v.p), int(v.q)) for j, v in enumerate(solution)})


@lru_cache(maxsize=None)
def _oracle(order: int) -> Tuple[APoly, ...]:
    coefficients = [APoly.var()]
    for n in range(1, order + 1):
        coefficients.append(solve_next_coefficient(coefficients))
        logger.debug(f"Recursion solved F_{n}")
    return tuple(coefficients)


def oracle_fn(order: int) -> List[APoly]:
    """F_0..F_order from the tt* equation alone, F_0 = a"""
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    return list(_oracle(order))


def cross_check(order: int, fn: Optional[Sequence[APoly]] = None) -> bool:
    """True iff the recursion reproduces the Birkhoff coefficients F_0..F_order"""
    if fn is None:
        from .ttstar import metric_h
        fn = metric_h(order).coefficients
    oracle = oracle_fn(order)
    mismatches = [n for n in range(order + 1) if n >= len(fn) or fn[n] != oracle[n]]
    if mismatches:
        logger.error(f"❌ Recursion and Birkhoff disagree at n = {mismatches}")
        return False
    logger.info(f"✅ Recursion and Birkhoff agree through F_{order}")
    return True


# ---------------------------------------------------------------------------
# Numerics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OdeOptions:
    method: str = Config.ODE_METHOD
    rtol: float = Config.ODE_RTOL
    atol: float = Config.ODE_ATOL
    far_atol_scale: float = Config.ODE_FAR_ATOL_SCALE
    far_margin_r: float = Config.ODE_FAR_MARGIN_R
    anchor_q: float = Config.ODE_ANCHOR_Q
    anchor_order: int = Config.ODE_ANCHOR_ORDER
    switch_q: float = Config.ODE_SWITCH_Q
    far_q: float = Config.ODE_FAR_Q
    divergence_u: float = Config.ODE_DIVERGENCE_U
    min_step: float = Config.ODE_MIN_STEP
    euler_gamma: float = Config.EULER_GAMMA
    qmin: float = Config.CURVATURE_QMIN
    qmax: float = Config.CURVATURE_QMAX
    epsrel: float = Config.CURVATURE_EPSREL

    @classmethod
    def from_config(cls, config=Config, overrides: Optional[Mapping[str, float]] = None) -> "OdeOptions":
        opts = cls(
            method=config.ODE_METHOD, rtol=config.ODE_RTOL, atol=config.ODE_ATOL,
            far_atol_scale=config.ODE_FAR_ATOL_SCALE,
            far_margin_r=config.ODE_FAR_MARGIN_R, anchor_q=config.ODE_ANCHOR_Q,
            anchor_order=config.ODE_ANCHOR_ORDER, switch_q=config.ODE_SWITCH_Q,
            far_q=config.ODE_FAR_Q, divergence_u=config.ODE_DIVERGENCE_U,
            min_step=config.ODE_MIN_STEP, euler_gamma=config.EULER_GAMMA,
            qmin=config.CURVATURE_QMIN, qmax=config.CURVATURE_QMAX, epsrel=config.CURVATURE_EPSREL,
        )
        overrides = dict(overrides or {})
        mapping = {'ode_rtol': 'rtol', 'ode_atol': 'atol', 'curvature_epsrel': 'epsrel'}
        fields = {mapping.get(k, k): v for k, v in overrides.items() if mapping.get(k, k) in cls.__dataclass_fields__}
        return replace(opts, **fields) if fields else opts


@dataclass
class OdeSolution:
    """Samples of the radial solution on a monotone grid in r"""
    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    branch: str

    @property
    def q_abs(self) -> np.ndarray:
        return (self.r / 4) ** 2

    @property
    def h(self) -> np.ndarray:
        return np.exp(self.u / 2) / np.sqrt(self.q_abs)


@dataclass
class CurvatureReport:
    value: float
    bulk: float
    lower_tail: float
    upper_tail: float
    derived_value: float = DERIVED_TOTAL_CURVATURE
    printed_value: float = PRINTED_TOTAL_CURVATURE

    @property
    def relative_error(self) -> float:
        return abs(self.value - self.derived_value) / abs(self.derived_value)

    @property
    def ratio_to_printed(self) -> float:
        return self.value / self.printed_value


def r_of_q(q_abs):
    return 4 * np.sqrt(q_abs)


def q_of_r(r):
    return (r / 4) ** 2


def evaluate_series_h(q_abs: float, fn: Sequence[APoly], euler_gamma: float = Config.EULER_GAMMA) -> Tuple[float, float]:
    """(h, dh/dx) from the truncated series, x = log|q|, a = -2x - 4 gamma"""
    x = math.log(q_abs)
    a = -2 * x - 4 * euler_gamma
    s = q_abs ** 2
    h, h_x = 0.0, 0.0
    for n, poly in enumerate(fn):
        weight = s ** n
        value = poly.evaluate(a)
        h += value * weight
        h_x += 2 * weight * (n * value - poly.derivative().evaluate(a))
    return h, h_x


def series_h(q_abs: float, order: int = 8, euler_gamma: float = Config.EULER_GAMMA) -> float:
    return evaluate_series_h(q_abs, oracle_fn(order), euler_gamma)[0]


def asymptotic_h(q_abs: float) -> float:
    """|q|^{-1/2} (1 - e^{-8|q|^{1/2}} / (2 sqrt(pi) |q|^{1/4}))"""
    if q_abs <= 0:
        raise ValueError(f"|q| must be positive, got {q_abs}")
    correction = math.exp(-8 * math.sqrt(q_abs)) / (2 * math.sqrt(math.pi) * q_abs ** 0.25)
    return (1 - correction) / math.sqrt(q_abs)


def _rhs(r, y):
    u, du = y
    return [du, 4 * np.sinh(u) - du / r]


def anchor_state(opts: OdeOptions) -> Tuple[float, np.ndarray]:
    """(r0, [u, du/dr]) at |q| = anchor_q from the exact series"""
    fn = oracle_fn(opts.anchor_order)
    h, h_x = evaluate_series_h(opts.anchor_q, fn, opts.euler_gamma)
    r0 = float(r_of_q(opts.anchor_q))
    u = 2 * math.log(h) + math.log(opts.anchor_q)
    u_x = 2 * h_x / h + 1
    return r0, np.array([u, u_x * 2 / r0])


def tail_state(r: float) -> np.ndarray:
    """[u, du/dr] on the decaying solution u = -(4/pi) K0(2r)"""
    return np.array([TAIL_AMPLITUDE * special.k0(2 * r), -2 * TAIL_AMPLITUDE * special.k1(2 * r)])


def _integrate(r_start: float, y0: np.ndarray, r_end: float, opts: OdeOptions, atol: float,
               t_eval=None, dense: bool = False):
    def diverged(r, y):
        return opts.divergence_u - abs(y[0])
    diverged.terminal = True

    sol = integrate.solve_ivp(_rhs, (r_start, r_end), y0, method=opts.method, rtol=opts.rtol,
                              atol=atol, t_eval=t_eval, dense_output=dense, events=diverged)
    if sol.status == 1:
        r_hit = float(sol.t_events[0][0])
        raise OdeDivergenceError(
            f"|u| exceeded {opts.divergence_u} at |q| = {q_of_r(r_hit):.4g}; off the separatrix")
    if sol.status == -1:
        raise StepSizeError(f"integration failed between r = {r_start} and {r_end}: {sol.message}")
    return sol


def tail_start(r_needed: float, opts: OdeOptions) -> Tuple[float, np.ndarray, float]:
    """(r_far, state, atol) for a backward integration from beyond r_needed; atol scales with |u(r_far)|"""
    r_far = max(float(r_of_q(opts.far_q)), r_needed + opts.far_margin_r)
    y = tail_state(r_far)
    atol = max(opts.far_atol_scale * abs(float(y[0])), np.finfo(float).tiny)
    return r_far, y, atol


def _tail_branch(r_needed: float, r_end: float, opts: OdeOptions, t_eval=None, dense: bool = False):
    r_far, y, atol = tail_start(r_needed, opts)
    return _integrate(r_far, y, r_end, opts, atol, t_eval=t_eval, dense=dense)


def series_branch(q_values: Sequence[float], opts: Optional[OdeOptions] = None) -> Tuple[np.ndarray, np.ndarray]:
    """u and du/dr from the series-anchored forward solution alone, ignoring switch_q"""
    opts = opts or OdeOptions()
    q = np.asarray(q_values, dtype=float)
    if np.any(q <= 0):
        raise ValueError("|q| must be positive")
    r = r_of_q(q)
    u = np.empty_like(q)
    du = np.empty_like(q)

    r0, y0 = anchor_state(opts)
    at_anchor = np.isclose(r, r0, rtol=1e-14, atol=0)
    u[at_anchor], du[at_anchor] = y0[0], y0[1]
    for mask, ascending in ((~at_anchor & (r < r0), False), (~at_anchor & (r > r0), True)):
        if not mask.any():
            continue
        targets = r[mask]
        order = np.argsort(targets) if ascending else np.argsort(-targets)
        sol = _integrate(r0, y0, targets[order][-1], opts, opts.atol, t_eval=targets[order])
        idx = np.flatnonzero(mask)[order]
        u[idx], du[idx] = sol.y[0], sol.y[1]
    return u, du


def bessel_h(q_abs: float) -> float:
    """h from the linearised decaying solution u = -(4/pi) K0(2r)"""
    if q_abs <= 0:
        raise ValueError(f"|q| must be positive, got {q_abs}")
    return float(math.exp(tail_state(float(r_of_q(q_abs)))[0] / 2) / math.sqrt(q_abs))


def _split(q_values: Sequence[float], opts: OdeOptions):
    q = np.asarray(q_values, dtype=float)
    if np.any(q <= 0):
        raise ValueError("|q| must be positive")
    return q <= opts.switch_q


def solve_profile(q_values: Sequence[float], opts: Optional[OdeOptions] = None) -> Tuple[np.ndarray, np.ndarray]:
    """u and du/dr at each |q|, choosing the branch per point"""
    opts = opts or OdeOptions()
    q = np.asarray(q_values, dtype=float)
    near = _split(q, opts)
    r = r_of_q(q)
    u = np.empty_like(q)
    du = np.empty_like(q)

    if near.any():
        u[near], du[near] = series_branch(q[near], opts)

    if (~near).any():
        targets = r[~near]
        order = np.argsort(-targets)
        sol = _tail_branch(float(targets.max()), float(targets[order][-1]), opts, t_eval=targets[order])
        idx = np.flatnonzero(~near)[order]
        u[idx], du[idx] = sol.y[0], sol.y[1]
    return u, du


def ode_h(q_abs: float, opts: Optional[OdeOptions] = None) -> float:
    """h at |q| from the radial Painleve III solution"""
    if q_abs <= 0:
        raise ValueError(f"|q| must be positive, got {q_abs}")
    u, _ = solve_profile([q_abs], opts)
    return float(math.exp(u[0] / 2) / math.sqrt(q_abs))


def connection_check(opts: Optional[OdeOptions] = None) -> Dict[str, float]:
    """Compare the series-anchored branch with the decaying branch at the switch point"""
    opts = opts or OdeOptions()
    r_switch = float(r_of_q(opts.switch_q))
    r0, y0 = anchor_state(opts)
    near = _integrate(r0, y0, r_switch, opts, opts.atol)
    far = _tail_branch(r_switch, r_switch, opts)
    u_near, du_near = near.y[0][-1], near.y[1][-1]
    u_far, du_far = far.y[0][-1], far.y[1][-1]
    report = {
        'r': r_switch,
        'u_series_branch': float(u_near),
        'u_tail_branch': float(u_far),
        'du_series_branch': float(du_near),
        'du_tail_branch': float(du_far),
        'u_relative_difference': float(abs(u_near - u_far) / abs(u_far)),
        'du_relative_difference': float(abs(du_near - du_far) / abs(du_far)),
    }
    if max(report['u_relative_difference'], report['du_relative_difference']) > Config.ASYMPTOTIC_WARN:
        logger.warning(f"⚠️ Branches disagree at |q| = {opts.switch_q}: {report}")
    else:
        logger.info(f"✅ Branches meet at |q| = {opts.switch_q} "
                    f"(relative difference {report['u_relative_difference']:.2e})")
    return report


def ode_profile(q_values: Sequence[float], opts: Optional[OdeOptions] = None) -> List[Dict[str, float]]:
    """CSV-ready rows comparing ODE, series and asymptotic h"""
    opts = opts or OdeOptions()
    u, du = solve_profile(q_values, opts)
    fn = oracle_fn(opts.anchor_order)
    rows = []
    for q, ui, dui in zip(q_values, u, du):
        rows.append({
            'q_abs': float(q),
            'r': float(r_of_q(q)),
            'u': float(ui),
            'du_dr': float(dui),
            'h_ode': float(math.exp(ui / 2) / math.sqrt(q)),
            # the truncated series is meaningless past switch_q
            'h_series': evaluate_series_h(q, fn, opts.euler_gamma)[0] if q <= opts.switch_q else None,
            'h_asymptotic': asymptotic_h(q),
        })
    return rows


def asymptotic_agreement(q_values: Sequence[float], opts: Optional[OdeOptions] = None) -> Dict[float, float]:
    """Relative difference between ODE and asymptotic h; soft, warns above ASYMPTOTIC_WARN"""
    rows = ode_profile(q_values, opts)
    result = {}
    for row in rows:
        rel = abs(row['h_ode'] - row['h_asymptotic']) / row['h_asymptotic']
        result[row['q_abs']] = rel
        if rel > Config.ASYMPTOTIC_WARN:
            logger.warning(f"⚠️ Asymptotic formula off by {rel:.2e} at |q| = {row['q_abs']}")
        elif rel > Config.ASYMPTOTIC_FAIL:
            logger.warning(f"⚠️ Asymptotic formula within warn band ({rel:.2e}) at |q| = {row['q_abs']}")
    return result


def curvature_density(q_abs: float, u: float) -> float:
    """K / h = -(2/h^2)(1 - |q|^2 h^4) = 4 |q| sinh u"""
    return 4 * q_abs * math.sinh(u)


def gauss_curvature(q_abs: float, opts: Optional[OdeOptions] = None) -> float:
    """K = -(2/h)(1 - |q|^2 h^4) with h from the ODE"""
    u, _ = solve_profile([q_abs], opts)
    h = math.exp(u[0] / 2) / math.sqrt(q_abs)
    return -(2 / h) * -math.expm1(2 * u[0])


def total_curvature(opts: Optional[OdeOptions] = None) -> CurvatureReport:
    """Integral of K over the cylinder t in C / 2 pi i Z for the metric h^-1 |dt|^2.

    dA = h^-1 dx dy and K/h = (1/2)(log h)'' in x = log|q|, so the integral is
    pi [(log h)'] between the window ends plus two closed-form tails:
    series below qmin, decaying Bessel tail above qmax.
    """
    opts = opts or OdeOptions()
    if opts.qmin > opts.anchor_q:
        raise TailConvergenceError(f"qmin = {opts.qmin} is outside the series regime (<= {opts.anchor_q})")

    r0, y0 = anchor_state(opts)
    r_lo, r_hi = float(r_of_q(opts.qmin)), float(r_of_q(opts.qmax))
    r_switch = float(r_of_q(opts.switch_q))
    lower = _integrate(r0, y0, r_lo, opts, opts.atol, dense=True)
    middle = _integrate(r0, y0, r_switch, opts, opts.atol, dense=True)
    upper = _tail_branch(r_hi, r_switch, opts, dense=True)

    def u_at(r):
        if r <= r0:
            return lower.sol(r)
        if r <= r_switch:
            return middle.sol(r)
        return upper.sol(r)

    def integrand(x):
        q_abs = math.exp(x)
        u = u_at(float(r_of_q(q_abs)))[0]
        return 2 * math.pi * curvature_density(q_abs, u)

    x_lo, x_hi = math.log(opts.qmin), math.log(opts.qmax)
    breaks = [x for x in (math.log(opts.anchor_q), math.log(opts.switch_q)) if x_lo < x < x_hi]
    bulk, err = integrate.quad(integrand, x_lo, x_hi, epsrel=opts.epsrel, limit=400, points=breaks or None)

    u_hi, du_hi = upper.sol(r_hi)
    if abs(u_hi) > Config.ASYMPTOTIC_FAIL:
        raise TailConvergenceError(f"u = {u_hi:.3g} at qmax = {opts.qmax}; window too small for the tail")
    h_lo, hx_lo = evaluate_series_h(opts.qmin, oracle_fn(opts.anchor_order), opts.euler_gamma)
    lower_tail = math.pi * hx_lo / h_lo
    upper_tail = -math.pi * du_hi * r_hi / 4

    report = CurvatureReport(value=bulk + lower_tail + upper_tail, bulk=bulk,
                             lower_tail=lower_tail, upper_tail=upper_tail)
    logger.info(f"Total curvature {report.value:.8f} (bulk {bulk:.6f}, quad error {err:.1e})")
    if abs(report.ratio_to_printed - 1) > 0.01:
        logger.warning(f"⚠️ Total curvature {report.value:.6f} is {report.ratio_to_printed:.4f} "
                       f"times the printed value -pi/4; derived value is -pi/2")
    return report


def sensitivity_report(q_abs: float = 1.0, opts: Optional[OdeOptions] = None) -> Dict[str, float]:
    """Relative change of ode_h under perturbed anchor choices"""
    opts = opts or OdeOptions()
    baseline = ode_h(q_abs, opts)
    variants = {
        'anchor_order-2': replace(opts, anchor_order=opts.anchor_order - 2),
        'anchor_q/2': replace(opts, anchor_q=opts.anchor_q / 2),
        'rtol*10': replace(opts, rtol=opts.rtol * 10),
    }
    return {name: abs(ode_h(q_abs, variant) - baseline) / baseline for name, variant in variants.items()}
