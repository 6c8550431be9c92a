"""
The Hermitian metric h and the Cecotti-Vafa data of P^1.

Pairing on loops: (alpha, beta)_H = alpha(-z)^T g beta(z).  Its axioms give

    (f(-z) s1, s2)_H = (s1, f(z) s2)_H   for scalar f,
    (omega s1, s2)_H = (s1, omega s2)_H,

so for the nilpotent f = c omega/z:  (e^{c omega/z} s1, s2)_H = (s1, e^{-c omega/z} s2)_H.

With Phi(1) = e^{t omega/z} v, where v is the first column of Q B Bt, the metric
coefficient is h = (kappa_H Phi(1), Phi(1))_H and

  1. kappa_H e^{t omega/z} = e^{-conj(t) omega/z} kappa_H
     (kappa_H is conjugate-linear, z -> 1/z on |z| = 1, and
      z^2 K_H N = -N K_H for K_H = [[z, 0], [-4 gamma, -1/z]], N = omega cup)
  2. h = (e^{-conj(t) omega/z} kappa_H v, e^{t omega/z} v)_H
       = (kappa_H v, e^{(t + conj t) omega/z} v)_H            (axiom, f = conj(t) omega/z)
       = (e^{-(t + conj t) omega/z} kappa_H v, v)_H            (axiom, f = -(t + conj t) omega/z)
       = (kappa_tau v, v)_H

so the gauge factor never has to be represented.  The result must come out free
of z and diagonal in (q, qbar); both are asserted.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional

from config import Config
from .birkhoff import GaugedInvolution, frame_phi
from .cache_manager import ExpansionCache
from .exact_algebra import APoly, BiSeries, LoopMatrix, commutator, series_log_derivative
from .exceptions import ConventionError, PolynomialityError
from .qde_p1 import POINCARE_G, grading_data, poincare_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricSeries:
    order: int
    h: BiSeries
    coefficients: List[APoly] = field(hash=False)
    source: str = "birkhoff"

    def F(self, n: int) -> APoly:
        return self.coefficients[n]

    def check_structure(self) -> None:
        """F_n in Q[a], monic, of degree 2n+1"""
        for n, poly in enumerate(self.coefficients):
            if not poly.is_polynomial():
                raise PolynomialityError(f"F_{n} = {poly} has negative powers of a")
            if poly.degree() != 2 * n + 1:
                raise PolynomialityError(f"F_{n} has degree {poly.degree()}, expected {2 * n + 1}")
            if poly.leading_coefficient() != 1:
                raise PolynomialityError(f"F_{n} is not monic: {poly}")


@dataclass(frozen=True)
class CVData:
    order: int
    h: BiSeries
    h_inv: BiSeries
    g: LoopMatrix
    kappa: LoopMatrix
    D1: LoopMatrix
    D1bar: LoopMatrix
    C0: LoopMatrix
    C1: LoopMatrix
    C1bar: LoopMatrix
    U: LoopMatrix
    Ubar: LoopMatrix
    Qop: LoopMatrix
    mu: LoopMatrix


@dataclass
class CVReport:
    order: int
    residuals: Dict[str, int]

    @property
    def passed(self) -> bool:
        return all(v == 0 for v in self.residuals.values())

    def failures(self) -> List[str]:
        return [name for name, v in self.residuals.items() if v]


def pair_h(alpha: List[BiSeries], beta: List[BiSeries]) -> BiSeries:
    """(alpha, beta)_H = alpha(-z)^T g beta(z)"""
    total = BiSeries.zero(alpha[0].truncation)
    for i, row in enumerate(POINCARE_G):
        for j, gij in enumerate(row):
            if gij:
                total = total + alpha[i].reflect_z() * beta[j] * gij
    return total


def _metric_from_coefficients(order: int, coefficients: List[APoly]) -> BiSeries:
    return BiSeries(2 * order, {(n, n): poly for n, poly in enumerate(coefficients)})


@lru_cache(maxsize=None)
def _metric_from_frame(order: int) -> MetricSeries:
    truncation = 2 * order
    v = frame_phi(truncation).column(0)
    h = pair_h(GaugedInvolution().apply_vector(v), v)

    if not h.is_z_free():
        raise ConventionError("metric coefficient depends on z; check the involution and pairing conventions")
    off_diagonal = [(n, m) for (n, m) in h.support() if n != m]
    if off_diagonal:
        raise ConventionError(f"metric has off-diagonal terms at {off_diagonal[:5]}")

    coefficients = [h.apoly_coefficient(n, n) for n in range(order + 1)]
    logger.info(f"Metric expansion computed to |q|^{2 * order}")
    return MetricSeries(order=order, h=h, coefficients=coefficients)


def metric_h(order: int, use_cache: Optional[bool] = None) -> MetricSeries:
    """h = sum F_n (q qbar)^n for n <= order; runs the frame at total truncation 2*order"""
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    use_cache = Config.USE_CACHE if use_cache is None else use_cache
    cache = ExpansionCache() if use_cache else None
    if cache is not None:
        cached = cache.load_expansion(order)
        if cached is not None:
            metric = MetricSeries(order=order, h=_metric_from_coefficients(order, cached),
                                  coefficients=cached, source="cache")
            metric.check_structure()
            return metric

    metric = _metric_from_frame(order)
    metric.check_structure()
    if cache is not None:
        cache.save_expansion(order, metric.coefficients)
    return metric


def hermitian_matrix(order: int) -> LoopMatrix:
    """(kappa_H Phi_i, Phi_j)_H on both frame columns; equals diag(h, 1/h)"""
    truncation = 2 * order
    frame = frame_phi(truncation)
    kappa_frame = GaugedInvolution().apply(frame)
    g = poincare_matrix(truncation)
    return kappa_frame.reflect_z().transpose() @ g @ frame


def _d1_endomorphism(x: LoopMatrix, connection: LoopMatrix) -> LoopMatrix:
    return x.d1() + commutator(connection, x)


def _d1bar_endomorphism(x: LoopMatrix, connection: LoopMatrix) -> LoopMatrix:
    return x.d1bar() + commutator(connection, x)


def cv_data(order: int) -> CVData:
    metric = metric_h(order)
    T = metric.h.truncation
    h = metric.h
    h_inv = h.inverse()
    q, qbar = BiSeries.q(T), BiSeries.qbar(T)

    lam = series_log_derivative(h, BiSeries.d1)
    half = Fraction(1, 2)
    grading = grading_data()

    c1 = LoopMatrix([[0, q], [1, 0]], T)
    c1bar = LoopMatrix([[0, h_inv * h_inv], [qbar * h * h, 0]], T)
    return CVData(
        order=order,
        h=h,
        h_inv=h_inv,
        g=poincare_matrix(T),
        kappa=LoopMatrix([[0, h_inv], [h, 0]], T),
        D1=LoopMatrix([[lam, 0], [0, -lam]], T),
        D1bar=LoopMatrix.zero(2, T),
        C0=LoopMatrix.identity(2, T),
        C1=c1,
        C1bar=c1bar,
        U=c1 * 2,
        Ubar=c1bar * 2,
        Qop=LoopMatrix([[-lam * 2 - half, 0], [0, lam * 2 + half]], T),
        mu=LoopMatrix([list(row) for row in grading.mu], T),
    )


def check_cv_equations(data: CVData, order: Optional[int] = None) -> CVReport:
    """Residual of every single-coordinate tt* equation, as a count of nonzero terms.

    D1 and D1bar are stored by their connection matrices in the frame (1, omega):
    D1 = d1 + Gamma, D1bar = d1bar + Gamma_bar.
    """
    gamma, gamma_bar = data.D1, data.D1bar
    c, cb, u, ub, qop, k, g = data.C1, data.C1bar, data.U, data.Ubar, data.Qop, data.kappa, data.g
    identity = LoopMatrix.identity(2, c.truncation)

    def conj(m: LoopMatrix) -> LoopMatrix:
        # kappa m kappa as a matrix, using that kappa is conjugate-linear
        return k @ m.bar() @ k.bar()

    equations = {
        'C1 commutes with C1': commutator(c, c),
        'C0 is the identity': data.C0 - identity,
        'Dbar C = 0': _d1bar_endomorphism(c, gamma_bar),
        'D Cbar = 0': _d1_endomorphism(cb, gamma),
        '[D, Dbar] + [C, Cbar] = 0': (gamma_bar.d1() - gamma.d1bar() + commutator(gamma, gamma_bar)
                                      + commutator(c, cb)),
        'D Q - [Ubar, C] = 0': _d1_endomorphism(qop, gamma) - commutator(ub, c),
        'Dbar Q + [U, Cbar] = 0': _d1bar_endomorphism(qop, gamma_bar) + commutator(u, cb),
        'D U - C + [Q, C] = 0': _d1_endomorphism(u, gamma) - c + commutator(qop, c),
        'Dbar Ubar - Cbar - [Q, Cbar] = 0': _d1bar_endomorphism(ub, gamma_bar) - cb - commutator(qop, cb),
        'Dbar U = 0': _d1bar_endomorphism(u, gamma_bar),
        'D Ubar = 0': _d1_endomorphism(ub, gamma),
        '[U, C] = 0': commutator(u, c),
        '[Ubar, Cbar] = 0': commutator(ub, cb),
        'g(C u, v) = g(u, C v)': g @ c - c.transpose() @ g,
        'g(Cbar u, v) = g(u, Cbar v)': g @ cb - cb.transpose() @ g,
        'g(U u, v) = g(u, U v)': g @ u - u.transpose() @ g,
        'g(Ubar u, v) = g(u, Ubar v)': g @ ub - ub.transpose() @ g,
        'g(Q u, v) = -g(u, Q v)': g @ qop + qop.transpose() @ g,
        'D preserves g': gamma.transpose() @ g + g @ gamma,
        'Dbar preserves g': gamma_bar.transpose() @ g + g @ gamma_bar,
        'Cbar = kappa C kappa': conj(c) - cb,
        'Ubar = kappa U kappa': conj(u) - ub,
        'Dbar = kappa D kappa': k @ k.bar().d1bar() + k @ gamma.bar() @ k.bar() - gamma_bar,
        'g(kappa u, kappa v) = conj g(u, v)': k.transpose() @ g @ k - g,
        'Q kappa = -kappa Q': qop @ k + k @ qop.bar(),
        'kappa^2 = 1': k @ k.bar() - identity,
        'Q = mu - 2 Gamma': qop - (data.mu - gamma * 2),
    }
    report = CVReport(order=data.order if order is None else order,
                      residuals={name: m.nonzero_terms() for name, m in equations.items()})
    report.residuals['tt* equation for h'] = len(tt_star_pde_residual(data.h).support())
    if report.passed:
        logger.info(f"✅ All {len(report.residuals)} tt* identities vanish to order {report.order}")
    else:
        logger.error(f"❌ tt* identities failing: {report.failures()}")
    return report


def tt_star_pde_residual(h: BiSeries) -> BiSeries:
    """d1 d1bar log h + h^-2 - q qbar h^2"""
    T = h.truncation
    h_inv = h.inverse()
    lhs = series_log_derivative(h, BiSeries.d1bar).d1()
    return lhs + h_inv * h_inv - BiSeries.q(T) * BiSeries.qbar(T) * h * h


def curvature_series(order: int) -> BiSeries:
    """-(2/h)(1 - q qbar h^4), the Gauss curvature of h^-1 |dt|^2"""
    h = metric_h(order).h
    T = h.truncation
    return (h.inverse() * -2) + BiSeries.q(T) * BiSeries.qbar(T) * (h ** 3) * 2


def curvature_identity_residual(order: int) -> BiSeries:
    """-2 h d1 d1bar log(1/h) minus curvature_series"""
    h = metric_h(order).h
    d1d1bar_log_inv = -(series_log_derivative(h, BiSeries.d1bar).d1())
    return h * d1d1bar_log_inv * -2 - curvature_series(order)
