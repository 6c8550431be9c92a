"""
Quantum cohomology of P^1 in the basis (1, omega).

  1 o  = identity,  omega o = [[0, q], [1, 0]]           (omega o)^2 = q
  J    = e^{t omega/z} (J0 + J1 omega / z)
  Q    = [[J0, z d1 J0], [J1 / z, J0 + d1 J1]]

Q is the fundamental solution with the gauge factor e^{t omega/z} stripped;
log q is not an element of the series ring, so every identity below is stated
after that factor cancels.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Tuple

import sympy

from .exact_algebra import BiSeries, LoopMatrix, ZLoop

logger = logging.getLogger(__name__)

Matrix2 = Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]

POINCARE_G: Matrix2 = ((Fraction(0), Fraction(1)), (Fraction(1), Fraction(0)))


@dataclass(frozen=True)
class QuantumProductData:
    """Quantum multiplication by the basis (1, omega)"""
    unit_matrix: Matrix2 = ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))

    def omega_matrix(self, order: int) -> LoopMatrix:
        return LoopMatrix([[0, BiSeries.q(order)], [1, 0]], order)

    def cup_matrix(self, order: int) -> LoopMatrix:
        """omega cup, the q = 0 limit of omega o"""
        return LoopMatrix([[0, 0], [1, 0]], order)


@dataclass(frozen=True)
class GradingData:
    mu: Matrix2
    rho: Matrix2
    poincare_g: Matrix2

    def is_anti_self_adjoint(self) -> bool:
        """g mu + mu^T g = 0"""
        g, mu = self.poincare_g, self.mu
        for i in range(2):
            for j in range(2):
                left = sum(g[i][k] * mu[k][j] for k in range(2))
                right = sum(mu[k][i] * g[k][j] for k in range(2))
                if left + right != 0:
                    return False
        return True


@dataclass(frozen=True)
class FundamentalMatrix:
    order: int
    Q: LoopMatrix
    J0: BiSeries
    J1: BiSeries

    def column(self, j: int):
        return self.Q.column(j)


def grading_data() -> GradingData:
    half = Fraction(1, 2)
    return GradingData(
        mu=((-half, Fraction(0)), (Fraction(0), half)),
        rho=((Fraction(0), Fraction(0)), (Fraction(2), Fraction(0))),
        poincare_g=POINCARE_G,
    )


def harmonic_number(k: int) -> Fraction:
    return sum((Fraction(1, m) for m in range(1, k + 1)), Fraction(0))


def j_coeffs(order: int) -> Tuple[BiSeries, BiSeries]:
    """J0 = sum q^k / (k!^2 z^2k),  J1 = -2 sum H_k q^k / (k!^2 z^2k)"""
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    j0, j1 = {}, {}
    for k in range(order + 1):
        weight = Fraction(1, factorial(k) ** 2)
        j0[(k, 0)] = ZLoop.monomial(-2 * k, weight)
        if k:
            j1[(k, 0)] = ZLoop.monomial(-2 * k, -2 * harmonic_number(k) * weight)
    return BiSeries(order, j0), BiSeries(order, j1)


def brute_force_j_coefficient(k: int) -> Tuple[ZLoop, ZLoop]:
    """(J0, J1) coefficients of q^k by expanding prod_{m<=k} (omega + m z)^-2 with omega^2 = 0"""
    w, z = sympy.symbols('omega z')
    expr = sympy.Integer(1)
    for m in range(1, k + 1):
        expr *= (w + m * z) ** -2
    c0 = sympy.simplify(expr.subs(w, 0))
    c1 = sympy.simplify(sympy.diff(expr, w).subs(w, 0) * z)

    def as_zloop(value):
        scaled = sympy.nsimplify(sympy.simplify(value * z ** (2 * k)))
        if scaled.free_symbols:
            raise ValueError(f"unexpected z-dependence in q^{k} coefficient: {value}")
        scaled = sympy.Rational(scaled)
        return ZLoop.monomial(-2 * k, Fraction(int(scaled.p), int(scaled.q)))

    return as_zloop(c0), as_zloop(c1)


@lru_cache(maxsize=None)
def fundamental_matrix(order: int) -> FundamentalMatrix:
    j0, j1 = j_coeffs(order)
    z = ZLoop.monomial(1)
    z_inv = ZLoop.monomial(-1)
    q_matrix = LoopMatrix([
        [j0, j0.d1() * z],
        [j1 * z_inv, j0 + j1.d1()],
    ], order)
    logger.debug(f"Fundamental matrix built to order {order}")
    return FundamentalMatrix(order=order, Q=q_matrix, J0=j0, J1=j1)


def poincare_matrix(order: int) -> LoopMatrix:
    return LoopMatrix([[int(x) for x in row] for row in POINCARE_G], order)


def adjoint_inverse(q_matrix: LoopMatrix) -> LoopMatrix:
    """g^-1 Q(-z)^T g, which is Q^-1 whenever Q is unitary"""
    g = poincare_matrix(q_matrix.truncation)
    return g @ q_matrix.reflect_z().transpose() @ g


def verify_unitarity(order: int, fundamental: FundamentalMatrix = None) -> LoopMatrix:
    """g^-1 Q(-z)^T g Q(z) - 1; vanishes identically to truncation"""
    fundamental = fundamental or fundamental_matrix(order)
    q_matrix = fundamental.Q
    residual = adjoint_inverse(q_matrix) @ q_matrix - LoopMatrix.identity(2, q_matrix.truncation)
    if residual.is_zero():
        logger.info(f"✅ Unitarity holds to order {q_matrix.truncation}")
    else:
        logger.warning(f"⚠️ Unitarity residual has {residual.nonzero_terms()} nonzero terms")
    return residual


def quantum_ring_relation(order: int) -> LoopMatrix:
    """(omega o)^2 - q"""
    omega = QuantumProductData().omega_matrix(order)
    return omega @ omega - LoopMatrix.identity(2, order) * BiSeries.q(order)


def qde_residual(order: int, fundamental: FundamentalMatrix = None) -> LoopMatrix:
    """z d1 Q + (omega cup) Q - Q (omega o).

    The columns of e^{t omega/z} Q solve z d1 s = -(omega o) s; moving the gauge
    factor through d1 produces the omega cup term.
    """
    fundamental = fundamental or fundamental_matrix(order)
    q_matrix = fundamental.Q
    product = QuantumProductData()
    n = product.cup_matrix(q_matrix.truncation)
    w = product.omega_matrix(q_matrix.truncation)
    return q_matrix.d1() * ZLoop.monomial(1) + n @ q_matrix - q_matrix @ w
