"""
The loop matrix S and its recursive Birkhoff factorization S = Bt Ct.

Everything is written in the single real variable a = -t - conj(t) - 4 gamma.
The involution twisted by the gauge factor,

    kappa_tau = e^{-(t + conj t) omega/z} kappa_H,

has matrix (1 + (a + 4 gamma) N/z) [[z, 0], [-4 gamma, -1/z]] = [[z, 0], [a, -1/z]]
where N is omega cup; gamma drops out exactly (verify_gamma_cancellation).
With B = [[1, z/a], [0, 1]] and C = [[0, 1/a], [a, -1/z]] we have BC = kappa_tau(1),
and S is defined by kappa_tau(Q) = Q B S C.

`order` is always the total (q, qbar)-degree truncation.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Tuple

import sympy

from config import Config
from .exact_algebra import (
    APoly,
    BiSeries,
    CoefficientMatrix,
    LoopMatrix,
    ZLoop,
    coefficient_identity,
    coefficient_is_zero,
    coefficient_matmul,
    coefficient_split,
    coefficient_sub,
    coefficient_zero,
)
from .exceptions import FactorizationError
from .qde_p1 import adjoint_inverse, fundamental_matrix

logger = logging.getLogger(__name__)

try:
    from tqdm import tqdm
except ImportError:  # progress bars are optional
    tqdm = None

A = APoly.var()
A_INV = APoly.monomial(-1)
Z = ZLoop.monomial(1)
Z_INV = ZLoop.monomial(-1)


class GaugedInvolution:
    """M -> K bar(M) with K = [[z, 0], [a, -1/z]]"""

    def matrix(self, order: int) -> LoopMatrix:
        return LoopMatrix([[Z, 0], [A, -Z_INV]], order)

    def apply(self, m: LoopMatrix) -> LoopMatrix:
        return self.matrix(m.truncation) @ m.bar()

    def apply_vector(self, v):
        order = v[0].truncation
        return self.matrix(order).apply([x.bar() for x in v])


@dataclass(frozen=True)
class ConstantFactors:
    order: int

    @property
    def B(self) -> LoopMatrix:
        return LoopMatrix([[1, Z * A_INV], [0, 1]], self.order)

    @property
    def B_inv(self) -> LoopMatrix:
        return LoopMatrix([[1, -(Z * A_INV)], [0, 1]], self.order)

    @property
    def C(self) -> LoopMatrix:
        return LoopMatrix([[0, A_INV], [A, -Z_INV]], self.order)

    @property
    def C_inv(self) -> LoopMatrix:
        return LoopMatrix([[Z_INV, A_INV], [A, 0]], self.order)

    def product_matches_involution(self) -> bool:
        return self.B @ self.C == GaugedInvolution().matrix(self.order)


@dataclass(frozen=True)
class BirkhoffFactors:
    Btilde: LoopMatrix
    Ctilde: LoopMatrix


def verify_gamma_cancellation() -> bool:
    """(1 + (a + 4g) N/z) [[z, 0], [-4g, -1/z]] == [[z, 0], [a, -1/z]] symbolically"""
    a, g, z = sympy.symbols('a gamma z')
    gauge = sympy.eye(2) + (a + 4 * g) / z * sympy.Matrix([[0, 0], [1, 0]])
    kappa_h = sympy.Matrix([[z, 0], [-4 * g, -1 / z]])
    target = sympy.Matrix([[z, 0], [a, -1 / z]])
    difference = sympy.simplify(gauge * kappa_h - target)
    ok = difference == sympy.zeros(2, 2)
    if ok:
        logger.info("✅ Euler constant cancels from the gauged involution")
    else:
        logger.error(f"❌ Gauged involution keeps gamma: {difference}")
    return ok


@lru_cache(maxsize=None)
def s_matrix(order: int) -> LoopMatrix:
    """S = B^-1 Q^-1 kappa_tau(Q) C^-1 with Q^-1 = g Q(-z)^T g"""
    q_matrix = fundamental_matrix(order).Q
    factors = ConstantFactors(order)
    kappa_q = GaugedInvolution().apply(q_matrix)
    s = factors.B_inv @ adjoint_inverse(q_matrix) @ kappa_q @ factors.C_inv
    logger.info(f"S built to order {order} ({s.nonzero_terms()} nonzero terms)")
    return s


def _re(x: BiSeries, y: BiSeries) -> BiSeries:
    """Re(x conj(y)) on |z| = 1"""
    return (x * y.bar() + x.bar() * y) * Fraction(1, 2)


def s_matrix_transcribed(order: int) -> LoopMatrix:
    """S written entry by entry in terms of J0, J1 and their d1-derivatives"""
    fundamental = fundamental_matrix(order)
    j0, j1 = fundamental.J0, fundamental.J1
    dj0, dj1 = j0.d1(), j1.d1()
    abs_j0 = j0 * j0.bar()
    re01 = _re(j0, j1)

    s11 = (re01 * 2 * A_INV + abs_j0 + (_re(dj0, j1) + _re(j0, dj1)) * 2
           + _re(dj0, dj1) * 2 * A - dj0 * dj0.bar() * (A * A))
    s12 = (re01 * 2 * (A_INV * A_INV) + (dj0 * j1.bar() + j0.bar() * dj1) * A_INV
           - dj0 * j0.bar()) * Z
    s21 = (-(re01 * 2) - (dj0.bar() * j1 + j0 * dj1.bar()) * A
           + j0 * dj0.bar() * (A * A)) * Z_INV
    s22 = -(_re(j1, j0) * 2 * A_INV) + abs_j0
    return LoopMatrix([[s11, s12], [s21, s22]], order)


def birkhoff_factorize(s: LoopMatrix) -> BirkhoffFactors:
    """Solve Bt_{n,m} + Ct_{n,m} = S_{n,m} - sum Bt_{i,j} Ct_{n-i,m-j} by z-splitting.

    Bt gets the strictly positive z-powers, Ct the rest (z^0 included), so
    Bt_{0,0} = Ct_{0,0} = 1.
    """
    dim, order = s.dim, s.truncation
    identity = coefficient_identity(dim)
    if s.coefficient(0, 0) != identity:
        raise FactorizationError("S must have identity constant term to be factorized")

    coefficients = s.coefficients()
    btilde: Dict[Tuple[int, int], CoefficientMatrix] = {(0, 0): identity}
    ctilde: Dict[Tuple[int, int], CoefficientMatrix] = {(0, 0): identity}

    degrees = range(1, order + 1)
    if Config.SHOW_PROGRESS and tqdm is not None:
        degrees = tqdm(degrees, desc="Birkhoff", unit="degree")

    for total in degrees:
        for n in range(total + 1):
            m = total - n
            acc = coefficients.get((n, m), coefficient_zero(dim))
            for (i, j), b in btilde.items():
                if (i, j) == (0, 0) or i > n or j > m or (i, j) == (n, m):
                    continue
                c = ctilde.get((n - i, m - j))
                if c is not None:
                    acc = coefficient_sub(acc, coefficient_matmul(b, c))
            if coefficient_is_zero(acc):
                continue
            positive, nonpositive = coefficient_split(acc)
            if not coefficient_is_zero(positive):
                btilde[(n, m)] = positive
            if not coefficient_is_zero(nonpositive):
                ctilde[(n, m)] = nonpositive
        logger.debug(f"Birkhoff degree {total} done: {len(btilde)} Bt and {len(ctilde)} Ct blocks")

    return BirkhoffFactors(
        Btilde=LoopMatrix.from_coefficients(dim, order, btilde),
        Ctilde=LoopMatrix.from_coefficients(dim, order, ctilde),
    )


@lru_cache(maxsize=None)
def factorization(order: int) -> BirkhoffFactors:
    factors = birkhoff_factorize(s_matrix(order))
    logger.info(f"✅ Birkhoff factorization done to order {order}")
    return factors


def factorization_residual(order: int) -> LoopMatrix:
    factors = factorization(order)
    return s_matrix(order) - factors.Btilde @ factors.Ctilde


def b_btilde(order: int) -> LoopMatrix:
    return ConstantFactors(order).B @ factorization(order).Btilde


@lru_cache(maxsize=None)
def frame_phi(order: int) -> LoopMatrix:
    """Q B Bt; the gauge factor e^{t omega/z} stays implicit"""
    return fundamental_matrix(order).Q @ b_btilde(order)


def frame_gauge_normalisation(order: int) -> Dict[Tuple[int, int], CoefficientMatrix]:
    """Blocks where the z^0-part of B Bt differs from the identity; empty since B Bt = 1 + O(z)"""
    bbt = b_btilde(order)
    bad = {}
    for key in bbt.support():
        block = bbt.coefficient(*key)
        z0 = tuple(tuple(ZLoop.constant(x.coefficient(0)) for x in row) for row in block)
        if key == (0, 0):
            z0 = coefficient_sub(z0, coefficient_identity(bbt.dim))
        if not coefficient_is_zero(z0):
            bad[key] = z0
    return bad


def frame_identity_residual(order: int) -> LoopMatrix:
    """Q B Bt Ct C - kappa_tau(Q); zero because kappa_tau(Q) = Q B S C"""
    factors = factorization(order)
    constants = ConstantFactors(order)
    lhs = frame_phi(order) @ factors.Ctilde @ constants.C
    return lhs - GaugedInvolution().apply(fundamental_matrix(order).Q)


def ctilde_c_is_nonpositive(order: int) -> bool:
    """Ct C has no positive z-powers: the frame columns also lie in kappa(F')"""
    product = factorization(order).Ctilde @ ConstantFactors(order).C
    for row in product.rows:
        for entry in row:
            for _, loop in entry.items():
                if any(k > 0 for k in loop.z_exponents()):
                    return False
    return True
