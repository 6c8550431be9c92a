"""
Gamma-integral structure of P^1.

K(P^1) is modelled by (rank, degree) with [O(n)] = [O] + n[O_pt].  Vectors of
H*(P^1) are numpy complex arrays in the basis (1, omega).  This is the only
place where gamma, pi and i enter as floats; the symbolic pipeline never sees
them.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable

import numpy as np

from config import Config

logger = logging.getLogger(__name__)

SQRT_2PI = np.sqrt(2 * np.pi)

# (x, y)_orb = x_1 y_omega + x_omega y_1
ORB_PAIRING = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True)
class KClass:
    rank: int
    degree: int

    @classmethod
    def line_bundle(cls, n: int) -> "KClass":
        return cls(1, n)

    @classmethod
    def point(cls) -> "KClass":
        return cls(0, 1)

    def dual(self) -> "KClass":
        return KClass(self.rank, -self.degree)

    def tensor(self, other: "KClass") -> "KClass":
        # ch multiplies: (r1 + d1 w)(r2 + d2 w) with w^2 = 0
        return KClass(self.rank * other.rank, self.rank * other.degree + other.rank * self.degree)

    def __add__(self, other: "KClass") -> "KClass":
        return KClass(self.rank + other.rank, self.degree + other.degree)

    def __sub__(self, other: "KClass") -> "KClass":
        return KClass(self.rank - other.rank, self.degree - other.degree)

    def __mul__(self, k: int) -> "KClass":
        return KClass(k * self.rank, k * self.degree)

    __rmul__ = __mul__

    def __str__(self):
        return f"KClass(rank={self.rank}, degree={self.degree})"


@dataclass(frozen=True)
class InvolutionMatrices:
    """kappa_V = [[1,0],[-4g,-1]] o conj ; kappa_H(z) = [[z,0],[-4g,-1/z]] o conj"""
    euler_gamma: float

    @property
    def kappa_v(self) -> np.ndarray:
        return np.array([[1, 0], [-4 * self.euler_gamma, -1]], dtype=complex)

    def kappa_h(self, z: complex) -> np.ndarray:
        return np.array([[z, 0], [-4 * self.euler_gamma, -1 / z]], dtype=complex)


def involutions(euler_gamma: float = None) -> InvolutionMatrices:
    return InvolutionMatrices(Config.EULER_GAMMA if euler_gamma is None else euler_gamma)


def chern_character(v: KClass) -> np.ndarray:
    return np.array([v.rank, v.degree], dtype=complex)


def euler_characteristic(v: KClass) -> int:
    """Riemann-Roch on P^1: chi = integral of ch(V) td(P^1) = rank + degree"""
    return v.rank + v.degree


def gamma_class(euler_gamma: float = None) -> np.ndarray:
    """Gamma-hat of P^1: exp(-gamma c_1) = 1 - 2 gamma omega"""
    euler_gamma = Config.EULER_GAMMA if euler_gamma is None else euler_gamma
    return np.array([1, -2 * euler_gamma], dtype=complex)


def cup(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.array([x[0] * y[0], x[0] * y[1] + x[1] * y[0]], dtype=complex)


def psi_map(v: KClass, euler_gamma: float = None) -> np.ndarray:
    """(2 pi)^{-1/2} Gamma-hat cup (2 pi i)^{deg/2} ch(V), principal branches"""
    twisted = chern_character(v) * np.array([1, 2j * np.pi])
    return cup(gamma_class(euler_gamma), twisted) / SQRT_2PI


def mukai_pairing(v1: KClass, v2: KClass) -> int:
    """chi(V2^dual tensor V1), computed exactly"""
    return euler_characteristic(v2.dual().tensor(v1))


def exp_pi_i_rho() -> np.ndarray:
    # rho = 2 omega cup, nilpotent
    return np.array([[1, 0], [2j * np.pi, 1]], dtype=complex)


def exp_pi_i_mu() -> np.ndarray:
    return np.diag([np.exp(-0.5j * np.pi), np.exp(0.5j * np.pi)])


def pairing_V(alpha: np.ndarray, beta: np.ndarray) -> complex:
    """(e^{pi i rho} alpha, e^{pi i mu} beta)_orb"""
    x = exp_pi_i_rho() @ np.asarray(alpha, dtype=complex)
    y = exp_pi_i_mu() @ np.asarray(beta, dtype=complex)
    return complex(x @ ORB_PAIRING @ y)


def galois_matrix() -> np.ndarray:
    """e^{-2 pi i omega}"""
    return np.array([[1, 0], [-2j * np.pi, 1]], dtype=complex)


def galois_check(v: KClass, euler_gamma: float = None) -> float:
    """|Psi(V tensor O(-1)) - e^{-2 pi i omega} Psi(V)|"""
    shifted = psi_map(v.tensor(KClass.line_bundle(-1)), euler_gamma)
    expected = galois_matrix() @ psi_map(v, euler_gamma)
    return float(np.max(np.abs(shifted - expected)))


def kappa_v_apply(x: np.ndarray, euler_gamma: float = None) -> np.ndarray:
    return involutions(euler_gamma).kappa_v @ np.conj(np.asarray(x, dtype=complex))


def kappa_h_apply(value: np.ndarray, z: complex, euler_gamma: float = None) -> np.ndarray:
    """kappa_H applied pointwise on |z| = 1 to the value f(z) of a loop"""
    if abs(abs(z) - 1) > Config.INVOLUTION_TOL:
        raise ValueError(f"kappa_H is defined on |z| = 1, got |z| = {abs(z)}")
    return involutions(euler_gamma).kappa_h(z) @ np.conj(np.asarray(value, dtype=complex))


def kappa_v_square_residual(euler_gamma: float = None) -> float:
    k = involutions(euler_gamma).kappa_v
    return float(np.max(np.abs(k @ np.conj(k) - np.eye(2))))


def real_form_residual(coefficients: Iterable[float], euler_gamma: float = None) -> float:
    """|kappa_V(x) - x| for x = c0 Psi(O) + c1 Psi(O_pt) with real c0, c1"""
    c0, c1 = coefficients
    x = c0 * psi_map(KClass.line_bundle(0), euler_gamma) + c1 * psi_map(KClass.point(), euler_gamma)
    return float(np.max(np.abs(kappa_v_apply(x, euler_gamma) - x)))


def gram_matrix(euler_gamma: float = None) -> Dict[str, object]:
    """Gram matrix on {O, O_pt} by Riemann-Roch and by the pairing formula"""
    basis = [KClass.line_bundle(0), KClass.point()]
    exact = [[mukai_pairing(v1, v2) for v2 in basis] for v1 in basis]
    vectors = [psi_map(v, euler_gamma) for v in basis]
    numeric = np.array([[pairing_V(x, y) for y in vectors] for x in vectors])
    rounded = np.rint(numeric.real).astype(int)
    residual = float(np.max(np.abs(numeric - np.array(exact))))
    integrality = float(np.max(np.abs(numeric - rounded)))
    determinant = int(round(np.linalg.det(np.array(exact, dtype=float))))
    logger.debug(f"Gram residual {residual:.3e}, integrality {integrality:.3e}")
    return {
        'riemann_roch': exact,
        'pairing_formula': numeric,
        'rounded': rounded.tolist(),
        'residual': residual,
        'integrality_error': integrality,
        'determinant': determinant,
    }
