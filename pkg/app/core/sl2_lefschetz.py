"""
Finite-dimensional Lefschetz toolkit.

A GradedSpace is a basis with even real degrees and a raising operator of
degree +2 (cup with an ample class).  With n the middle degree:

  - the lowering operator is fixed on the primitive decomposition by
    a_dag(a^l phi) = l (k + 1 - l) a^{l-1} phi,  phi in PH^{n-k} = ker a^{k+1} on H^{n-k}
  - the weight filtration of a nilpotent N is
    W_k = sum_{j >= max(0, -k)} ker N^{k+1+j} cap im N^j
  - M = e^{-a} e^{a_dag} maps H^{>=n-k} onto H^{<=n+k}, and for u = a^j phi,
    phi in PH^{n-k-2j}, the degree n+k part of M u is (-1)^{k+j} j!/(k+j)! a^{k+j} phi

Matrices are exact sympy matrices except for transcendental involution models,
which fall back to numpy floats.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy
from scipy import linalg

from config import Config
from .exceptions import HardLefschetzError, NotNilpotentError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GradedSpace:
    degrees: Tuple[int, ...]
    raising: sympy.ImmutableMatrix
    n: int
    name: str = ""

    def __post_init__(self):
        size = len(self.degrees)
        if self.raising.shape != (size, size):
            raise ValueError(f"raising operator has shape {self.raising.shape}, expected {(size, size)}")
        if any(d % 2 for d in self.degrees):
            raise ValueError("degrees must be even")
        for i in range(size):
            for j in range(size):
                if self.raising[i, j] != 0 and self.degrees[i] != self.degrees[j] + 2:
                    raise ValueError(f"raising operator is not of degree 2 at entry {(i, j)}")

    @property
    def dim(self) -> int:
        return len(self.degrees)

    def indices(self, degree: int) -> List[int]:
        return [i for i, d in enumerate(self.degrees) if d == degree]

    def indices_where(self, predicate) -> List[int]:
        return [i for i, d in enumerate(self.degrees) if predicate(d)]

    def coordinate_subspace(self, indices: Sequence[int]) -> sympy.Matrix:
        basis = sympy.zeros(self.dim, len(indices))
        for col, i in enumerate(indices):
            basis[i, col] = 1
        return basis

    def grading(self) -> sympy.Matrix:
        return sympy.diag(*[d - self.n for d in self.degrees])

    def check_hard_lefschetz(self) -> None:
        """a^k: H^{n-k} -> H^{n+k} is an isomorphism for every k >= 0"""
        for k in range(0, max(self.degrees) - self.n + 1):
            src, dst = self.indices(self.n - k), self.indices(self.n + k)
            if len(src) != len(dst):
                raise HardLefschetzError(f"dim H^{self.n - k} = {len(src)} but dim H^{self.n + k} = {len(dst)}")
            if not src:
                continue
            block = (self.raising ** k).extract(dst, src)
            if block.rank() != len(src):
                raise HardLefschetzError(f"a^{k}: H^{self.n - k} -> H^{self.n + k} is not an isomorphism")


@dataclass(frozen=True)
class Sl2Triple:
    raising: sympy.Matrix
    lowering: sympy.Matrix
    grading: sympy.Matrix

    def commutator_residuals(self) -> Dict[str, sympy.Matrix]:
        a, b, h = self.raising, self.lowering, self.grading
        return {
            '[a, a_dag] = h': a * b - b * a - h,
            '[h, a] = 2a': h * a - a * h - 2 * a,
            '[h, a_dag] = -2a_dag': h * b - b * h + 2 * b,
        }

    def is_valid(self) -> bool:
        return all(m.is_zero_matrix for m in self.commutator_residuals().values())


@dataclass
class WeightFiltration:
    subspaces: Dict[int, sympy.Matrix]

    def dimension(self, k: int) -> int:
        keys = sorted(self.subspaces)
        if k < keys[0]:
            return 0
        if k > keys[-1]:
            return self.subspaces[keys[-1]].shape[0]
        return _rank(self.subspaces[k])

    def graded_dimensions(self) -> Dict[int, int]:
        return {k: self.dimension(k) - self.dimension(k - 1) for k in sorted(self.subspaces)}

    def weights(self) -> List[int]:
        out = []
        for k, d in self.graded_dimensions().items():
            out.extend([k] * d)
        return out


@dataclass
class ExpLemmaReport:
    space: str
    image_checks: Dict[int, bool] = field(default_factory=dict)
    leading_checks: Dict[Tuple[int, int, int], bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.image_checks.values()) and all(self.leading_checks.values())


@dataclass
class TransversalityReport:
    space: str
    k: int
    model: str
    expected_rank: int
    ranks: Dict[float, int] = field(default_factory=dict)
    intersection_dims: Dict[float, int] = field(default_factory=dict)

    @property
    def full_rank(self) -> Dict[float, bool]:
        return {t: r == self.expected_rank for t, r in self.ranks.items()}

    @property
    def t0(self) -> Optional[float]:
        """Smallest sampled t from which every larger sample has full rank"""
        passing = None
        for t in sorted(self.ranks, reverse=True):
            if self.ranks[t] != self.expected_rank:
                break
            passing = t
        return passing

    @property
    def degenerate(self) -> List[float]:
        return [t for t, d in self.intersection_dims.items() if d != self.expected_rank]


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------

def projective_space(n: int) -> GradedSpace:
    """H*(P^n) = Q[w]/w^{n+1} with a = w cup"""
    if n < 0:
        raise ValueError("n must be >= 0")
    raising = sympy.zeros(n + 1, n + 1)
    for i in range(n):
        raising[i + 1, i] = 1
    return GradedSpace(tuple(2 * i for i in range(n + 1)), sympy.ImmutableMatrix(raising), n, f"P{n}")


def product_space(left: GradedSpace, right: GradedSpace) -> GradedSpace:
    """Kunneth: degrees add, a = a_left x 1 + 1 x a_right"""
    degrees = tuple(dl + dr for dl in left.degrees for dr in right.degrees)
    raising = _kron(left.raising, sympy.eye(right.dim)) + _kron(sympy.eye(left.dim), right.raising)
    return GradedSpace(degrees, sympy.ImmutableMatrix(raising), left.n + right.n,
                       f"{left.name}x{right.name}")


def parse_space(text: str) -> GradedSpace:
    """'P3' or 'P1xP1'"""
    factors = [f.strip() for f in text.split('x')]
    spaces = []
    for f in factors:
        if not f.upper().startswith('P') or not f[1:].isdigit():
            raise ValueError(f"unknown space {text!r}; use Pn or PnxPm")
        spaces.append(projective_space(int(f[1:])))
    space = spaces[0]
    for other in spaces[1:]:
        space = product_space(space, other)
    return space


def _kron(a: sympy.Matrix, b: sympy.Matrix) -> sympy.Matrix:
    out = sympy.zeros(a.rows * b.rows, a.cols * b.cols)
    for i in range(a.rows):
        for j in range(a.cols):
            if a[i, j] != 0:
                out[i * b.rows:(i + 1) * b.rows, j * b.cols:(j + 1) * b.cols] = a[i, j] * b
    return out


# ---------------------------------------------------------------------------
# Linear algebra helpers
# ---------------------------------------------------------------------------

def _rank(m) -> int:
    if isinstance(m, np.ndarray):
        return int(np.linalg.matrix_rank(m, tol=Config.NUMERIC_TOL)) if m.size else 0
    return m.rank() if m.shape[1] else 0


def _column_basis(m: sympy.Matrix, dim: int) -> sympy.Matrix:
    cols = m.columnspace() if m.shape[1] else []
    return sympy.Matrix.hstack(*cols) if cols else sympy.zeros(dim, 0)


def _intersection(a: sympy.Matrix, b: sympy.Matrix) -> sympy.Matrix:
    dim = a.shape[0]
    if a.shape[1] == 0 or b.shape[1] == 0:
        return sympy.zeros(dim, 0)
    kernel = sympy.Matrix.hstack(a, -b).nullspace()
    vectors = [a * v[:a.shape[1], :] for v in kernel]
    return _column_basis(sympy.Matrix.hstack(*vectors), dim) if vectors else sympy.zeros(dim, 0)


def _intersection_float(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] == 0 or b.shape[1] == 0:
        return np.zeros((a.shape[0], 0))
    kernel = linalg.null_space(np.hstack([a, -b]), rcond=Config.NUMERIC_TOL)
    return a @ kernel[:a.shape[1], :]


def _same_subspace(a: sympy.Matrix, b: sympy.Matrix) -> bool:
    ra, rb = _rank(a), _rank(b)
    return ra == rb and _rank(sympy.Matrix.hstack(a, b)) == ra


def nilpotent_exp(m: sympy.Matrix, scale=1):
    """exp(scale * m) for nilpotent m"""
    size = m.shape[0]
    result = sympy.eye(size)
    power = sympy.eye(size)
    for i in range(1, size + 1):
        power = power * m * scale / i
        if power.is_zero_matrix:
            break
        result += power
    return result


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def primitive_basis(space: GradedSpace, k: int) -> List[sympy.Matrix]:
    """Basis of PH^{n-k} = ker a^{k+1} on H^{n-k}"""
    src = space.indices(space.n - k)
    if not src:
        return []
    block = (space.raising ** (k + 1))[:, src]
    out = []
    for v in block.nullspace():
        full = sympy.zeros(space.dim, 1)
        for pos, i in enumerate(src):
            full[i, 0] = v[pos]
        out.append(full)
    return out


def lefschetz_triple(space: GradedSpace) -> Sl2Triple:
    space.check_hard_lefschetz()
    a = sympy.Matrix(space.raising)
    columns, images = [], []
    for k in range(0, space.n - min(space.degrees) + 1):
        for phi in primitive_basis(space, k):
            chain = [phi]
            for _ in range(k):
                chain.append(a * chain[-1])
            for l in range(k + 1):
                columns.append(chain[l])
                images.append(l * (k + 1 - l) * chain[l - 1] if l else sympy.zeros(space.dim, 1))
    basis = sympy.Matrix.hstack(*columns)
    if basis.shape != (space.dim, space.dim) or basis.rank() != space.dim:
        raise HardLefschetzError(f"primitive decomposition of {space.name} does not span")
    lowering = sympy.Matrix.hstack(*images) * basis.inv()
    triple = Sl2Triple(raising=a, lowering=lowering, grading=space.grading())
    if not triple.is_valid():
        raise HardLefschetzError(f"sl2 relations fail on {space.name}")
    logger.debug(f"Lefschetz triple built on {space.name}")
    return triple


def weight_filtration(nilpotent: sympy.Matrix) -> WeightFiltration:
    nilpotent = sympy.Matrix(nilpotent)
    size = nilpotent.shape[0]
    if not (nilpotent ** size).is_zero_matrix:
        raise NotNilpotentError("operator is not nilpotent")
    index = next(m for m in range(size + 1) if (nilpotent ** m).is_zero_matrix)
    top = max(index - 1, 0)

    def kernel(m):
        basis = m.nullspace()
        return sympy.Matrix.hstack(*basis) if basis else sympy.zeros(size, 0)

    def image(m):
        return _column_basis(m, size)

    subspaces = {}
    for k in range(-top, top + 1):
        pieces = []
        for j in range(max(0, -k), index + 1):
            pieces.append(_intersection(kernel(nilpotent ** (k + 1 + j)), image(nilpotent ** j)))
        stacked = sympy.Matrix.hstack(*pieces)
        subspaces[k] = _column_basis(stacked, size)
    return WeightFiltration(subspaces)


def verify_weight_filtration(nilpotent: sympy.Matrix, filtration: WeightFiltration) -> bool:
    """N W_k in W_{k-2}, and N^k: Gr_k -> Gr_{-k} an isomorphism for k >= 0"""
    nilpotent = sympy.Matrix(nilpotent)
    size = nilpotent.shape[0]

    def space(k):
        if k in filtration.subspaces:
            return filtration.subspaces[k]
        keys = sorted(filtration.subspaces)
        return sympy.zeros(size, 0) if k < keys[0] else sympy.eye(size)

    for k in filtration.subspaces:
        w, lower = space(k), space(k - 2)
        if w.shape[1] and _rank(sympy.Matrix.hstack(lower, nilpotent * w)) != _rank(lower):
            return False
    for k in (k for k in filtration.subspaces if k >= 0):
        gr_k = filtration.dimension(k) - filtration.dimension(k - 1)
        gr_minus = filtration.dimension(-k) - filtration.dimension(-k - 1)
        if gr_k != gr_minus:
            return False
        below = space(-k - 1)
        mapped = (nilpotent ** k) * space(k)
        if _rank(sympy.Matrix.hstack(below, mapped)) - _rank(below) != gr_k:
            return False
    return True


def lefschetz_filtration_matches(space: GradedSpace) -> Dict[str, bool]:
    """W(a)_k = H^{>=n-k} and W(a_dag)_k = H^{<=n+k}"""
    triple = lefschetz_triple(space)
    w_raise = weight_filtration(triple.raising)
    w_lower = weight_filtration(triple.lowering)
    ok_raise, ok_lower = True, True
    for k in w_raise.subspaces:
        expected = space.coordinate_subspace(space.indices_where(lambda d: d >= space.n - k))
        ok_raise &= _same_subspace(w_raise.subspaces[k], expected)
    for k in w_lower.subspaces:
        expected = space.coordinate_subspace(space.indices_where(lambda d: d <= space.n + k))
        ok_lower &= _same_subspace(w_lower.subspaces[k], expected)
    return {
        'raising': ok_raise and verify_weight_filtration(triple.raising, w_raise),
        'lowering': ok_lower and verify_weight_filtration(triple.lowering, w_lower),
    }


def exp_lemma_check(space: GradedSpace) -> ExpLemmaReport:
    triple = lefschetz_triple(space)
    a = triple.raising
    m = nilpotent_exp(a, -1) * nilpotent_exp(triple.lowering, 1)
    report = ExpLemmaReport(space=space.name)
    span = max(space.degrees) - space.n

    for k in range(-span, span + 1):
        src = space.indices_where(lambda d: d >= space.n - k)
        dst = set(space.indices_where(lambda d: d <= space.n + k))
        image = m[:, src] if src else sympy.zeros(space.dim, 0)
        outside = [i for i in range(space.dim) if i not in dst]
        stays = all(image[i, j] == 0 for i in outside for j in range(image.shape[1]))
        report.image_checks[k] = stays and _rank(image) == len(dst) == len(src)

    for big_k in range(0, space.n - min(space.degrees) + 1):
        for phi in primitive_basis(space, big_k):
            for j in range(big_k + 1):
                k = big_k - 2 * j
                u = (a ** j) * phi
                mu = m * u
                top = space.indices(space.n + k)
                higher = space.indices_where(lambda d: d > space.n + k)
                coefficient = sympy.Rational((-1) ** (k + j) * math.factorial(j), math.factorial(k + j))
                expected = coefficient * (a ** (k + j)) * phi
                ok = all(mu[i] == expected[i] for i in top) and all(mu[i] == 0 for i in higher)
                report.leading_checks[(big_k, j, k)] = ok
    if report.passed:
        logger.info(f"✅ Exponential lemma holds on {space.name}")
    else:
        logger.error(f"❌ Exponential lemma fails on {space.name}")
    return report


# ---------------------------------------------------------------------------
# Involution models and transversality
# ---------------------------------------------------------------------------

class KappaModel:
    """Degree-compatible real involution with leading term (-1)^{deg/2} on H^deg"""
    name = "kappa"
    exact = True

    def matrix(self, space: GradedSpace):
        raise NotImplementedError

    def sign(self, space: GradedSpace) -> sympy.Matrix:
        return sympy.diag(*[(-1) ** (d // 2) for d in space.degrees])


class SignKappa(KappaModel):
    name = "sign"

    def matrix(self, space):
        return self.sign(space)


class ShiftedKappa(KappaModel):
    """e^{c a} composed with the sign model; an involution for every real c"""

    def __init__(self, c=sympy.Rational(-2)):
        self.c = sympy.nsimplify(c)
        self.name = f"shifted({self.c})"

    def matrix(self, space):
        return nilpotent_exp(sympy.Matrix(space.raising), self.c) * self.sign(space)


class GammaKappa(KappaModel):
    """c = -4 gamma, the shape of kappa_V on P^1; floating point"""
    name = "gamma"
    exact = False

    def __init__(self, euler_gamma: float = None):
        self.euler_gamma = Config.EULER_GAMMA if euler_gamma is None else euler_gamma

    def matrix(self, space):
        a = np.array(space.raising, dtype=float)
        exp_a = linalg.expm(-4 * self.euler_gamma * a)
        return exp_a @ np.array(self.sign(space), dtype=float)


KAPPA_MODELS = {'sign': SignKappa, 'shifted': ShiftedKappa, 'gamma': GammaKappa}


def _transversality_map(space: GradedSpace, kappa, k: int, exp_matrix, exact: bool):
    """(dim of intersection, rank of its projection to H^{n-k})"""
    low = space.coordinate_subspace(space.indices_where(lambda d: d <= space.n - k))
    high = space.coordinate_subspace(space.indices_where(lambda d: d <= space.n + k))
    middle = space.indices(space.n - k)
    if exact:
        target = exp_matrix * kappa * high
        inter = _intersection(low, target)
        projection = inter.extract(middle, list(range(inter.shape[1]))) if inter.shape[1] else sympy.zeros(len(middle), 0)
    else:
        target = exp_matrix @ kappa @ np.array(high, dtype=float)
        inter = _intersection_float(np.array(low, dtype=float), target)
        projection = inter[middle, :]
    return _rank(inter), _rank(projection)


def transversality_rank(space: GradedSpace, kappa_model: KappaModel = None,
                        t_values: Sequence[float] = (0.1, 1, 10), k: Optional[int] = None) -> TransversalityReport:
    """Rank of H^{<=n-k} cap e^{2ta} kappa(H^{<=n+k}) -> H^{n-k} at each t"""
    kappa_model = kappa_model or SignKappa()
    k = (space.n % 2) if k is None else k
    if not space.indices(space.n - k):
        raise ValueError(f"H^{space.n - k} is zero on {space.name}")
    report = TransversalityReport(space=space.name, k=k, model=kappa_model.name,
                                  expected_rank=len(space.indices(space.n - k)))
    kappa = kappa_model.matrix(space)
    a = sympy.Matrix(space.raising)
    for t in t_values:
        if kappa_model.exact:
            exp_matrix = nilpotent_exp(a, 2 * sympy.nsimplify(t))
        else:
            exp_matrix = linalg.expm(2 * float(t) * np.array(a, dtype=float))
        dim, rank = _transversality_map(space, kappa, k, exp_matrix, kappa_model.exact)
        report.intersection_dims[t] = dim
        report.ranks[t] = rank
    if report.degenerate:
        logger.warning(f"⚠️ Degenerate intersections on {space.name} (k={k}) at t = {report.degenerate}")
    logger.info(f"Transversality on {space.name}, k={k}, {kappa_model.name}: t0 = {report.t0}")
    return report


def limit_transversality(space: GradedSpace, k: Optional[int] = None) -> Dict[str, object]:
    """The t -> infinity map: rescaling H^{2i} by t^i turns e^{2ta} into e^{2a} and fixes the sign model"""
    k = (space.n % 2) if k is None else k
    a = sympy.Matrix(space.raising)
    sign = SignKappa().matrix(space)
    dim, rank = _transversality_map(space, sign, k, nilpotent_exp(a, 2), True)
    expected = len(space.indices(space.n - k))
    return {'space': space.name, 'k': k, 'intersection_dim': dim, 'rank': rank,
            'expected_rank': expected, 'invertible': rank == expected == dim}
