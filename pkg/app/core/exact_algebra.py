"""
Exact coefficient rings for the tt* pipeline.

Every symbolic computation in the package runs on the types defined here:

  ExactScalar   fractions.Fraction, always in lowest terms
  APoly         Laurent polynomial in the real variable a = -t1 - conj(t1) - 4*gamma
  ZLoop         Laurent polynomial in the loop variable z with APoly coefficients
  BiSeries      power series in q, qbar truncated at total degree n + m <= N,
                with ZLoop coefficients
  LoopMatrix    square matrix of BiSeries sharing one truncation

All values are immutable; every operation returns a new value with zero
coefficients pruned.  The Euler constant never appears: the whole pipeline is
written in the single variable a (see app/core/birkhoff.py).

On the unit circle complex conjugation sends z to 1/z and q to qbar while
fixing a and the rational coefficients; `BiSeries.bar` implements exactly that.
"""

from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .exceptions import NonUnitError, SeriesDomainError, TruncationMismatchError

logger = logging.getLogger(__name__)

ExactScalar = Fraction
Rational = Union[int, Fraction]


def to_scalar(value) -> Fraction:
    """Coerce an int, Fraction or "p/q" string to an exact scalar"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_scalar(value)
    raise TypeError(f"Cannot use {type(value).__name__} as an exact scalar")


def parse_scalar(text: str) -> Fraction:
    """Parse the "p/q" (or bare "p") form used in JSON and CSV output"""
    cleaned = text.strip()
    if any(ch in cleaned for ch in '.eE'):
        raise ValueError(f"Exact scalars must be written p/q, got {text!r}")
    return Fraction(cleaned)


def format_scalar(value: Fraction) -> str:
    """Canonical "p/q" string; integers keep the "/1" so the form is uniform"""
    value = to_scalar(value)
    return f"{value.numerator}/{value.denominator}"


# ---------------------------------------------------------------------------
# Laurent polynomials in a
# ---------------------------------------------------------------------------

def _normalize(num: Dict[int, int], den: int) -> Tuple[Dict[int, int], int]:
    num = {k: c for k, c in num.items() if c}
    if not num:
        return {}, 1
    if den < 0:
        num = {k: -c for k, c in num.items()}
        den = -den
    g = math.gcd(den, *num.values())
    if g != 1:
        num = {k: c // g for k, c in num.items()}
        den //= g
    return num, den


class APoly:
    """Laurent polynomial in `a` over the rationals.

    Stored as integer numerators over a single positive denominator, which is
    coprime to the numerators as a whole.  Exponents may be negative.
    """

    __slots__ = ("_num", "_den", "_hash")

    def __init__(self, terms: Optional[Mapping[int, Rational]] = None):
        fractions = {int(k): to_scalar(v) for k, v in (terms or {}).items()}
        den = math.lcm(*(f.denominator for f in fractions.values())) if fractions else 1
        num = {k: f.numerator * (den // f.denominator) for k, f in fractions.items()}
        self._num, self._den = _normalize(num, den)
        self._hash = None

    @classmethod
    def _make(cls, num: Dict[int, int], den: int) -> "APoly":
        obj = cls.__new__(cls)
        obj._num, obj._den = _normalize(num, den)
        obj._hash = None
        return obj

    # constructors
    @classmethod
    def zero(cls) -> "APoly":
        return cls._make({}, 1)

    @classmethod
    def one(cls) -> "APoly":
        return cls._make({0: 1}, 1)

    @classmethod
    def constant(cls, value: Rational) -> "APoly":
        value = to_scalar(value)
        return cls._make({0: value.numerator}, value.denominator)

    @classmethod
    def var(cls) -> "APoly":
        return cls._make({1: 1}, 1)

    @classmethod
    def monomial(cls, exponent: int, coefficient: Rational = 1) -> "APoly":
        coefficient = to_scalar(coefficient)
        return cls._make({exponent: coefficient.numerator}, coefficient.denominator)

    # inspection
    @property
    def terms(self) -> Dict[int, Fraction]:
        return {k: Fraction(c, self._den) for k, c in self._num.items()}

    def items(self) -> List[Tuple[int, Fraction]]:
        return [(k, Fraction(self._num[k], self._den)) for k in sorted(self._num)]

    def coefficient(self, exponent: int) -> Fraction:
        return Fraction(self._num.get(exponent, 0), self._den)

    def exponents(self) -> List[int]:
        return sorted(self._num)

    def is_zero(self) -> bool:
        return not self._num

    def __bool__(self) -> bool:
        return bool(self._num)

    def __len__(self) -> int:
        return len(self._num)

    def degree(self) -> Optional[int]:
        return max(self._num) if self._num else None

    def valuation(self) -> Optional[int]:
        return min(self._num) if self._num else None

    def leading_coefficient(self) -> Fraction:
        if not self._num:
            return Fraction(0)
        return self.coefficient(max(self._num))

    def is_polynomial(self) -> bool:
        return not self._num or min(self._num) >= 0

    def is_constant(self) -> bool:
        return not self._num or set(self._num) == {0}

    def is_unit(self) -> bool:
        """Units of Q[a, 1/a] are the nonzero monomials"""
        return len(self._num) == 1

    # arithmetic
    @staticmethod
    def _coerce(other) -> Optional["APoly"]:
        if isinstance(other, APoly):
            return other
        if isinstance(other, (int, Fraction)):
            return APoly.constant(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if not other._num:
            return self
        if not self._num:
            return other
        den = math.lcm(self._den, other._den)
        f1, f2 = den // self._den, den // other._den
        num = {k: c * f1 for k, c in self._num.items()}
        for k, c in other._num.items():
            num[k] = num.get(k, 0) + c * f2
        return APoly._make(num, den)

    __radd__ = __add__

    def __neg__(self) -> "APoly":
        return APoly._make({k: -c for k, c in self._num.items()}, self._den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = to_scalar(other)
            return APoly._make({k: c * other.numerator for k, c in self._num.items()},
                               self._den * other.denominator)
        if not isinstance(other, APoly):
            return NotImplemented
        if not self._num or not other._num:
            return APoly.zero()
        num: Dict[int, int] = {}
        for i, x in self._num.items():
            for j, y in other._num.items():
                num[i + j] = num.get(i + j, 0) + x * y
        return APoly._make(num, self._den * other._den)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "APoly":
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = APoly.one()
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def inverse(self) -> "APoly":
        if not self.is_unit():
            raise NonUnitError(f"{self} is not a unit of Q[a, 1/a]")
        (k, c), = self._num.items()
        value = Fraction(self._den, c)
        return APoly._make({-k: value.numerator}, value.denominator)

    def derivative(self) -> "APoly":
        """d/da"""
        return APoly._make({k - 1: k * c for k, c in self._num.items() if k}, self._den)

    def evaluate(self, x: float) -> float:
        """Floating-point evaluation, used only by the numerical layer"""
        return sum(float(c) * x ** k for k, c in self.items())

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self._den == other._den and self._num == other._num

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((frozenset(self._num.items()), self._den))
        return self._hash

    def __repr__(self) -> str:
        return f"APoly({self})"

    def __str__(self) -> str:
        if not self._num:
            return "0"
        parts = []
        for k, c in sorted(self.items(), reverse=True):
            if k == 0:
                mono = ""
            elif k == 1:
                mono = "a"
            else:
                mono = f"a^{k}"
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def _as_apoly(value) -> APoly:
    if isinstance(value, APoly):
        return value
    return APoly.constant(value)


# ---------------------------------------------------------------------------
# Laurent polynomials in z
# ---------------------------------------------------------------------------

class ZLoop:
    """Laurent polynomial in the loop variable z with APoly coefficients"""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Optional[Mapping[int, Union[APoly, Rational]]] = None):
        cleaned = {}
        for k, c in (terms or {}).items():
            c = _as_apoly(c)
            if c:
                cleaned[int(k)] = c
        self._terms = cleaned
        self._hash = None

    @classmethod
    def _make(cls, terms: Dict[int, APoly]) -> "ZLoop":
        obj = cls.__new__(cls)
        obj._terms = {k: c for k, c in terms.items() if c}
        obj._hash = None
        return obj

    @classmethod
    def zero(cls) -> "ZLoop":
        return cls._make({})

    @classmethod
    def one(cls) -> "ZLoop":
        return cls._make({0: APoly.one()})

    @classmethod
    def constant(cls, value) -> "ZLoop":
        return cls._make({0: _as_apoly(value)})

    @classmethod
    def monomial(cls, exponent: int, coefficient=1) -> "ZLoop":
        return cls._make({exponent: _as_apoly(coefficient)})

    @property
    def terms(self) -> Dict[int, APoly]:
        return dict(self._terms)

    def items(self) -> List[Tuple[int, APoly]]:
        return [(k, self._terms[k]) for k in sorted(self._terms)]

    def coefficient(self, exponent: int) -> APoly:
        return self._terms.get(exponent, APoly.zero())

    def z_exponents(self) -> List[int]:
        return sorted(self._terms)

    def constant_term(self) -> APoly:
        return self.coefficient(0)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_z_free(self) -> bool:
        return not self._terms or set(self._terms) == {0}

    def is_unit(self) -> bool:
        if len(self._terms) != 1:
            return False
        (c,) = self._terms.values()
        return c.is_unit()

    def inverse(self) -> "ZLoop":
        if not self.is_unit():
            raise NonUnitError(f"{self} is not a unit of the loop ring")
        (k, c), = self._terms.items()
        return ZLoop._make({-k: c.inverse()})

    @staticmethod
    def _coerce(other) -> Optional["ZLoop"]:
        if isinstance(other, ZLoop):
            return other
        if isinstance(other, (APoly, int, Fraction)):
            return ZLoop.constant(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if not other._terms:
            return self
        terms = dict(self._terms)
        for k, c in other._terms.items():
            terms[k] = terms[k] + c if k in terms else c
        return ZLoop._make(terms)

    __radd__ = __add__

    def __neg__(self) -> "ZLoop":
        return ZLoop._make({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (APoly, int, Fraction)):
            if isinstance(other, (int, Fraction)) and other == 1:
                return self
            return ZLoop._make({k: c * other for k, c in self._terms.items()})
        if not isinstance(other, ZLoop):
            return NotImplemented
        terms: Dict[int, APoly] = {}
        for i, x in self._terms.items():
            for j, y in other._terms.items():
                p = x * y
                terms[i + j] = terms[i + j] + p if i + j in terms else p
        return ZLoop._make(terms)

    __rmul__ = __mul__

    def split(self) -> Tuple["ZLoop", "ZLoop"]:
        """(strictly positive z-part, non-positive z-part)"""
        pos = {k: c for k, c in self._terms.items() if k >= 1}
        nonpos = {k: c for k, c in self._terms.items() if k <= 0}
        return ZLoop._make(pos), ZLoop._make(nonpos)

    def reflect(self) -> "ZLoop":
        """z -> -z"""
        return ZLoop._make({k: (-c if k % 2 else c) for k, c in self._terms.items()})

    def conjugate(self) -> "ZLoop":
        """Complex conjugation on |z| = 1: z -> 1/z, real coefficients fixed"""
        return ZLoop._make({-k: c for k, c in self._terms.items()})

    def map_coefficients(self, func: Callable[[APoly], APoly]) -> "ZLoop":
        return ZLoop._make({k: func(c) for k, c in self._terms.items()})

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"ZLoop({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for k, c in self.items():
            if k == 0:
                parts.append(f"({c})")
            elif k == 1:
                parts.append(f"({c})*z")
            else:
                parts.append(f"({c})*z^{k}")
        return " + ".join(parts)


def _as_zloop(value) -> ZLoop:
    if isinstance(value, ZLoop):
        return value
    return ZLoop.constant(value)


def z_split(p: ZLoop) -> Tuple[ZLoop, ZLoop]:
    """Split into strictly positive and non-positive powers of z; the two parts sum to p"""
    return p.split()


# ---------------------------------------------------------------------------
# Truncated series in q, qbar
# ---------------------------------------------------------------------------

Index = Tuple[int, int]


class BiSeries:
    """Sum of c_{n,m} q^n qbar^m over n + m <= truncation, c_{n,m} a ZLoop"""

    __slots__ = ("truncation", "_terms", "_hash")

    def __init__(self, truncation: int, terms: Optional[Mapping[Index, object]] = None):
        if truncation < 0:
            raise ValueError(f"truncation must be >= 0, got {truncation}")
        self.truncation = int(truncation)
        cleaned: Dict[Index, ZLoop] = {}
        for (n, m), c in (terms or {}).items():
            if n < 0 or m < 0:
                raise ValueError(f"negative series index {(n, m)}")
            if n + m > truncation:
                continue
            c = _as_zloop(c)
            if c:
                cleaned[(int(n), int(m))] = c
        self._terms = cleaned
        self._hash = None

    @classmethod
    def _make(cls, truncation: int, terms: Dict[Index, ZLoop]) -> "BiSeries":
        obj = cls.__new__(cls)
        obj.truncation = truncation
        obj._terms = {k: c for k, c in terms.items() if c and k[0] + k[1] <= truncation}
        obj._hash = None
        return obj

    @classmethod
    def zero(cls, truncation: int) -> "BiSeries":
        return cls._make(truncation, {})

    @classmethod
    def one(cls, truncation: int) -> "BiSeries":
        return cls._make(truncation, {(0, 0): ZLoop.one()})

    @classmethod
    def constant(cls, truncation: int, value) -> "BiSeries":
        return cls._make(truncation, {(0, 0): _as_zloop(value)})

    @classmethod
    def q(cls, truncation: int) -> "BiSeries":
        return cls._make(truncation, {(1, 0): ZLoop.one()})

    @classmethod
    def qbar(cls, truncation: int) -> "BiSeries":
        return cls._make(truncation, {(0, 1): ZLoop.one()})

    @classmethod
    def monomial(cls, truncation: int, n: int, m: int, value=1) -> "BiSeries":
        return cls(truncation, {(n, m): value})

    # inspection
    @property
    def terms(self) -> Dict[Index, ZLoop]:
        return dict(self._terms)

    def items(self) -> List[Tuple[Index, ZLoop]]:
        return [(k, self._terms[k]) for k in sorted(self._terms, key=lambda nm: (nm[0] + nm[1], nm))]

    def coefficient(self, n: int, m: int) -> ZLoop:
        return self._terms.get((n, m), ZLoop.zero())

    def support(self) -> List[Index]:
        return sorted(self._terms)

    def constant_term(self) -> ZLoop:
        return self.coefficient(0, 0)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_z_free(self) -> bool:
        return all(c.is_z_free() for c in self._terms.values())

    def apoly_coefficient(self, n: int, m: int) -> APoly:
        """z^0 coefficient at q^n qbar^m"""
        return self.coefficient(n, m).constant_term()

    def truncate(self, truncation: int) -> "BiSeries":
        if truncation > self.truncation:
            raise TruncationMismatchError(
                f"cannot raise truncation from {self.truncation} to {truncation}")
        return BiSeries._make(truncation, self._terms)

    # arithmetic
    def _coerce(self, other) -> Optional["BiSeries"]:
        if isinstance(other, BiSeries):
            if other.truncation != self.truncation:
                raise TruncationMismatchError(
                    f"cannot combine series truncated at {self.truncation} and {other.truncation}")
            return other
        if isinstance(other, (ZLoop, APoly, int, Fraction)):
            return BiSeries.constant(self.truncation, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self._terms)
        for k, c in other._terms.items():
            terms[k] = terms[k] + c if k in terms else c
        return BiSeries._make(self.truncation, terms)

    __radd__ = __add__

    def __neg__(self) -> "BiSeries":
        return BiSeries._make(self.truncation, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (ZLoop, APoly, int, Fraction)):
            return BiSeries._make(self.truncation, {k: c * other for k, c in self._terms.items()})
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        limit = self.truncation
        terms: Dict[Index, ZLoop] = {}
        right = other.items()
        for (n1, m1), c1 in self.items():
            budget = limit - n1 - m1
            for (n2, m2), c2 in right:
                if n2 + m2 > budget:
                    break
                key = (n1 + n2, m1 + m2)
                p = c1 * c2
                terms[key] = terms[key] + p if key in terms else p
        return BiSeries._make(limit, terms)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "BiSeries":
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = BiSeries.one(self.truncation)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def inverse(self) -> "BiSeries":
        c0 = self.constant_term()
        if not c0.is_unit():
            raise NonUnitError(f"constant term {c0} of the series is not a unit")
        inv0 = c0.inverse()
        rest = [(k, c) for k, c in self.items() if k != (0, 0)]
        result: Dict[Index, ZLoop] = {(0, 0): inv0}
        for total in range(1, self.truncation + 1):
            for n in range(total + 1):
                m = total - n
                acc = ZLoop.zero()
                for (i, j), c in rest:
                    if i + j > total:
                        break
                    if i <= n and j <= m:
                        prev = result.get((n - i, m - j))
                        if prev:
                            acc = acc + c * prev
                if acc:
                    result[(n, m)] = -(inv0 * acc)
        return BiSeries._make(self.truncation, result)

    # involutions and derivations
    def bar(self) -> "BiSeries":
        return BiSeries._make(self.truncation, {(m, n): c.conjugate() for (n, m), c in self._terms.items()})

    def reflect_z(self) -> "BiSeries":
        return BiSeries._make(self.truncation, {k: c.reflect() for k, c in self._terms.items()})

    def d1(self) -> "BiSeries":
        """d/dt1 with q = e^{t1} and da/dt1 = -1"""
        return BiSeries._make(self.truncation, {
            (n, m): c.map_coefficients(lambda p, n=n: p * n - p.derivative())
            for (n, m), c in self._terms.items()})

    def d1bar(self) -> "BiSeries":
        """d/d(conj t1) with qbar = e^{conj t1} and da/d(conj t1) = -1"""
        return BiSeries._make(self.truncation, {
            (n, m): c.map_coefficients(lambda p, m=m: p * m - p.derivative())
            for (n, m), c in self._terms.items()})

    def map_coefficients(self, func: Callable[[ZLoop], ZLoop]) -> "BiSeries":
        return BiSeries._make(self.truncation, {k: func(c) for k, c in self._terms.items()})

    def __eq__(self, other) -> bool:
        if isinstance(other, BiSeries):
            return self.truncation == other.truncation and self._terms == other._terms
        try:
            other = self._coerce(other)
        except TruncationMismatchError:
            return False
        if other is None:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.truncation, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"BiSeries(N={self.truncation}, {self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (n, m), c in self.items():
            mono = "*".join(p for p in (
                "" if n == 0 else ("q" if n == 1 else f"q^{n}"),
                "" if m == 0 else ("qbar" if m == 1 else f"qbar^{m}"),
            ) if p)
            parts.append(f"[{c}]" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def bar_involution(s: BiSeries) -> BiSeries:
    """q^n qbar^m z^k a^j -> q^m qbar^n z^-k a^j"""
    return s.bar()


def derive_d1(s: BiSeries) -> BiSeries:
    return s.d1()


def derive_d1bar(s: BiSeries) -> BiSeries:
    return s.d1bar()


def series_log(s: BiSeries) -> BiSeries:
    """log(1 + x) for a series with constant term exactly 1"""
    if s.constant_term() != ZLoop.one():
        raise SeriesDomainError("series_log needs constant term 1; log of other units is not in the ring")
    x = s - 1
    result = BiSeries.zero(s.truncation)
    power = BiSeries.one(s.truncation)
    for k in range(1, s.truncation + 1):
        power = power * x
        if not power:
            break
        result = result + power * Fraction((-1) ** (k + 1), k)
    return result


def series_exp(s: BiSeries) -> BiSeries:
    """exp(x) for a series with zero constant term"""
    if s.constant_term():
        raise SeriesDomainError("series_exp needs a zero constant term")
    result = BiSeries.one(s.truncation)
    power = BiSeries.one(s.truncation)
    for k in range(1, s.truncation + 1):
        power = power * s * Fraction(1, k)
        if not power:
            break
        result = result + power
    return result


def series_log_derivative(s: BiSeries, derivation: Callable[[BiSeries], BiSeries]) -> BiSeries:
    """derivation(log s) = derivation(s) / s, valid whenever the constant term is a unit"""
    return derivation(s) * s.inverse()


# ---------------------------------------------------------------------------
# Matrices of series
# ---------------------------------------------------------------------------

CoefficientMatrix = Tuple[Tuple[ZLoop, ...], ...]


def coefficient_matmul(left: CoefficientMatrix, right: CoefficientMatrix) -> CoefficientMatrix:
    size = len(left)
    inner = len(right)
    cols = len(right[0])
    out = []
    for i in range(size):
        row = []
        for j in range(cols):
            acc = ZLoop.zero()
            for k in range(inner):
                x, y = left[i][k], right[k][j]
                if x and y:
                    acc = acc + x * y
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def coefficient_add(left: CoefficientMatrix, right: CoefficientMatrix) -> CoefficientMatrix:
    return tuple(tuple(x + y for x, y in zip(r1, r2)) for r1, r2 in zip(left, right))


def coefficient_sub(left: CoefficientMatrix, right: CoefficientMatrix) -> CoefficientMatrix:
    return tuple(tuple(x - y for x, y in zip(r1, r2)) for r1, r2 in zip(left, right))


def coefficient_is_zero(matrix: CoefficientMatrix) -> bool:
    return all(not x for row in matrix for x in row)


def coefficient_zero(dim: int) -> CoefficientMatrix:
    return tuple(tuple(ZLoop.zero() for _ in range(dim)) for _ in range(dim))


def coefficient_identity(dim: int) -> CoefficientMatrix:
    return tuple(tuple(ZLoop.one() if i == j else ZLoop.zero() for j in range(dim)) for i in range(dim))


def coefficient_split(matrix: CoefficientMatrix) -> Tuple[CoefficientMatrix, CoefficientMatrix]:
    """Entrywise z_split: (strictly positive part, non-positive part)"""
    pos, nonpos = [], []
    for row in matrix:
        parts = [x.split() for x in row]
        pos.append(tuple(p for p, _ in parts))
        nonpos.append(tuple(n for _, n in parts))
    return tuple(pos), tuple(nonpos)


def _determinant(matrix: CoefficientMatrix) -> ZLoop:
    size = len(matrix)
    if size == 1:
        return matrix[0][0]
    if size == 2:
        return matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0]
    total = ZLoop.zero()
    for j in range(size):
        if not matrix[0][j]:
            continue
        minor = tuple(tuple(row[c] for c in range(size) if c != j) for row in matrix[1:])
        term = matrix[0][j] * _determinant(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def _adjugate(matrix: CoefficientMatrix) -> CoefficientMatrix:
    size = len(matrix)
    if size == 1:
        return ((ZLoop.one(),),)
    out = [[ZLoop.zero()] * size for _ in range(size)]
    for i in range(size):
        for j in range(size):
            minor = tuple(tuple(row[c] for c in range(size) if c != j)
                          for r, row in enumerate(matrix) if r != i)
            cofactor = _determinant(minor)
            out[j][i] = cofactor if (i + j) % 2 == 0 else -cofactor
    return tuple(tuple(row) for row in out)


def coefficient_inverse(matrix: CoefficientMatrix) -> CoefficientMatrix:
    """Inverse over the loop ring; requires a unit determinant"""
    det = _determinant(matrix)
    if not det.is_unit():
        raise NonUnitError(f"determinant {det} is not a unit of the loop ring")
    inv_det = det.inverse()
    return tuple(tuple(x * inv_det for x in row) for row in _adjugate(matrix))


class LoopMatrix:
    """Square matrix of BiSeries with a common truncation.

    `@` is the matrix product, `*` scales by a scalar, APoly, ZLoop or BiSeries.
    """

    __slots__ = ("dim", "truncation", "_rows")

    def __init__(self, rows: Sequence[Sequence[object]], truncation: Optional[int] = None):
        dim = len(rows)
        if dim == 0 or any(len(row) != dim for row in rows):
            raise ValueError("LoopMatrix needs a non-empty square array")
        if truncation is None:
            found = {x.truncation for row in rows for x in row if isinstance(x, BiSeries)}
            if len(found) != 1:
                raise TruncationMismatchError(f"cannot infer a single truncation from {sorted(found)}")
            truncation = found.pop()
        out = []
        for row in rows:
            new_row = []
            for x in row:
                if isinstance(x, BiSeries):
                    if x.truncation != truncation:
                        raise TruncationMismatchError(
                            f"entry truncated at {x.truncation}, matrix at {truncation}")
                    new_row.append(x)
                else:
                    new_row.append(BiSeries.constant(truncation, x))
            out.append(tuple(new_row))
        self.dim = dim
        self.truncation = truncation
        self._rows = tuple(out)

    @classmethod
    def identity(cls, dim: int, truncation: int) -> "LoopMatrix":
        return cls([[1 if i == j else 0 for j in range(dim)] for i in range(dim)], truncation)

    @classmethod
    def zero(cls, dim: int, truncation: int) -> "LoopMatrix":
        return cls([[0] * dim for _ in range(dim)], truncation)

    @classmethod
    def from_coefficients(cls, dim: int, truncation: int,
                          coefficients: Mapping[Index, CoefficientMatrix]) -> "LoopMatrix":
        rows = []
        for i in range(dim):
            row = []
            for j in range(dim):
                row.append(BiSeries(truncation, {k: mat[i][j] for k, mat in coefficients.items()}))
            rows.append(row)
        return cls(rows, truncation)

    # inspection
    @property
    def rows(self) -> Tuple[Tuple[BiSeries, ...], ...]:
        return self._rows

    def entry(self, i: int, j: int) -> BiSeries:
        return self._rows[i][j]

    def __getitem__(self, index: Tuple[int, int]) -> BiSeries:
        i, j = index
        return self._rows[i][j]

    def column(self, j: int) -> List[BiSeries]:
        return [row[j] for row in self._rows]

    def support(self) -> List[Index]:
        keys = set()
        for row in self._rows:
            for x in row:
                keys.update(x.support())
        return sorted(keys, key=lambda nm: (nm[0] + nm[1], nm))

    def coefficient(self, n: int, m: int) -> CoefficientMatrix:
        return tuple(tuple(x.coefficient(n, m) for x in row) for row in self._rows)

    def coefficients(self) -> Dict[Index, CoefficientMatrix]:
        return {k: self.coefficient(*k) for k in self.support()}

    def is_zero(self) -> bool:
        return all(not x for row in self._rows for x in row)

    def is_identity(self) -> bool:
        return self == LoopMatrix.identity(self.dim, self.truncation)

    def nonzero_terms(self) -> int:
        return sum(len(x.support()) for row in self._rows for x in row)

    # arithmetic
    def _check(self, other: "LoopMatrix") -> None:
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch {self.dim} vs {other.dim}")
        if other.truncation != self.truncation:
            raise TruncationMismatchError(
                f"cannot combine matrices truncated at {self.truncation} and {other.truncation}")

    def __add__(self, other: "LoopMatrix") -> "LoopMatrix":
        if not isinstance(other, LoopMatrix):
            return NotImplemented
        self._check(other)
        return LoopMatrix([[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(self._rows, other._rows)],
                          self.truncation)

    def __neg__(self) -> "LoopMatrix":
        return LoopMatrix([[-x for x in row] for row in self._rows], self.truncation)

    def __sub__(self, other: "LoopMatrix") -> "LoopMatrix":
        if not isinstance(other, LoopMatrix):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar) -> "LoopMatrix":
        if isinstance(scalar, LoopMatrix):
            return NotImplemented
        return LoopMatrix([[x * scalar for x in row] for row in self._rows], self.truncation)

    __rmul__ = __mul__

    def __matmul__(self, other: "LoopMatrix") -> "LoopMatrix":
        if not isinstance(other, LoopMatrix):
            return NotImplemented
        self._check(other)
        rows = []
        for i in range(self.dim):
            row = []
            for j in range(self.dim):
                acc = BiSeries.zero(self.truncation)
                for k in range(self.dim):
                    x, y = self._rows[i][k], other._rows[k][j]
                    if x and y:
                        acc = acc + x * y
                row.append(acc)
            rows.append(row)
        return LoopMatrix(rows, self.truncation)

    def apply(self, vector: Sequence[BiSeries]) -> List[BiSeries]:
        """Matrix times column vector"""
        out = []
        for row in self._rows:
            acc = BiSeries.zero(self.truncation)
            for x, y in zip(row, vector):
                if x and y:
                    acc = acc + x * y
            out.append(acc)
        return out

    def inverse(self) -> "LoopMatrix":
        """Series inverse; the constant coefficient must be invertible over the loop ring"""
        inv0 = coefficient_inverse(self.coefficient(0, 0))
        coeffs = self.coefficients()
        rest = [(k, c) for k, c in coeffs.items() if k != (0, 0)]
        result: Dict[Index, CoefficientMatrix] = {(0, 0): inv0}
        for total in range(1, self.truncation + 1):
            for n in range(total + 1):
                m = total - n
                acc = coefficient_zero(self.dim)
                for (i, j), c in rest:
                    if i + j > total:
                        break
                    if i <= n and j <= m and (n - i, m - j) in result:
                        acc = coefficient_add(acc, coefficient_matmul(c, result[(n - i, m - j)]))
                if not coefficient_is_zero(acc):
                    neg = coefficient_matmul(inv0, acc)
                    result[(n, m)] = tuple(tuple(-x for x in row) for row in neg)
        return LoopMatrix.from_coefficients(self.dim, self.truncation, result)

    def transpose(self) -> "LoopMatrix":
        return LoopMatrix([list(col) for col in zip(*self._rows)], self.truncation)

    def map(self, func: Callable[[BiSeries], BiSeries]) -> "LoopMatrix":
        return LoopMatrix([[func(x) for x in row] for row in self._rows], self.truncation)

    def bar(self) -> "LoopMatrix":
        return self.map(BiSeries.bar)

    def reflect_z(self) -> "LoopMatrix":
        return self.map(BiSeries.reflect_z)

    def d1(self) -> "LoopMatrix":
        return self.map(BiSeries.d1)

    def d1bar(self) -> "LoopMatrix":
        return self.map(BiSeries.d1bar)

    def truncate(self, truncation: int) -> "LoopMatrix":
        return self.map(lambda x: x.truncate(truncation)) if truncation == self.truncation else \
            LoopMatrix([[x.truncate(truncation) for x in row] for row in self._rows], truncation)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LoopMatrix):
            return NotImplemented
        return self.dim == other.dim and self.truncation == other.truncation and self._rows == other._rows

    def __hash__(self) -> int:
        return hash((self.dim, self.truncation, self._rows))

    def __repr__(self) -> str:
        body = "; ".join(", ".join(str(x) for x in row) for row in self._rows)
        return f"LoopMatrix(N={self.truncation}, [{body}])"


def commutator(left: LoopMatrix, right: LoopMatrix) -> LoopMatrix:
    return left @ right - right @ left
