"""
QVBS v1 - q-deformed combinatorics

q-integers, q-factorials, q-binomials and the q-analog Clebsch-Gordan
coefficient of U_q(su(2)). Every function is pure and works in double
precision for real q > 0; q = 1 needs no special case because [n] is
always evaluated as the symmetric power sum.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Real

from .errors import InvalidDeformationError, InvalidParameterError, InvalidSpinError

logger = logging.getLogger(__name__)

SpinValue = int | float | Fraction


@dataclass(frozen=True)
class DeformationParameter:
    """The real deformation parameter q > 0"""
    q: float

    def __post_init__(self):
        validate_q(self.q)

    def __float__(self) -> float:
        return float(self.q)

    @property
    def inverse(self) -> "DeformationParameter":
        return DeformationParameter(1.0 / self.q)


@dataclass(frozen=True)
class SpinLabel:
    """
    A spin j (and optionally a magnetic label m), stored doubled.

    twice_j and twice_m must have the same parity and |twice_m| <= twice_j.
    """
    twice_j: int
    twice_m: int = 0

    def __post_init__(self):
        if self.twice_j < 0:
            raise InvalidSpinError(f"spin must be nonnegative, got 2j={self.twice_j}")
        if (self.twice_j - self.twice_m) % 2:
            raise InvalidSpinError(f"2j={self.twice_j} and 2m={self.twice_m} differ in parity")
        if abs(self.twice_m) > self.twice_j:
            raise InvalidSpinError(f"|m| > j for 2j={self.twice_j}, 2m={self.twice_m}")

    @classmethod
    def of(cls, j: SpinValue, m: SpinValue = None) -> "SpinLabel":
        twice_j = _twice(j)
        twice_m = twice_j % 2 if m is None else _twice(m)
        return cls(twice_j, twice_m)

    @property
    def j(self) -> float:
        return self.twice_j / 2

    @property
    def m(self) -> float:
        return self.twice_m / 2


def validate_q(q: float) -> float:
    """Return q as a float, rejecting anything but a finite positive real."""
    if isinstance(q, DeformationParameter):
        return q.q
    if not isinstance(q, Real) or isinstance(q, bool):
        raise InvalidDeformationError(f"q must be a real number, got {q!r}")
    value = float(q)
    if not math.isfinite(value) or value <= 0.0:
        raise InvalidDeformationError(f"q must be finite and positive, got {q!r}")
    return value


def _twice(value: SpinValue) -> int:
    doubled = Fraction(value).limit_denominator(4) * 2
    if doubled.denominator != 1:
        raise InvalidSpinError(f"{value!r} is not a half-integer")
    return int(doubled)


@lru_cache(maxsize=4096)
def _q_integer(n: int, q: float) -> float:
    return math.fsum(q ** (n - 1 - 2 * k) for k in range(n))


def q_integer(n: int, q: float) -> float:
    """[n] = q^{n-1} + q^{n-3} + ... + q^{1-n} for n >= 0."""
    q = validate_q(q)
    if n < 0:
        raise InvalidParameterError(f"q_integer needs n >= 0, got {n}; use q_integer_signed")
    return _q_integer(int(n), q)


def q_integer_signed(n: int, q: float) -> float:
    """[n] extended to negative n by [-n] = -[n]."""
    if n < 0:
        return -q_integer(-n, q)
    return q_integer(n, q)


@lru_cache(maxsize=4096)
def _q_factorial(n: int, q: float) -> float:
    result = 1.0
    for k in range(2, n + 1):
        result *= _q_integer(k, q)
    return result


def q_factorial(n: int, q: float) -> float:
    """[n]! = [1][2]...[n], with [0]! = 1."""
    q = validate_q(q)
    if n < 0:
        raise InvalidParameterError(f"q_factorial needs n >= 0, got {n}")
    return _q_factorial(int(n), q)


def q_binomial(n: int, k: int, q: float) -> float:
    """Gaussian binomial [n]!/([k]![n-k]!), exactly 0 outside 0 <= k <= n."""
    q = validate_q(q)
    if n < 0:
        raise InvalidParameterError(f"q_binomial needs n >= 0, got {n}")
    if k < 0 or k > n:
        return 0.0
    return _q_factorial(n, q) / (_q_factorial(k, q) * _q_factorial(n - k, q))


def _triangle(twice_a: int, twice_b: int, twice_c: int) -> bool:
    return (
        abs(twice_a - twice_b) <= twice_c <= twice_a + twice_b
        and (twice_a + twice_b + twice_c) % 2 == 0
    )


def q_cgc(
    s1: SpinValue,
    s2: SpinValue,
    j: SpinValue,
    m1: SpinValue,
    m2: SpinValue,
    m: SpinValue,
    q: float,
) -> float:
    """
    q-Clebsch-Gordan coefficient <s1 m1; s2 m2 | j m>_q.

    Evaluates the explicit single-sum formula with the summation range
    max(0, -s1-m1, j-s2-m1) <= z <= min(j-m, s1-m1, s2+j-m1).
    Raises InvalidSpinError for a triangle-rule violation or |m| > spin.
    """
    q = validate_q(q)
    a1, a2, aj = SpinLabel.of(s1, m1), SpinLabel.of(s2, m2), SpinLabel.of(j, m)
    if not _triangle(a1.twice_j, a2.twice_j, aj.twice_j):
        raise InvalidSpinError(f"spins ({s1}, {s2}, {j}) violate the triangle rule")
    if a1.twice_m + a2.twice_m != aj.twice_m:
        return 0.0

    # All factorial arguments below are integers once the labels are valid.
    t1, t2, tj = a1.twice_j, a2.twice_j, aj.twice_j
    u1, u2, um = a1.twice_m, a2.twice_m, aj.twice_m
    fact = lambda twice: _q_factorial(twice // 2, q)  # noqa: E731

    radicand = (
        fact(tj + um) * fact(tj - um) * fact(t1 - u1) * fact(t2 - u2)
        * fact(t1 + t2 - tj) * q_integer(tj + 1, q)
        / (
            fact(t1 + u1) * fact(t2 + u2) * fact(t1 - t2 + tj)
            * fact(t2 - t1 + tj) * fact(t1 + t2 + tj + 2)
        )
    )
    exponent = (
        (u1 / 2) * ((u1 + u2) / 2 + 1)
        + ((t2 / 2) * (t2 / 2 + 1) - (t1 / 2) * (t1 / 2 + 1) - (tj / 2) * (tj / 2 + 1)) / 2
    )
    sign = -1.0 if ((t1 - u1) // 2) % 2 else 1.0

    z_min = max(0, (-t1 - u1) // 2, (tj - t2 - u1) // 2)
    z_max = min((tj - um) // 2, (t1 - u1) // 2, (t2 + tj - u1) // 2)
    step = -(q ** ((um + tj) // 2 + 1))
    terms = []
    for z in range(z_min, z_max + 1):
        numerator = fact(t1 + u1 + 2 * z) * fact(t2 + tj - u1 - 2 * z)
        denominator = (
            _q_factorial(z, q) * fact(tj - um - 2 * z)
            * fact(t1 - u1 - 2 * z) * fact(t2 - tj + u1 + 2 * z)
        )
        terms.append(step ** z * numerator / denominator)
    return sign * q ** exponent * math.sqrt(radicand) * math.fsum(terms)


def classical_cg(
    s1: SpinValue,
    s2: SpinValue,
    j: SpinValue,
    m1: SpinValue,
    m2: SpinValue,
    m: SpinValue,
) -> float:
    """Ordinary Clebsch-Gordan coefficient by the Racah formula (q = 1)."""
    a1, a2, aj = SpinLabel.of(s1, m1), SpinLabel.of(s2, m2), SpinLabel.of(j, m)
    if not _triangle(a1.twice_j, a2.twice_j, aj.twice_j):
        raise InvalidSpinError(f"spins ({s1}, {s2}, {j}) violate the triangle rule")
    if a1.twice_m + a2.twice_m != aj.twice_m:
        return 0.0

    f = lambda twice: math.factorial(twice // 2)  # noqa: E731
    t1, t2, tj = a1.twice_j, a2.twice_j, aj.twice_j
    u1, u2, um = a1.twice_m, a2.twice_m, aj.twice_m
    prefactor = math.sqrt(
        (tj + 1) * f(tj + t1 - t2) * f(tj - t1 + t2) * f(t1 + t2 - tj)
        / f(t1 + t2 + tj + 2)
    ) * math.sqrt(
        f(tj + um) * f(tj - um) * f(t1 - u1) * f(t1 + u1) * f(t2 - u2) * f(t2 + u2)
    )
    k_min = max(0, (t2 - tj - u1) // 2, (t1 - tj + u2) // 2)
    k_max = min((t1 + t2 - tj) // 2, (t1 - u1) // 2, (t2 + u2) // 2)
    total = 0.0
    for k in range(k_min, k_max + 1):
        total += (-1) ** k / (
            math.factorial(k) * f(t1 + t2 - tj - 2 * k) * f(t1 - u1 - 2 * k)
            * f(t2 + u2 - 2 * k) * f(tj - t2 + u1 + 2 * k) * f(tj - t1 - u2 + 2 * k)
        )
    return prefactor * total


def q_vandermonde_residual(alpha: int, beta: int, n: int, q: float) -> float:
    """
    Relative residual of the summation identity

        sum_k [alpha+n-k, n-k] [beta+k, k] q^{k(alpha+beta+2)} = [alpha+beta+n+1, n] q^{n(1+beta)}

    used in the induction for the lowering-operator closed form.
    """
    q = validate_q(q)
    if min(alpha, beta, n) < 0:
        raise InvalidParameterError("alpha, beta and n must be nonnegative")
    lhs = math.fsum(
        q_binomial(alpha + n - k, n - k, q) * q_binomial(beta + k, k, q) * q ** (k * (alpha + beta + 2))
        for k in range(n + 1)
    )
    rhs = q_binomial(alpha + beta + n + 1, n, q) * q ** (n * (1 + beta))
    return abs(lhs - rhs) / max(abs(rhs), abs(lhs), 1e-300)
