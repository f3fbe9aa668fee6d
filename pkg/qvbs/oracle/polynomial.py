"""
QVBS v1 - Sparse polynomials in the Weyl representation

A polynomial in the variables (x_1, y_1, ..., x_L, y_L) is a map from
exponent tuples to real coefficients. Spin states are polynomials of
per-site degree 2S; the q-boson operators act through dilations
D_p^{x} f(x) = f(p x) and multiplications by single variables.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterator

from ..errors import InvalidParameterError
from ..qcore import q_integer, validate_q

logger = logging.getLogger(__name__)

Monomial = tuple[int, ...]


@dataclass
class Polynomial:
    """Sparse real polynomial in `nvars` variables; zero coefficients are dropped"""
    nvars: int
    terms: dict[Monomial, float] = field(default_factory=dict)

    def __post_init__(self):
        for key in self.terms:
            if len(key) != self.nvars or min(key, default=0) < 0:
                raise InvalidParameterError(f"bad exponent vector {key} for {self.nvars} variables")
        self.terms = {key: value for key, value in self.terms.items() if value != 0.0}

    @classmethod
    def constant(cls, nvars: int, value: float = 1.0) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: float(value)})

    @classmethod
    def monomial(cls, exponents: Monomial, coefficient: float = 1.0) -> "Polynomial":
        return cls(len(exponents), {tuple(exponents): float(coefficient)})

    @classmethod
    def binomial_term(
        cls,
        nvars: int,
        first: dict[int, int],
        first_coefficient: float,
        second: dict[int, int],
        second_coefficient: float,
    ) -> "Polynomial":
        """c1 * prod(v^e for v, e in first) + c2 * prod(v^e for v, e in second)."""
        out = cls(nvars)
        for powers, coefficient in ((first, first_coefficient), (second, second_coefficient)):
            key = [0] * nvars
            for var, exponent in powers.items():
                key[var] += exponent
            out._accumulate(tuple(key), coefficient)
        return out

    def _accumulate(self, key: Monomial, value: float) -> None:
        total = self.terms.get(key, 0.0) + value
        if total == 0.0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = total

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[Monomial, float]]:
        return iter(sorted(self.terms.items()))

    def coefficient(self, key: Monomial) -> float:
        return self.terms.get(tuple(key), 0.0)

    def _check_compatible(self, other: "Polynomial") -> None:
        if other.nvars != self.nvars:
            raise InvalidParameterError(f"variable counts differ: {self.nvars} vs {other.nvars}")

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check_compatible(other)
        out = Polynomial(self.nvars, dict(self.terms))
        for key, value in other.terms.items():
            out._accumulate(key, value)
        return out

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.nvars, {key: -value for key, value in self.terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def scale(self, factor: float) -> "Polynomial":
        return Polynomial(self.nvars, {key: factor * value for key, value in self.terms.items()})

    def __rmul__(self, factor: float) -> "Polynomial":
        return self.scale(float(factor))

    def __mul__(self, other: "Polynomial | float") -> "Polynomial":
        if not isinstance(other, Polynomial):
            return self.scale(float(other))
        self._check_compatible(other)
        out = Polynomial(self.nvars)
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                out._accumulate(tuple(a + b for a, b in zip(k1, k2)), v1 * v2)
        return out

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise InvalidParameterError("negative powers are not polynomials")
        out = Polynomial.constant(self.nvars)
        for _ in range(n):
            out = out * self
        return out

    def max_abs(self) -> float:
        return max((abs(value) for value in self.terms.values()), default=0.0)

    def degrees(self, var: int) -> set[int]:
        return {key[var] for key in self.terms}

    def map_terms(self, rule) -> "Polynomial":
        """Apply rule(key, value) -> (new_key, new_value) | None to every term."""
        out = Polynomial(self.nvars)
        for key, value in self.terms.items():
            mapped = rule(key, value)
            if mapped is not None:
                out._accumulate(*mapped)
        return out


def dilate(poly: Polynomial, var: int, p: float) -> Polynomial:
    """D_p^{var}: scale each monomial by p^{deg var}."""
    return poly.map_terms(lambda key, value: (key, value * p ** key[var]))


def q_difference(poly: Polynomial, var: int, q: float) -> Polynomial:
    """
    (D_q^{var} - D_{q^-1}^{var}) / (q - q^-1), evaluated as [deg var] so the
    pair stays regular at q = 1.
    """
    return poly.map_terms(lambda key, value: (key, value * q_integer(key[var], q)))


def transfer_degree(poly: Polynomial, source: int, target: int) -> Polynomial:
    """Multiply by target/source; terms without the source variable must vanish."""

    def rule(key: Monomial, value: float):
        if key[source] == 0:
            if value != 0.0:
                raise InvalidParameterError("division by a variable that does not divide the term")
            return None
        new = list(key)
        new[source] -= 1
        new[target] += 1
        return tuple(new), value

    return poly.map_terms(rule)


def lowering(poly: Polynomial, x_var: int, y_var: int, q: float) -> Polynomial:
    """X^- = (y/x) (D_q^x - D_{q^-1}^x)/(q - q^-1) on the site with variables (x, y)."""
    q = validate_q(q)
    return transfer_degree(q_difference(poly, x_var, q), x_var, y_var)


def cartan_half(poly: Polynomial, x_var: int, y_var: int, q: float, sign: int = 1) -> Polynomial:
    """q^{sign H/2} = D_{q^{sign/2}}^x D_{q^{-sign/2}}^y."""
    q = validate_q(q)
    half = q ** (0.5 * sign)
    return dilate(dilate(poly, x_var, half), y_var, 1.0 / half)


# two-site variable layout (x_alpha, y_alpha, x_beta, y_beta)
X_ALPHA, Y_ALPHA, X_BETA, Y_BETA = range(4)


def coproduct_lowering(poly: Polynomial, q: float) -> Polynomial:
    """
    Delta X^- = X^-_alpha q^{H_beta/2} + q^{-H_alpha/2} X^-_beta on a two-site
    polynomial. On x_a^a y_a^b x_b^c y_b^d this gives
    [a] q^{(c-d)/2} x_a^{a-1} y_a^{b+1} x_b^c y_b^d + q^{(b-a)/2} [c] x_a^a y_a^b x_b^{c-1} y_b^{d+1}.
    """
    if poly.nvars != 4:
        raise InvalidParameterError(f"coproduct_lowering acts on two sites, got {poly.nvars} variables")
    first = lowering(cartan_half(poly, X_BETA, Y_BETA, q), X_ALPHA, Y_ALPHA, q)
    second = cartan_half(lowering(poly, X_BETA, Y_BETA, q), X_ALPHA, Y_ALPHA, q, sign=-1)
    return first + second
