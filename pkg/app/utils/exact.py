"""Exact arithmetic for correlation values.

Every closed form in the package evaluates to a number of the shape

    coeff * pi^(pi_half_power / 2) * sqrt(radicand)

with ``coeff`` rational and ``radicand`` a positive integer. ``ExactValue`` keeps
that shape under multiplication, division and integer powers, and
``eval_gamma_product`` turns products of Gamma values at integer and half-integer
arguments into it. Floating point only enters through ``log_value``.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Tuple, Union

import mpmath
import sympy

from app.config import get_settings

logger = logging.getLogger(__name__)
settings = get_settings()

mpmath.mp.dps = settings.mp_dps

Rational = Union[int, Fraction]


@lru_cache(maxsize=4096)
def _split_square(m: int) -> Tuple[int, int]:
    """Write m = outside^2 * inside with inside squarefree."""
    outside, inside = 1, 1
    for p, e in sympy.factorint(m).items():
        outside *= int(p) ** (int(e) // 2)
        if e % 2:
            inside *= int(p)
    return outside, inside


def to_mpf(x) -> mpmath.mpf:
    """mpf of an int, float, Fraction or mpf; Fractions go through numerator and denominator."""
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


class ExactValue:
    """coeff * pi^(pi_half_power/2) * sqrt(radicand), normalized."""

    __slots__ = ("coeff", "pi_half_power", "radicand")

    def __init__(self, coeff: Rational = 1, pi_half_power: int = 0, radicand: Rational = 1):
        coeff = Fraction(coeff)
        radicand = Fraction(radicand)
        if coeff == 0:
            self.coeff = Fraction(0)
            self.pi_half_power = 0
            self.radicand = 1
            return
        if radicand <= 0:
            raise ValueError(f"radicand must be positive, got {radicand}")
        # sqrt(p/q) = sqrt(p*q)/q
        coeff /= radicand.denominator
        outside, inside = _split_square(radicand.numerator * radicand.denominator)
        self.coeff = coeff * outside
        self.pi_half_power = int(pi_half_power)
        self.radicand = inside

    @classmethod
    def sqrt_of(cls, value: Rational) -> "ExactValue":
        return cls(1, 0, value)

    @classmethod
    def zero(cls) -> "ExactValue":
        return cls(0)

    @staticmethod
    def _coerce(other) -> "ExactValue":
        if isinstance(other, ExactValue):
            return other
        if isinstance(other, (int, Fraction)):
            return ExactValue(other)
        raise TypeError(f"cannot combine ExactValue with {type(other).__name__}")

    # -- predicates -------------------------------------------------------

    def is_zero(self) -> bool:
        return self.coeff == 0

    def is_rational(self) -> bool:
        return self.pi_half_power == 0 and self.radicand == 1

    def sign(self) -> int:
        return (self.coeff > 0) - (self.coeff < 0)

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coeff

    # -- arithmetic -------------------------------------------------------

    def __mul__(self, other) -> "ExactValue":
        other = self._coerce(other)
        return ExactValue(
            self.coeff * other.coeff,
            self.pi_half_power + other.pi_half_power,
            self.radicand * other.radicand,
        )

    __rmul__ = __mul__

    def inverse(self) -> "ExactValue":
        if self.is_zero():
            raise ZeroDivisionError("inverse of an exact zero")
        return ExactValue(1 / (self.coeff * self.radicand), -self.pi_half_power, self.radicand)

    def __truediv__(self, other) -> "ExactValue":
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other) -> "ExactValue":
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int) -> "ExactValue":
        if not isinstance(k, int):
            raise TypeError("only integer powers are exact")
        if k < 0:
            return self.inverse() ** (-k)
        half, odd = divmod(k, 2)
        return ExactValue(
            self.coeff ** k * Fraction(self.radicand) ** half,
            self.pi_half_power * k,
            self.radicand if odd else 1,
        )

    def __neg__(self) -> "ExactValue":
        return ExactValue(-self.coeff, self.pi_half_power, self.radicand)

    def __add__(self, other) -> "ExactValue":
        other = self._coerce(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.pi_half_power != other.pi_half_power or self.radicand != other.radicand:
            raise ValueError(f"cannot add {self} and {other}: different irrational parts")
        return ExactValue(self.coeff + other.coeff, self.pi_half_power, self.radicand)

    __radd__ = __add__

    def __sub__(self, other) -> "ExactValue":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "ExactValue":
        return self._coerce(other) - self

    def sqrt(self) -> "ExactValue":
        """Square root of a positive value whose own radical part is trivial."""
        if self.coeff <= 0:
            raise ValueError(f"square root of non-positive value {self}")
        if self.radicand != 1 or self.pi_half_power % 2:
            raise ValueError(f"square root of {self} leaves the representable class")
        return ExactValue(1, self.pi_half_power // 2, self.coeff)

    # -- comparison -------------------------------------------------------

    def _square_key(self) -> Tuple[int, int, Fraction]:
        return self.sign(), self.pi_half_power, self.coeff * self.coeff * self.radicand

    def __eq__(self, other) -> bool:
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        return self._square_key() == other._square_key()

    def __hash__(self) -> int:
        return hash(self._square_key())

    def __lt__(self, other) -> bool:
        return self.to_mpf() < self._coerce(other).to_mpf()

    # -- conversion -------------------------------------------------------

    def to_mpf(self) -> mpmath.mpf:
        value = mpmath.mpf(self.coeff.numerator) / self.coeff.denominator
        if self.pi_half_power:
            value *= mpmath.pi ** (mpmath.mpf(self.pi_half_power) / 2)
        if self.radicand != 1:
            value *= mpmath.sqrt(self.radicand)
        return value

    def __float__(self) -> float:
        return float(self.to_mpf())

    def __str__(self) -> str:
        return f"{self.coeff} * pi^({self.pi_half_power}/2) * sqrt({self.radicand})"

    def __repr__(self) -> str:
        return f"ExactValue({self})"


def product(values: Iterable) -> ExactValue:
    result = ExactValue(1)
    for v in values:
        result = result * v
    return result


def _as_half_integer(x: Rational) -> Fraction:
    x = Fraction(x)
    if (2 * x).denominator != 1:
        raise ValueError(f"Gamma argument {x} is not a multiple of 1/2")
    return x


class GammaProduct:
    """Quotient of Gamma values at positive integer and half-integer arguments."""

    def __init__(self, numerator: Iterable[Rational] = (), denominator: Iterable[Rational] = ()):
        self.numerator: Counter = Counter(_as_half_integer(x) for x in numerator)
        self.denominator: Counter = Counter(_as_half_integer(x) for x in denominator)

    def __mul__(self, other: "GammaProduct") -> "GammaProduct":
        result = GammaProduct()
        result.numerator = self.numerator + other.numerator
        result.denominator = self.denominator + other.denominator
        return result

    def __pow__(self, k: int) -> "GammaProduct":
        if k < 0:
            return self.inverse() ** (-k)
        result = GammaProduct()
        result.numerator = Counter({x: c * k for x, c in self.numerator.items()})
        result.denominator = Counter({x: c * k for x, c in self.denominator.items()})
        return result

    def inverse(self) -> "GammaProduct":
        result = GammaProduct()
        result.numerator = Counter(self.denominator)
        result.denominator = Counter(self.numerator)
        return result

    def cancelled(self) -> "GammaProduct":
        common = self.numerator & self.denominator
        result = GammaProduct()
        result.numerator = self.numerator - common
        result.denominator = self.denominator - common
        return result

    def arguments(self) -> Iterable[Fraction]:
        yield from self.numerator.elements()
        yield from self.denominator.elements()


@lru_cache(maxsize=4096)
def _gamma_rational_part(x: Fraction) -> Tuple[Fraction, int]:
    """Gamma(x) = r * pi^(h/2) for positive half-integer x; returns (r, h)."""
    if x.denominator == 1:
        return Fraction(math.factorial(int(x) - 1)), 0
    m = int(x - Fraction(1, 2))
    return Fraction(math.factorial(2 * m), 4 ** m * math.factorial(m)), 1


def eval_gamma_product(p: GammaProduct) -> ExactValue:
    """Evaluate a Gamma quotient exactly."""
    p = p.cancelled()
    for x in p.arguments():
        if x <= 0:
            raise ValueError(f"non-positive Gamma argument {x}")
    coeff = Fraction(1)
    half_power = 0
    for x, count in p.numerator.items():
        r, h = _gamma_rational_part(x)
        coeff *= r ** count
        half_power += h * count
    for x, count in p.denominator.items():
        r, h = _gamma_rational_part(x)
        coeff /= r ** count
        half_power -= h * count
    return ExactValue(coeff, half_power)


def log_gamma_product(p: GammaProduct) -> mpmath.mpf:
    """Natural log of a positive Gamma quotient, in mpmath precision."""
    p = p.cancelled()
    terms = [c * mpmath.loggamma(to_mpf(x)) for x, c in p.numerator.items()]
    terms += [-c * mpmath.loggamma(to_mpf(x)) for x, c in p.denominator.items()]
    return mpmath.fsum(terms)


def pochhammer(a: Rational, m: int) -> ExactValue:
    """Rising factorial a(a+1)...(a+m-1)."""
    if m < 0:
        raise ValueError(f"Pochhammer length must be non-negative, got {m}")
    a = Fraction(a)
    result = Fraction(1)
    for i in range(m):
        factor = a + i
        if factor <= 0:
            raise ValueError(f"Pochhammer ({a})_{m} has non-positive factor {factor}")
        result *= factor
    return ExactValue(result)


@lru_cache(maxsize=None)
def hyperfactorial_int(n: int) -> int:
    if n < 0:
        raise ValueError(f"hyperfactorial needs n >= 0, got {n}")
    value = 1
    for k in range(1, n):
        value *= math.factorial(k)
    return value


@lru_cache(maxsize=None)
def even_superfactorial_int(n: int) -> int:
    if n < 0:
        raise ValueError(f"even superfactorial needs n >= 0, got {n}")
    value = 1
    for k in range(1, n + 1):
        value *= math.factorial(2 * k)
    return value


def hyperfactorial(n: int) -> ExactValue:
    """H(n) = 0! 1! ... (n-1)!."""
    return ExactValue(hyperfactorial_int(n))


def even_superfactorial(n: int) -> ExactValue:
    """E(n) = 2! 4! ... (2n)!."""
    return ExactValue(even_superfactorial_int(n))


def log_hyperfactorial(n: int) -> mpmath.mpf:
    return mpmath.fsum(mpmath.loggamma(k + 1) for k in range(n))


def log_even_superfactorial(n: int) -> mpmath.mpf:
    return mpmath.fsum(mpmath.loggamma(2 * k + 1) for k in range(1, n + 1))


def log_value(v: ExactValue) -> mpmath.mpf:
    """Natural log assembled from the components, never from a float of the whole value."""
    if v.coeff <= 0:
        raise ValueError(f"log of non-positive value {v}")
    terms = [mpmath.log(mpmath.mpf(v.coeff.numerator)), -mpmath.log(mpmath.mpf(v.coeff.denominator))]
    if v.pi_half_power:
        terms.append(mpmath.mpf(v.pi_half_power) / 2 * mpmath.log(mpmath.pi))
    if v.radicand != 1:
        terms.append(mpmath.log(mpmath.mpf(v.radicand)) / 2)
    return mpmath.fsum(terms)
