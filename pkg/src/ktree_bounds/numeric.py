"""
Extended-precision reals with directed rounding, and exact real powers.

``PrecReal`` keeps an outward-rounded enclosure ``[lo, hi]`` of mpmath raw
floats. Every operation rounds the lower endpoint toward -inf and the upper
endpoint toward +inf, so the exact result always lies inside. The rounding
tag only decides which endpoint is *reported*: ``DOWN`` reports ``lo`` (for
lower bounds), ``UP`` reports ``hi`` (for upper bounds).

``PowerReal`` holds positive reals of the form ``coeff * base ** exponent``
exactly. Every range size ``m * p**d`` of the k-Tree analysis has this form,
which lets floors of those sizes be certified instead of guessed.
"""

import math
import numbers
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Tuple, Union

from loguru import logger
from mpmath import libmp
from mpmath.libmp import finf, fnan, fninf, fzero, round_ceiling, round_floor
from typing_extensions import TypeAlias

from .errors import DomainError, PrecisionError

__all__ = [
    "Rounding",
    "PrecReal",
    "PowerReal",
    "as_power_real",
    "format_fraction",
]

Number: TypeAlias = Union[int, Fraction]

# transcendental results are widened by this many bits of relative slack
_PAD_BITS = 8
_MAX_DOUBLINGS = 12


class Rounding(str, Enum):
    """Which endpoint of an enclosure a PrecReal reports."""
    DOWN = "down"
    UP = "up"
    NEAREST = "nearest"


def _raw_to_fraction(x) -> Fraction:
    if x in (finf, fninf, fnan):
        raise PrecisionError("enclosure endpoint is not finite")
    # gmpy backend hands back mpz
    p, q = libmp.to_rational(x)
    return Fraction(int(p), int(q))


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, numbers.Rational) and not isinstance(value, bool):
        return Fraction(int(value.numerator), int(value.denominator))
    return Fraction(value)


def _enclose(value: Number, bits: int):
    value = _as_fraction(value)
    if value.denominator == 1:
        x = libmp.from_int(value.numerator)
        return x, x
    p, q = value.numerator, value.denominator
    return (
        libmp.from_rational(p, q, bits, round_floor),
        libmp.from_rational(p, q, bits, round_ceiling),
    )


def _pad(interval, bits: int):
    lo, hi = interval
    eps = libmp.from_man_exp(1, -(bits - _PAD_BITS))
    dlo = libmp.mpf_mul(libmp.mpf_abs(lo), eps)
    dhi = libmp.mpf_mul(libmp.mpf_abs(hi), eps)
    return (
        libmp.mpf_sub(lo, dlo, bits, round_floor),
        libmp.mpf_add(hi, dhi, bits, round_ceiling),
    )


def format_fraction(value: Fraction, digits: int, rounding: Rounding) -> str:
    """Render ``value`` in scientific notation with ``digits`` significant digits.

    DOWN rounds toward -inf and UP toward +inf, so the printed decimal is itself
    a valid lower (resp. upper) bound. Works for magnitudes far outside the
    float range, e.g. 2**-40000.
    """
    rounding = Rounding(rounding)
    if value == 0:
        return "0"
    if value < 0:
        flipped = {Rounding.DOWN: Rounding.UP, Rounding.UP: Rounding.DOWN}
        return "-" + format_fraction(-value, digits, flipped.get(rounding, rounding))

    num, den = value.numerator, value.denominator
    e10 = math.floor((num.bit_length() - den.bit_length()) * math.log10(2))
    while True:
        shift = digits - 1 - e10
        scaled = value * 10**shift if shift >= 0 else value / 10 ** (-shift)
        if scaled >= 10**digits:
            e10 += 1
        elif scaled < 10 ** (digits - 1):
            e10 -= 1
        else:
            break

    if rounding is Rounding.DOWN:
        q = math.floor(scaled)
    elif rounding is Rounding.UP:
        q = math.ceil(scaled)
    else:
        q = round(scaled)
    if q == 10**digits:
        q //= 10
        e10 += 1

    text = str(q)
    mantissa = (text[0] + "." + text[1:]).rstrip("0").rstrip(".")
    return f"{mantissa}e{e10}"


class PrecReal:
    """A real number known to lie in a directed-rounded enclosure.

    Args:
        interval: pair of mpmath raw floats ``(lo, hi)`` with ``lo <= hi``
        bits: working precision in bits
        rounding: endpoint reported by :attr:`value`
    """

    __slots__ = ("_lo", "_hi", "bits", "rounding")

    def __init__(self, interval, bits: int, rounding: Rounding = Rounding.NEAREST):
        lo, hi = interval
        if fnan in (lo, hi):
            raise PrecisionError("NaN in enclosure")
        if libmp.mpf_gt(lo, hi):
            raise PrecisionError("inverted enclosure")
        self._lo = lo
        self._hi = hi
        self.bits = int(bits)
        self.rounding = Rounding(rounding)

    @classmethod
    def exact(cls, value: Number, bits: int, rounding: Rounding = Rounding.NEAREST) -> "PrecReal":
        """Tightest enclosure of a rational at ``bits`` precision."""
        return cls(_enclose(value, bits), bits, rounding)

    # -- accessors -------------------------------------------------------

    @property
    def interval(self):
        return self._lo, self._hi

    @property
    def lower(self) -> Fraction:
        return _raw_to_fraction(self._lo)

    @property
    def upper(self) -> Fraction:
        return _raw_to_fraction(self._hi)

    @property
    def midpoint(self) -> Fraction:
        return (self.lower + self.upper) / 2

    @property
    def value(self) -> Fraction:
        """The reported value: lower endpoint, upper endpoint or midpoint."""
        if self.rounding is Rounding.DOWN:
            return self.lower
        if self.rounding is Rounding.UP:
            return self.upper
        return self.midpoint

    def rounded(self, rounding: Rounding) -> "PrecReal":
        return PrecReal((self._lo, self._hi), self.bits, rounding)

    def is_zero(self) -> bool:
        return self._lo == fzero and self._hi == fzero

    def __float__(self) -> float:
        return libmp.to_float(libmp.mpi_mid((self._lo, self._hi), self.bits))

    def __repr__(self) -> str:
        return (
            f"PrecReal({format_fraction(self.lower, 12, Rounding.DOWN)}, "
            f"{format_fraction(self.upper, 12, Rounding.UP)}, {self.rounding.value})"
        )

    # -- arithmetic ------------------------------------------------------

    def _coerce(self, other) -> "PrecReal":
        if isinstance(other, PrecReal):
            return other
        if isinstance(other, numbers.Rational):
            return PrecReal.exact(_as_fraction(other), self.bits)
        return NotImplemented

    def _wrap(self, interval, other: "PrecReal" = None) -> "PrecReal":
        bits = self.bits if other is None else max(self.bits, other.bits)
        return PrecReal(interval, bits, self.rounding)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._wrap(libmp.mpi_add(self.interval, other.interval, self.bits), other)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._wrap(libmp.mpi_sub(self.interval, other.interval, self.bits), other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other.rounded(self.rounding) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._wrap(libmp.mpi_mul(self.interval, other.interval, self.bits), other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if libmp.mpf_le(other._lo, fzero) and libmp.mpf_ge(other._hi, fzero):
            raise DomainError("division by an enclosure containing zero")
        return self._wrap(libmp.mpi_div(self.interval, other.interval, self.bits), other)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other.rounded(self.rounding) / self

    def __neg__(self) -> "PrecReal":
        return self._wrap(libmp.mpi_neg(self.interval))

    def __pow__(self, exponent: Number) -> "PrecReal":
        exponent = Fraction(exponent)
        if exponent.denominator == 1:
            return self._wrap(libmp.mpi_pow_int(self.interval, exponent.numerator, self.bits))
        if not libmp.mpf_gt(self._lo, fzero):
            raise DomainError("fractional power of a non-positive enclosure")
        return (self.log() * PrecReal.exact(exponent, self.bits)).exp()

    def sqrt(self) -> "PrecReal":
        if libmp.mpf_lt(self._lo, fzero):
            raise DomainError("square root of a negative enclosure")
        return self._wrap(libmp.mpi_sqrt(self.interval, self.bits))

    def log(self) -> "PrecReal":
        """Natural logarithm."""
        if not libmp.mpf_gt(self._lo, fzero):
            raise DomainError("logarithm of a non-positive enclosure")
        return self._wrap(_pad(libmp.mpi_log(self.interval, self.bits), self.bits))

    def exp(self) -> "PrecReal":
        return self._wrap(_pad(libmp.mpi_exp(self.interval, self.bits), self.bits))

    def log2(self) -> "PrecReal":
        ln2 = (
            libmp.mpf_ln2(self.bits, round_floor),
            libmp.mpf_ln2(self.bits, round_ceiling),
        )
        return self._wrap(libmp.mpi_div(self.log().interval, _pad(ln2, self.bits), self.bits))

    def min(self, other) -> "PrecReal":
        other = self._coerce(other)
        lo = self._lo if libmp.mpf_le(self._lo, other._lo) else other._lo
        hi = self._hi if libmp.mpf_le(self._hi, other._hi) else other._hi
        return self._wrap((lo, hi), other)

    def max(self, other) -> "PrecReal":
        other = self._coerce(other)
        lo = self._lo if libmp.mpf_ge(self._lo, other._lo) else other._lo
        hi = self._hi if libmp.mpf_ge(self._hi, other._hi) else other._hi
        return self._wrap((lo, hi), other)

    def clamp_nonneg(self) -> "PrecReal":
        return self.max(0)

    # -- certified comparisons --------------------------------------------

    def certainly_lt(self, other) -> bool:
        return libmp.mpi_lt(self.interval, self._coerce(other).interval) is True

    def certainly_le(self, other) -> bool:
        return libmp.mpi_le(self.interval, self._coerce(other).interval) is True

    def certainly_gt(self, other) -> bool:
        return libmp.mpi_gt(self.interval, self._coerce(other).interval) is True

    def certainly_ge(self, other) -> bool:
        return libmp.mpi_ge(self.interval, self._coerce(other).interval) is True

    # -- rendering ---------------------------------------------------------

    def to_decimal(self, digits: int = 30) -> str:
        """Decimal string of :attr:`value`, rounded in the reported direction."""
        return format_fraction(self.value, digits, self.rounding)

    def log2_decimal(self, digits: int = 15) -> str:
        """log2 of :attr:`value`, rounded in the reported direction."""
        point = self.value
        if point <= 0:
            return "-inf"
        enclosure = PrecReal.exact(point, self.bits).log2()
        if self.rounding is Rounding.DOWN:
            return format_fraction(enclosure.lower, digits, Rounding.DOWN)
        if self.rounding is Rounding.UP:
            return format_fraction(enclosure.upper, digits, Rounding.UP)
        return format_fraction(enclosure.midpoint, digits, Rounding.NEAREST)


def _integer_root(n: int, k: int) -> int:
    lo, hi = 1, 1 << (n.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid**k <= n:
            lo = mid
        else:
            hi = mid - 1
    return lo


@lru_cache(maxsize=256)
def _perfect_power(base: int) -> Tuple[int, int]:
    """Smallest root r and largest g with r**g == base."""
    for power in range(base.bit_length(), 1, -1):
        root = _integer_root(base, power)
        if root**power == base:
            return root, power
    return base, 1


@dataclass(frozen=True)
class PowerReal:
    """Exact positive real ``coeff * base ** exponent``.

    The base is normalized to its smallest integer root, and integer exponents
    are folded into the coefficient, so ``PowerReal(1, 2**64, Fraction(-1, 4))``
    becomes the rational ``2**-16``.
    """

    coeff: Fraction = Fraction(1)
    base: int = 1
    exponent: Fraction = Fraction(0)

    def __post_init__(self):
        coeff = _as_fraction(self.coeff)
        base = int(self.base)
        exponent = _as_fraction(self.exponent)
        if coeff <= 0:
            raise DomainError("PowerReal requires a positive coefficient")
        if base < 1:
            raise DomainError("PowerReal requires a base >= 1")
        if base > 1 and exponent != 0:
            root, power = _perfect_power(base)
            base, exponent = root, exponent * power
        if base == 1 or exponent == 0:
            base, exponent = 1, Fraction(0)
        elif exponent.denominator == 1:
            e = exponent.numerator
            coeff = coeff * base**e if e > 0 else coeff / base ** (-e)
            base, exponent = 1, Fraction(0)
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exponent", exponent)

    @property
    def is_rational(self) -> bool:
        return self.base == 1

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise DomainError(f"{self} is irrational")
        return self.coeff

    def __str__(self) -> str:
        if self.is_rational:
            return str(self.coeff)
        return f"{self.coeff}*{self.base}^({self.exponent})"

    def __mul__(self, other) -> "PowerReal":
        other = as_power_real(other)
        if self.is_rational:
            return PowerReal(self.coeff * other.coeff, other.base, other.exponent)
        if other.is_rational or other.base == self.base:
            exponent = self.exponent + (other.exponent if other.base == self.base else 0)
            return PowerReal(self.coeff * other.coeff, self.base, exponent)
        raise DomainError(f"cannot combine powers of {self.base} and {other.base}")

    __rmul__ = __mul__

    def reciprocal(self) -> "PowerReal":
        return PowerReal(1 / self.coeff, self.base, -self.exponent)

    def __truediv__(self, other) -> "PowerReal":
        return self * as_power_real(other).reciprocal()

    def __rtruediv__(self, other) -> "PowerReal":
        return as_power_real(other) * self.reciprocal()

    def __pow__(self, exponent: Number) -> "PowerReal":
        exponent = Fraction(exponent)
        if exponent.denominator == 1:
            e = exponent.numerator
            return PowerReal(self.coeff**e, self.base, self.exponent * e)
        if self.coeff.denominator == 1 and self.is_rational:
            return PowerReal(1, self.coeff.numerator, exponent)
        if self.coeff.numerator == 1 and self.is_rational:
            return PowerReal(1, self.coeff.denominator, -exponent)
        if self.coeff == 1:
            return PowerReal(1, self.base, self.exponent * exponent)
        raise DomainError(f"fractional power of {self} is not representable")

    def half(self) -> "PowerReal":
        return PowerReal(self.coeff / 2, self.base, self.exponent)

    def log2_estimate(self) -> float:
        est = math.log2(self.coeff.numerator) - math.log2(self.coeff.denominator)
        if not self.is_rational:
            est += float(self.exponent) * math.log2(self.base)
        return est

    def enclose(self, bits: int, rounding: Rounding = Rounding.NEAREST) -> PrecReal:
        coeff = PrecReal.exact(self.coeff, bits, rounding)
        if self.is_rational:
            return coeff
        return coeff * (PrecReal.exact(self.base, bits) ** self.exponent)

    def compare(self, other) -> int:
        """Exact three-way comparison with another exact real."""
        ratio = self / as_power_real(other)
        if ratio.is_rational:
            return (ratio.coeff > 1) - (ratio.coeff < 1)

        enc = ratio.enclose(128)
        if enc.certainly_gt(1):
            return 1
        if enc.certainly_lt(1):
            return -1

        # ratio ** den == coeff ** den * base ** num
        den = ratio.exponent.denominator
        num = ratio.exponent.numerator
        lhs = ratio.coeff**den * (ratio.base**num if num > 0 else 1)
        rhs = ratio.base ** (-num) if num < 0 else 1
        return (lhs > rhs) - (lhs < rhs)

    def __lt__(self, other) -> bool:
        return self.compare(other) < 0

    def __le__(self, other) -> bool:
        return self.compare(other) <= 0

    def __gt__(self, other) -> bool:
        return self.compare(other) > 0

    def __ge__(self, other) -> bool:
        return self.compare(other) >= 0

    def floor(self) -> int:
        return _certified_floor(self)

    def floor_half(self) -> int:
        """floor(self / 2), the half-width of the centered range <self>."""
        return _certified_floor(self.half())


@lru_cache(maxsize=8192)
def _certified_floor(x: PowerReal) -> int:
    if x.is_rational:
        return math.floor(x.coeff)
    bits = max(64, int(abs(x.log2_estimate())) + 64)
    for _ in range(_MAX_DOUBLINGS):
        enc = x.enclose(bits)
        lo, hi = math.floor(enc.lower), math.floor(enc.upper)
        if lo == hi:
            return lo
        if hi == lo + 1 and hi > 0 and x.compare(hi) == 0:
            return hi
        logger.debug("floor of {} undecided at {} bits, doubling", x, bits)
        bits *= 2
    raise PrecisionError(f"could not certify floor of {x}")


def as_power_real(value) -> PowerReal:
    """Coerce an int, Fraction, decimal string or float to an exact real.

    Floats are read through their shortest repr, so ``0.1`` means 1/10.
    """
    if isinstance(value, PowerReal):
        return value
    if isinstance(value, bool):
        raise DomainError("booleans are not reals")
    if isinstance(value, numbers.Integral):
        return PowerReal(Fraction(int(value)))
    if isinstance(value, Fraction):
        return PowerReal(value)
    if isinstance(value, float):
        return PowerReal(Fraction(repr(value)))
    if isinstance(value, str):
        try:
            return PowerReal(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"not a real number: {value!r}") from exc
    raise DomainError(f"cannot use {type(value).__name__} as an exact real")
