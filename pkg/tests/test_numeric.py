"""
Tests for ktree_bounds.numeric.
"""

import math
import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from ktree_bounds.errors import DomainError
from ktree_bounds.numeric import (
    PowerReal,
    PrecReal,
    Rounding,
    as_power_real,
    format_fraction,
)


class TestFormatFraction:
    """Test directed decimal rendering."""

    def test_directed_third(self):
        """Test that 1/3 rounds down and up in the last digit."""
        assert format_fraction(Fraction(1, 3), 5, Rounding.DOWN) == "3.3333e-1"
        assert format_fraction(Fraction(1, 3), 5, Rounding.UP) == "3.3334e-1"
        assert format_fraction(Fraction(1, 3), 5, Rounding.NEAREST) == "3.3333e-1"

    def test_exact_values(self):
        """Test that exact values drop trailing zeros."""
        assert format_fraction(Fraction(1), 10, Rounding.UP) == "1e0"
        assert format_fraction(Fraction(1, 2), 3, Rounding.DOWN) == "5e-1"
        assert format_fraction(Fraction(0), 3, Rounding.DOWN) == "0"

    def test_negative_flips_direction(self):
        """Test that rounding down a negative value moves away from zero."""
        assert format_fraction(Fraction(-1, 3), 2, Rounding.DOWN) == "-3.4e-1"
        assert format_fraction(Fraction(-1, 3), 2, Rounding.UP) == "-3.3e-1"

    def test_far_outside_float_range(self):
        """Test a magnitude no float can hold."""
        text = format_fraction(Fraction(1, 2**4000), 6, Rounding.DOWN)
        assert text.endswith("e-1205")

    def test_carry_into_exponent(self):
        """Test rounding 0.99999 up to one digit."""
        assert format_fraction(Fraction(99999, 100000), 1, Rounding.UP) == "1e0"


class TestPrecReal:
    """Test interval-backed reals."""

    def test_exact_enclosure(self):
        """Test that an exact rational lies inside its enclosure."""
        x = PrecReal.exact(Fraction(1, 3), 128)
        assert x.lower <= Fraction(1, 3) <= x.upper
        assert x.upper - x.lower < Fraction(1, 2**120)

    def test_integer_is_exact(self):
        """Test that small integers have a degenerate enclosure."""
        x = PrecReal.exact(12345, 64)
        assert x.lower == x.upper == 12345

    def test_rounding_selects_endpoint(self):
        """Test that value follows the rounding direction."""
        x = PrecReal.exact(Fraction(1, 3), 64)
        assert x.rounded(Rounding.DOWN).value == x.lower
        assert x.rounded(Rounding.UP).value == x.upper
        assert x.lower <= x.rounded(Rounding.NEAREST).value <= x.upper

    def test_arithmetic_encloses_result(self):
        """Test that + - * / enclose the exact result."""
        a = PrecReal.exact(Fraction(1, 3), 96)
        b = PrecReal.exact(Fraction(2, 7), 96)
        for result, exact in [
            (a + b, Fraction(1, 3) + Fraction(2, 7)),
            (a - b, Fraction(1, 3) - Fraction(2, 7)),
            (a * b, Fraction(2, 21)),
            (a / b, Fraction(7, 6)),
            (1 - a, Fraction(2, 3)),
            (a**5, Fraction(1, 243)),
        ]:
            assert result.lower <= exact <= result.upper

    def test_sqrt_and_log2(self):
        """Test transcendental enclosures."""
        assert PrecReal.exact(4, 64).sqrt().lower <= 2 <= PrecReal.exact(4, 64).sqrt().upper
        two = PrecReal.exact(2, 128).sqrt()
        assert two.lower**2 <= 2 <= two.upper**2
        lg = PrecReal.exact(8, 128).log2()
        assert lg.lower <= 3 <= lg.upper

    def test_fractional_power(self):
        """Test that the cube of 2^(1/3) encloses 2."""
        x = PrecReal.exact(2, 128) ** Fraction(1, 3)
        assert x.lower**3 <= 2 <= x.upper**3

    def test_divide_by_zero(self):
        """Test that dividing by an enclosure of zero fails."""
        with pytest.raises(DomainError):
            PrecReal.exact(1, 64) / PrecReal.exact(0, 64)

    def test_min_max_and_comparisons(self):
        """Test min, max and certain comparisons."""
        a = PrecReal.exact(Fraction(1, 3), 64)
        b = PrecReal.exact(Fraction(1, 2), 64)
        assert a.certainly_lt(b)
        assert b.certainly_gt(a)
        assert a.min(b).upper == a.upper
        assert a.max(b).lower == b.lower
        assert not a.certainly_lt(a)

    def test_tiny_values_keep_precision(self):
        """Test that 2^-3000 survives multiplication."""
        x = PrecReal.exact(Fraction(1, 2**1500), 128)
        y = x * x
        assert y.lower <= Fraction(1, 2**3000) <= y.upper
        assert y.log2_decimal(6).startswith("-3")

    def test_decimal_output(self):
        """Test decimal rendering of lower and upper ends."""
        x = PrecReal.exact(Fraction(1, 3), 128)
        assert x.rounded(Rounding.DOWN).to_decimal(4) == "3.333e-1"
        assert x.rounded(Rounding.UP).to_decimal(4) == "3.334e-1"
        assert PrecReal.exact(0, 64).log2_decimal() == "-inf"

    def test_foreign_integers(self):
        """Test that numpy integers mix with PrecReal and PowerReal."""
        third = PrecReal.exact(1, 64) / np.int64(3)
        assert third.lower <= Fraction(1, 3) <= third.upper
        assert PowerReal(np.int64(2)).as_fraction() == 2

    def test_gmpy_integers(self):
        """Test that gmpy2 integers mix with PrecReal."""
        gmpy2 = pytest.importorskip("gmpy2")
        third = PrecReal.exact(1, 64) / gmpy2.mpz(3)
        assert type(third.lower) is Fraction
        assert type(third.lower.numerator) is int
        assert third.lower <= Fraction(1, 3) <= third.upper

    @pytest.mark.parametrize("bits", [64, 128, 192])
    def test_random_expressions_enclose_reference(self, bits):
        """Test random log, exp, sqrt and fractional-power chains against mpmath at 2000 bits."""
        rng = random.Random(bits)

        def ratio(lo, hi):
            return Fraction(rng.randint(lo, hi), rng.randint(lo, hi))

        def mp(q):
            return mpmath.mpf(q.numerator) / q.denominator

        for _ in range(50):
            x, q1, q2, q4 = (ratio(1, 1000) for _ in range(4))
            q3 = Fraction(rng.randint(1, 100), rng.randint(50, 200))
            e = Fraction(rng.randint(1, 9), rng.randint(2, 9))

            v1 = PrecReal.exact(x, bits) * q1 + q2
            v2 = v1**e
            v3 = v2.log() * q3
            v4 = v3.exp() / (v1.sqrt() + q4)

            with mpmath.workprec(2000):
                r1 = mp(x) * mp(q1) + mp(q2)
                r4 = mpmath.exp(mpmath.log(mpmath.power(r1, mp(e))) * mp(q3)) / (mpmath.sqrt(r1) + mp(q4))
                man, exp = r4.man_exp
            ref = Fraction(int(man)) * 2**exp if exp >= 0 else Fraction(int(man), 2 ** (-exp))
            assert v4.rounded(Rounding.DOWN).value <= ref <= v4.rounded(Rounding.UP).value
            assert v4.upper - v4.lower <= ref / 2 ** (bits // 2)


class TestPowerReal:
    """Test exact real powers."""

    def test_normalizes_integer_exponent(self):
        """Test that (2^64)^(-1/4) becomes the rational 2^-16."""
        x = PowerReal(1, 2**64, Fraction(-1, 4))
        assert x.is_rational
        assert x.as_fraction() == Fraction(1, 2**16)

    def test_normalizes_base(self):
        """Test that the base is reduced to its smallest root."""
        x = PowerReal(1, 2**64, Fraction(-1, 3))
        assert x.base == 2
        assert x.exponent == Fraction(-64, 3)

    def test_cube_root_floor(self):
        """Test the floor of 2^(64/3)."""
        x = PowerReal(1, 2, Fraction(64, 3))
        assert x.floor() == 2642245
        assert x.floor_half() == 1321122

    def test_floor_of_exact_integer(self):
        """Test that an exact integer power floors to itself."""
        assert (PowerReal(1, 3, Fraction(1, 2)) ** 2).floor() == 3
        assert PowerReal(1, 2**10, Fraction(1, 2)).floor() == 32

    def test_compare(self):
        """Test exact comparisons with rationals."""
        sqrt2 = PowerReal(1, 2, Fraction(1, 2))
        assert sqrt2 < Fraction(3, 2)
        assert sqrt2 > Fraction(7, 5)
        assert sqrt2 * sqrt2 == PowerReal(2)
        assert (sqrt2 * sqrt2).compare(2) == 0

    def test_mismatched_bases(self):
        """Test that products of unrelated irrational powers fail."""
        with pytest.raises(DomainError):
            PowerReal(1, 2, Fraction(1, 2)) * PowerReal(1, 3, Fraction(1, 2))

    def test_enclosure_contains_float(self):
        """Test that the enclosure of 2^(-64/3) matches floating point."""
        enc = PowerReal(1, 2, Fraction(-64, 3)).enclose(128)
        assert math.isclose(float(enc), 2 ** (-64 / 3), rel_tol=1e-12)


class TestAsPowerReal:
    """Test coercion to exact reals."""

    def test_float_reads_repr(self):
        """Test that 0.1 means exactly 1/10."""
        assert as_power_real(0.1).as_fraction() == Fraction(1, 10)

    def test_string(self):
        """Test decimal and fraction strings."""
        assert as_power_real("11.7").as_fraction() == Fraction(117, 10)
        assert as_power_real("1/3").as_fraction() == Fraction(1, 3)

    def test_rejects_bool_and_garbage(self):
        """Test that booleans and non-numbers are rejected."""
        with pytest.raises(DomainError):
            as_power_real(True)
        with pytest.raises(DomainError):
            as_power_real("abc")
        with pytest.raises(DomainError):
            as_power_real([1])
