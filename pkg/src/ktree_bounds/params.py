"""
Problem parameters, the filtering parameter p, per-level ranges and hypothesis checks.
"""

import re
from fractions import Fraction
from functools import lru_cache
from typing import Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import DomainError, ParameterError
from .models import HypothesisFlags, SumMode
from .numeric import PowerReal, PrecReal, Rounding, as_power_real

__all__ = [
    "DEFAULT_PRECISION_BITS",
    "ProblemParams",
    "SumMode",
    "parse_modulus",
    "log2_k",
    "filter_power",
    "filter_param",
    "level_range",
    "range_cardinality",
    "hypothesis_check",
    "check_params",
    "optional_p",
]

DEFAULT_PRECISION_BITS = 192

_MODULUS_RE = re.compile(r"^2\s*(?:\^|\*\*)\s*(\d+)\s*(?:([+-])\s*(\d+))?$")


def parse_modulus(text: Union[str, int]) -> int:
    """Parse ``m`` given as a decimal string or as ``2^b`` / ``2^b-c`` / ``2^b+c``."""
    if isinstance(text, int):
        return text
    text = text.strip().replace("_", "")
    match = _MODULUS_RE.match(text)
    if match:
        value = 1 << int(match.group(1))
        if match.group(2):
            offset = int(match.group(3))
            value = value + offset if match.group(2) == "+" else value - offset
        return value
    if text.isdigit():
        return int(text)
    raise ParameterError(f"cannot parse modulus {text!r}: expected decimal or 2^b")


def log2_k(k: int) -> int:
    """log2 of k, which must be a power of 2 and at least 2."""
    if isinstance(k, bool) or not isinstance(k, int) or k < 2 or k & (k - 1):
        raise ParameterError(f"k must be a power of 2 and >= 2, got {k}")
    return k.bit_length() - 1


class ProblemParams(BaseModel):
    """One k-SUM instance: k lists of n uniform integers from <m>."""
    model_config = ConfigDict(frozen=True)

    m: int = Field(ge=3, description="Sampling range size")
    k: int = Field(ge=2, description="Number of lists, a power of 2")
    n: int = Field(ge=1, description="Size of each input list")
    mode: SumMode = Field(default=SumMode.INTEGER, description="Integer or centered mod-m sums")
    precision_bits: int = Field(
        default=DEFAULT_PRECISION_BITS, ge=64, description="Working precision of bound arithmetic"
    )

    @field_validator("k")
    @classmethod
    def _power_of_two(cls, v: int) -> int:
        if v & (v - 1):
            raise ValueError("k must be a power of 2")
        return v

    @model_validator(mode="after")
    def _odd_modulus(self) -> "ProblemParams":
        if self.mode is SumMode.CENTERED_MOD and self.m % 2 == 0:
            raise ValueError("m must be odd in zm mode")
        return self

    @property
    def log_k(self) -> int:
        return self.k.bit_length() - 1

    @property
    def p(self) -> PowerReal:
        return filter_power(self.m, self.k)

    def with_n(self, n: int) -> "ProblemParams":
        return self.model_copy(update={"n": n})

    def echo(self) -> dict:
        """Parameters as they appear in output records."""
        data = {
            "m": str(self.m),
            "k": self.k,
            "n": self.n,
            "mode": self.mode.value,
            "precisionBits": self.precision_bits,
        }
        if self.m & (self.m - 1) == 0:
            data["mPow2"] = f"2^{self.m.bit_length() - 1}"
        return data


@lru_cache(maxsize=1024)
def filter_power(m: int, k: int) -> PowerReal:
    """p = m^(-1/(log k + 1)), exactly."""
    if m < 3:
        raise ParameterError(f"m must be >= 3, got {m}")
    return PowerReal(1, m, Fraction(-1, log2_k(k) + 1))


def filter_param(m: int, k: int, bits: int = DEFAULT_PRECISION_BITS) -> PrecReal:
    """p = m^(-1/(log k + 1)) as an enclosure at ``bits`` precision.

    Args:
        m: range size, at least 3
        k: number of lists, a power of 2

    Returns:
        PrecReal reporting the midpoint of its enclosure
    """
    return filter_power(m, k).enclose(bits, Rounding.NEAREST)


def level_range(m: int, p, d: int) -> PowerReal:
    """s_d = m * p^d, the range size lists at level d are filtered to."""
    if d < 0:
        raise DomainError(f"level must be >= 0, got {d}")
    return as_power_real(m) * as_power_real(p) ** d


def range_cardinality(s) -> int:
    """|<s>| = 2 * floor(s/2) + 1."""
    s = as_power_real(s)
    if s < 1:
        raise DomainError(f"range size must be >= 1, got {s}")
    return 2 * s.floor_half() + 1


def hypothesis_check(m: int, k: int, p=None) -> HypothesisFlags:
    """Evaluate every closed-form hypothesis exactly.

    A flag is true only when its inequality provably holds.
    """
    L = log2_k(k)
    p = filter_power(m, k) if p is None else as_power_real(p)
    return HypothesisFlags(
        k_ge_4=k >= 4,
        m_gt_30_pow=m > 30 ** (L + 1),
        p_lt_1_over_30=p < Fraction(1, 30),
        mp_logk_gt_30=level_range(m, p, L) > 30,
        m_gt_7k=m > 7 * k,
        pk_cond=p * k > Fraction(7, m) ** (k // 2 - 1),
        below_theorem_scope=k < 4,
    )


def check_params(m: int, k: int, mode: SumMode = SumMode.INTEGER) -> int:
    """Validate (m, k, mode) outside a ProblemParams; returns log2 k."""
    L = log2_k(k)
    if m < 3:
        raise ParameterError(f"m must be >= 3, got {m}")
    if SumMode(mode) is SumMode.CENTERED_MOD and m % 2 == 0:
        raise ParameterError("m must be odd in zm mode")
    return L


def optional_p(m: int, k: int, p=None) -> PowerReal:
    return filter_power(m, k) if p is None else as_power_real(p)

