"""
Exact probabilities for sums of two uniform samples from a centered range.

Every function returns a ``Fraction``; floors of real range sizes are taken
on exact ``PowerReal`` values, so the results are exact given those floors.
Arguments named ``s`` accept a :class:`RangeSpec` or anything
:func:`as_power_real` understands; ``p`` must lie in (0, 1].
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError, ParameterError
from .numeric import PowerReal, as_power_real

__all__ = [
    "RangeSpec",
    "prob_sum_to_z",
    "prob_sum_in_range",
    "mr_dist_from_unif",
    "prob_sum_with_two_rv_in_range",
    "mr_dist_from_pair_unif",
    "prob_sum_mod_in_range",
]


@dataclass(frozen=True)
class RangeSpec:
    """A range size s >= 1 with its cached floor(s/2) and |<s>|."""
    s: PowerReal
    floor_half: int
    cardinality: int

    @classmethod
    def of(cls, s) -> "RangeSpec":
        if isinstance(s, RangeSpec):
            return s
        return _range_spec(as_power_real(s))


@lru_cache(maxsize=4096)
def _range_spec(s: PowerReal) -> RangeSpec:
    if s < 1:
        raise DomainError(f"range size must be >= 1, got {s}")
    h = s.floor_half()
    return RangeSpec(s=s, floor_half=h, cardinality=2 * h + 1)


def _filter(p) -> PowerReal:
    p = as_power_real(p)
    if p > 1:
        raise DomainError(f"filter parameter must lie in (0, 1], got {p}")
    return p


def _inner_half(r: RangeSpec, p: PowerReal) -> int:
    """floor(s*p/2), the half-width of the filtered range <sp>."""
    return (r.s * p).floor_half()


def prob_sum_to_z(s, z: int) -> Fraction:
    """Pr[x + y = z] for x, y uniform on <s>: 1/d - |z|/d^2."""
    r = RangeSpec.of(s)
    if abs(z) > 2 * r.floor_half:
        raise DomainError(f"|z| = {abs(z)} exceeds 2*floor(s/2) = {2 * r.floor_half}")
    d = r.cardinality
    return Fraction(1, d) - Fraction(abs(z), d * d)


def prob_sum_in_range(s, p) -> Fraction:
    """Pr[x + y in <sp>] for x, y uniform on <s>.

    With t = floor(sp/2) and d = |<s>| this is (2t+1)/d - (t^2+t)/d^2.
    """
    return _prob_sum_in_range(RangeSpec.of(s), _filter(p))


@lru_cache(maxsize=4096)
def _prob_sum_in_range(r: RangeSpec, p: PowerReal) -> Fraction:
    t = _inner_half(r, p)
    d = r.cardinality
    return Fraction(2 * t + 1, d) - Fraction(t * t + t, d * d)


def mr_dist_from_unif(s, p) -> Fraction:
    """Max-ratio distance between U_sp and x + y conditioned on landing in <sp>.

    The conditioned mass peaks at 0 and bottoms out at +-floor(sp/2).
    """
    return _mr_dist_from_unif(RangeSpec.of(s), _filter(p))


@lru_cache(maxsize=4096)
def _mr_dist_from_unif(r: RangeSpec, p: PowerReal) -> Fraction:
    t = _inner_half(r, p)
    in_range = _prob_sum_in_range(r, p)
    if in_range == 0:
        raise DomainError("conditioned support is empty")
    alpha = prob_sum_to_z(r, 0) / in_range
    beta = prob_sum_to_z(r, t) / in_range
    u = Fraction(1, 2 * t + 1)
    return max(alpha / u, u / beta)


def prob_sum_with_two_rv_in_range(s, p) -> Fraction:
    """Pr[w + x in <sp> and w + y in <sp>] for w, x, y uniform on <s>."""
    return _prob_two_rv(RangeSpec.of(s), _filter(p))


@lru_cache(maxsize=4096)
def _prob_two_rv(r: RangeSpec, p: PowerReal) -> Fraction:
    h, t = r.floor_half, _inner_half(r, p)
    inner = 2 * t + 1
    cube = r.cardinality**3

    # |w| <= h - t: every x with w + x in <sp> is available
    alpha = Fraction((2 * (h - t) + 1) * inner * inner, cube)

    # |w| = h - t + i for i = 1..t leaves 2t + 1 - i choices on each side
    x_hat = inner - 1
    y_hat = inner - 1 - t
    squares = (x_hat * (x_hat + 1) * (2 * x_hat + 1) - y_hat * (y_hat + 1) * (2 * y_hat + 1)) // 6
    beta = Fraction(2 * squares, cube)
    return alpha + beta


def mr_dist_from_pair_unif(s, p) -> Fraction:
    """Max-ratio distance between U_sp x U_sp and the law of (w + x, w + y)
    conditioned on both landing in <sp>.
    """
    return _mr_dist_pair(RangeSpec.of(s), _filter(p))


@lru_cache(maxsize=4096)
def _mr_dist_pair(r: RangeSpec, p: PowerReal) -> Fraction:
    h, t = r.floor_half, _inner_half(r, p)
    both = _prob_two_rv(r, p)
    if both == 0:
        raise DomainError("conditioned support is empty")
    scale = r.cardinality**3 * both
    alpha = Fraction(r.cardinality) / scale
    beta = Fraction(2 * (h - t) + 1) / scale
    u = Fraction(1, (2 * t + 1) ** 2)
    return max(alpha / u, u / beta)


def prob_sum_mod_in_range(m: int, p) -> Fraction:
    """Pr[(x + y) reduced into <m> lands in <mp>] for x, y uniform on <m>, m odd.

    The centered sum mod m is uniform on <m>, so this is |<mp>| / m.
    """
    if m < 3 or m % 2 == 0:
        raise ParameterError(f"m must be odd and >= 3, got {m}")
    t = (as_power_real(m) * _filter(p)).floor_half()
    return Fraction(2 * t + 1, m)
