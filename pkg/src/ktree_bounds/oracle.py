"""
Reference computations the bounds and the solver are checked against.

These enumerate instead of reasoning: every function counts outcomes
directly (with numpy doing the counting) and returns exact results.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from .errors import DomainError, ResourceCapError
from .models import SumMode
from .numeric import as_power_real
from .params import ProblemParams, check_params, level_range, optional_p
from .solver import ElementRecord, InputLists, centered, level_thresholds, reduction_levels

__all__ = [
    "Primitive",
    "ConvolutionResult",
    "brute_force_primitive",
    "centered_mod_sum_counts",
    "naive_merge",
    "convolution_expectation",
    "naive_zero_count",
]

MAX_BRUTE_CARDINALITY = 401
MAX_CONVOLUTION_M = 1 << 20
MAX_TUPLES = 10**8


class Primitive(str, Enum):
    """Quantity computed by :func:`brute_force_primitive`."""
    SUM_TO_Z = "sum_to_z"
    SUM_IN_RANGE = "sum_in_range"
    MR_UNIF = "mr_unif"
    TRIPLE_PAIR = "triple_pair"
    MR_PAIR = "mr_pair"
    MOD_IN_RANGE = "mod_in_range"


def _int(x) -> int:
    return int(x)


def brute_force_primitive(which: Primitive, s, p=None, z: Optional[int] = None) -> Fraction:
    """Compute an exactprob quantity by enumerating <s>^2 or <s>^3.

    Args:
        which: the quantity
        s: range size (the modulus m for MOD_IN_RANGE)
        p: filtering parameter, for everything but SUM_TO_Z
        z: target sum, for SUM_TO_Z

    Raises:
        ResourceCapError: |<s>| is above 401
    """
    which = Primitive(which)
    s = as_power_real(s)
    h = s.floor_half()
    d = 2 * h + 1
    if d > MAX_BRUTE_CARDINALITY:
        raise ResourceCapError(f"brute force over |<s>| = {d} exceeds {MAX_BRUTE_CARDINALITY}")
    vals = np.arange(-h, h + 1, dtype=np.int64)
    sums = vals[:, None] + vals[None, :]

    if which is Primitive.SUM_TO_Z:
        if z is None:
            raise DomainError("SUM_TO_Z needs z")
        return Fraction(_int(np.count_nonzero(sums == z)), d * d)

    if p is None:
        raise DomainError(f"{which.value} needs p")
    t = (s * as_power_real(p)).floor_half()
    inner = 2 * t + 1

    if which is Primitive.MOD_IN_RANGE:
        m = s.as_fraction()
        if m.denominator != 1 or m.numerator % 2 == 0:
            raise DomainError("MOD_IN_RANGE needs an odd integer modulus")
        reduced = (sums + h) % int(m) - h
        return Fraction(_int(np.count_nonzero(np.abs(reduced) <= t)), d * d)

    if which is Primitive.SUM_IN_RANGE:
        return Fraction(_int(np.count_nonzero(np.abs(sums) <= t)), d * d)

    if which is Primitive.MR_UNIF:
        counts = np.array([np.count_nonzero(sums == z) for z in range(-t, t + 1)], dtype=np.int64)
        total = _int(counts.sum())
        hi, lo = _int(counts.max()), _int(counts.min())
        return max(Fraction(hi * inner, total), Fraction(total, lo * inner))

    # hits[w, x] = 1 when w + x lands in <sp>
    hits = (np.abs(sums) <= t).astype(np.int64)
    if which is Primitive.TRIPLE_PAIR:
        per_w = hits.sum(axis=1)
        return Fraction(_int((per_w * per_w).sum()), d**3)

    # joint[z1, z2] = #{w : z1 - w and z2 - w both in <s>}
    targets = np.arange(-t, t + 1, dtype=np.int64)
    reach = (np.abs(targets[:, None] - vals[None, :]) <= h).astype(np.int64)
    joint = reach @ reach.T
    total = _int(joint.sum())
    hi, lo = _int(joint.max()), _int(joint.min())
    cells = inner * inner
    return max(Fraction(hi * cells, total), Fraction(total, lo * cells))


def centered_mod_sum_counts(m: int) -> np.ndarray:
    """How often each residue of <m> is hit by the centered sum of two <m> samples."""
    if m % 2 == 0 or m > MAX_BRUTE_CARDINALITY:
        raise DomainError(f"need an odd modulus <= {MAX_BRUTE_CARDINALITY}, got {m}")
    h = (m - 1) // 2
    vals = np.arange(-h, h + 1, dtype=np.int64)
    reduced = (vals[:, None] + vals[None, :] + h) % m - h
    return np.bincount((reduced + h).ravel(), minlength=m)


def naive_merge(
    la: Sequence[int], lb: Sequence[int], tau: int, modulus: Optional[int] = None
) -> List[ElementRecord]:
    """Quadratic double loop over all pairs."""
    out = []
    for i, a in enumerate(la):
        for j, b in enumerate(lb):
            v = a + b if modulus is None else centered(a + b, modulus)
            if abs(v) <= tau:
                out.append(ElementRecord(v, i, j))
    return sorted(out)


@dataclass(frozen=True)
class ConvolutionResult:
    """Exact pass probabilities of a single leaf tuple.

    ``level_pass_prob[d]`` is the probability that a fixed 2^d-tuple of leaves
    passes every filter up to level d; ``tuple_zero_prob`` that a k-tuple also
    sums to 0.
    """
    tuple_zero_prob: Fraction
    level_pass_prob: List[Fraction]

    def expected_zero_count(self, k: int, n: int) -> Fraction:
        return n**k * self.tuple_zero_prob

    def expected_level_sizes(self, k: int, n: int) -> List[Fraction]:
        return [(k >> d) * n ** (1 << d) * q for d, q in enumerate(self.level_pass_prob)]

    def expected_total_size(self, k: int, n: int) -> Fraction:
        return sum(self.expected_level_sizes(k, n), Fraction(0))


def _windowed_self_convolution(counts: np.ndarray, half: int, out_half: int) -> np.ndarray:
    """c'(z) = sum_x c(x) c(z - x) for |z| <= out_half, c supported on [-half, half]."""
    peak = int(counts.max()) if counts.size else 0
    exact = peak * peak * len(counts) >= 2**62 or counts.dtype == object
    work = counts.astype(object) if exact else counts
    out = np.zeros(2 * out_half + 1, dtype=object if exact else np.int64)
    for z in range(-out_half, out_half + 1):
        lo, hi = max(-half, z - half), min(half, z + half)
        if lo > hi:
            continue
        left = work[lo + half:hi + half + 1]
        right = work[z - hi + half:z - lo + half + 1][::-1]
        out[z + out_half] = np.dot(left, right)
    return out


def convolution_expectation(m: int, k: int, p=None, mode: SumMode = SumMode.INTEGER) -> ConvolutionResult:
    """Exact E[C] and per-level pass probabilities by truncated self-convolution.

    f_0 is uniform on <m>; f_{d+1} is the self-convolution of f_d truncated to
    <m p^(d+1)>, without renormalizing. Counts are kept as integers over the
    common denominator |<m>|^(2^d). Levels the solver reduces mod m are
    folded onto <m> before truncation.
    """
    mode = SumMode(mode)
    L = check_params(m, k, mode)
    if m > MAX_CONVOLUTION_M:
        raise ResourceCapError(f"convolution oracle is limited to m <= {MAX_CONVOLUTION_M}")
    p = optional_p(m, k, p)

    reduce_at = reduction_levels(ProblemParams(m=m, k=k, n=1, mode=mode))
    half = m // 2
    card = 2 * half + 1
    counts = np.ones(card, dtype=np.int64)
    denominator = card
    passes = [Fraction(1)]
    for d in range(1, L + 1):
        out_half = level_range(m, p, d).floor_half()
        if d in reduce_at:
            out_half = min(out_half, m // 2)
            full = _windowed_self_convolution(counts, half, 2 * half)
            folded = np.zeros(m, dtype=full.dtype)
            np.add.at(folded, (np.arange(-2 * half, 2 * half + 1) + m // 2) % m, full)
            counts = folded[m // 2 - out_half:m // 2 + out_half + 1]
        else:
            counts = _windowed_self_convolution(counts, half, out_half)
        half = out_half
        denominator = denominator * denominator
        passes.append(Fraction(int(sum(int(c) for c in counts)), denominator))

    zero = Fraction(int(counts[half]), denominator)
    return ConvolutionResult(tuple_zero_prob=zero, level_pass_prob=passes)


def naive_zero_count(lists: InputLists, params: ProblemParams) -> int:
    """Count leaf tuples that pass every filter and sum to 0, by enumeration.

    Raises:
        ResourceCapError: n^k above 10^8
    """
    lists.check(params)
    if params.n ** params.k > MAX_TUPLES:
        raise ResourceCapError(f"n^k = {params.n ** params.k} exceeds {MAX_TUPLES}")
    taus = level_thresholds(params)
    reduce_at = reduction_levels(params)
    dtype = object if params.m >= 2**60 else np.int64
    half = (params.m - 1) // 2

    # survivors of each subtree, one entry per passing leaf sub-tuple
    layer = [np.array(lst, dtype=dtype) for lst in lists.lists]
    for d in range(1, params.log_k):
        nxt = []
        for i in range(0, len(layer), 2):
            sums = (layer[i][:, None] + layer[i + 1][None, :]).ravel()
            if d in reduce_at:
                sums = (sums + half) % params.m - half
            nxt.append(sums[np.abs(sums) <= taus[d]])
        layer = nxt

    left, right = layer
    count = 0
    for start in range(0, len(left), 1024):
        sums = left[start:start + 1024, None] + right[None, :]
        if params.log_k in reduce_at:
            sums = (sums + half) % params.m - half
        count += int(np.count_nonzero(sums == 0))
    return count
