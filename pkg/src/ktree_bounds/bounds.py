"""
Provable bounds on the k-Tree algorithm's success probability and expected size.

All arithmetic runs on directed-rounded enclosures: a lower bound reports the
bottom of its enclosure and an upper bound the top, so floating error can
only loosen a bound, never invalidate it.
"""

from fractions import Fraction
from typing import Dict, List

from loguru import logger

from .errors import ParameterError, PrecisionError
from .exactprob import (
    RangeSpec,
    mr_dist_from_pair_unif,
    mr_dist_from_unif,
    prob_sum_in_range,
    prob_sum_mod_in_range,
    prob_sum_with_two_rv_in_range,
)
from .models import BoundPair, BoundsReport, HypothesisFlags, MomentEstimate, SumMode
from .numeric import PrecReal, Rounding
from .params import (
    DEFAULT_PRECISION_BITS,
    ProblemParams,
    check_params,
    filter_power,
    hypothesis_check,
    level_range,
    optional_p,
)

__all__ = [
    "first_moment_induct_factors",
    "first_moment_bounds",
    "second_moment_ub",
    "moment_estimate",
    "prob_bounds",
    "level_size_bounds",
    "size_bounds",
    "max_level_size_bounds",
    "analytic_prob_bounds",
    "analytic_size_bounds",
    "asymptotic_success",
    "zm_bounds",
    "compute_bounds",
]


def _exact(x, bits: int) -> PrecReal:
    return PrecReal.exact(x, bits)


def _first_iteration(m: int, s, p, mode: SumMode, d: int):
    """(probability, max-ratio) factors of the merge at level d."""
    if mode is SumMode.CENTERED_MOD and d == 0:
        return prob_sum_mod_in_range(m, p), Fraction(1)
    return prob_sum_in_range(s, p), mr_dist_from_unif(s, p)


def first_moment_induct_factors(
    m: int,
    k: int,
    p=None,
    d: int = 0,
    mode: SumMode = SumMode.INTEGER,
    bits: int = DEFAULT_PRECISION_BITS,
) -> BoundPair:
    """Factor by which the level-d filters scale E[C], as a (lower, upper) pair.

    Args:
        m: range size
        k: number of lists
        p: filtering parameter, defaults to m^(-1/(log k + 1))
        d: level, 0 <= d <= log k - 1

    Returns:
        (alpha/beta, alpha*beta) with alpha = P(s_d, p)^(k/2^(d+1)) and
        beta = MR(s_d, p)^(k/2^(d+1))
    """
    mode = SumMode(mode)
    L = check_params(m, k, mode)
    if not 0 <= d < L:
        raise ParameterError(f"level must lie in [0, {L - 1}], got {d}")
    p = optional_p(m, k, p)
    prob, ratio = _first_iteration(m, level_range(m, p, d), p, mode, d)
    e = k >> (d + 1)
    alpha = _exact(prob, bits) ** e
    beta = _exact(ratio, bits) ** e
    return BoundPair(lower=alpha / beta, upper=alpha * beta)


def first_moment_bounds(
    m: int,
    k: int,
    n: int,
    p=None,
    mode: SumMode = SumMode.INTEGER,
    bits: int = DEFAULT_PRECISION_BITS,
) -> BoundPair:
    """Bracket E[C], the expected number of zeros in the root list."""
    mode = SumMode(mode)
    L = check_params(m, k, mode)
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    p = optional_p(m, k, p)

    root = RangeSpec.of(level_range(m, p, L))
    base = _exact(n, bits) ** k / root.cardinality
    lower, upper = base, base
    for d in range(L):
        factor = first_moment_induct_factors(m, k, p, d, mode, bits)
        lower = lower * factor.lower
        upper = upper * factor.upper
    return BoundPair(lower=lower, upper=upper, flags=hypothesis_check(m, k, p))


def second_moment_ub(
    m: int,
    k: int,
    n,
    p=None,
    mode: SumMode = SumMode.INTEGER,
    bits: int = DEFAULT_PRECISION_BITS,
) -> PrecReal:
    """Upper bound on E[C^2].

    Each level folds the list size into an effective real size
    n' = sqrt(A^2 n^4 + 2 B n^3), with A the single-sum and B the shared-leaf
    pair probability, each inflated by its max-ratio distance. At k = 1 the
    count of zeros among n' uniform samples of <s> gives (n'u)(n'u + 1).
    In zm mode only the top-level merge uses the modular probability, with
    both max-ratio distances equal to 1.
    """
    mode = SumMode(mode)
    if k < 1 or k & (k - 1):
        raise ParameterError(f"k must be a power of 2, got {k}")
    if mode is SumMode.CENTERED_MOD and m % 2 == 0:
        raise ParameterError("m must be odd in zm mode")
    p = optional_p(m, 2 if k == 1 else k, p)
    size = n if isinstance(n, PrecReal) else _exact(n, bits)

    s = level_range(m, p, 0)
    top = True
    while k > 1:
        if mode is SumMode.CENTERED_MOD and top:
            single = prob_sum_mod_in_range(m, p)
            pair = single * single
        else:
            single = prob_sum_in_range(s, p) * mr_dist_from_unif(s, p)
            pair = prob_sum_with_two_rv_in_range(s, p) * mr_dist_from_pair_unif(s, p)
        a, b = _exact(single, bits), _exact(pair, bits)
        size = (a * a * size**4 + 2 * b * size**3).sqrt()
        s = s * p
        k //= 2
        top = False

    u = Fraction(1, RangeSpec.of(s).cardinality)
    mass = size * u
    return (mass * (mass + 1)).rounded(Rounding.UP)


def moment_estimate(params: ProblemParams) -> MomentEstimate:
    first = first_moment_bounds(
        params.m, params.k, params.n, params.p, params.mode, params.precision_bits
    )
    second = second_moment_ub(
        params.m, params.k, params.n, params.p, params.mode, params.precision_bits
    )
    return MomentEstimate(first_moment=first, second_moment_ub=second)


def prob_bounds(
    m: int,
    k: int,
    n: int,
    p=None,
    mode: SumMode = SumMode.INTEGER,
    bits: int = DEFAULT_PRECISION_BITS,
) -> BoundPair:
    """Success probability bounds: Markov above, Paley-Zygmund below."""
    first = first_moment_bounds(m, k, n, p, mode, bits)
    second = second_moment_ub(m, k, n, p, mode, bits)
    upper = first.upper.min(1)
    lower = first.lower * first.lower / second
    if lower.certainly_gt(1):
        raise PrecisionError("probability lower bound exceeds 1")
    return BoundPair(lower=lower.min(upper), upper=upper, flags=first.flags)


def level_size_bounds(
    m: int,
    k: int,
    n: int,
    p=None,
    mode: SumMode = SumMode.INTEGER,
    bits: int = DEFAULT_PRECISION_BITS,
) -> List[BoundPair]:
    """Bounds on E[sum_i |L^d_i|] for each level d in [0, log k]."""
    mode = SumMode(mode)
    L = check_params(m, k, mode)
    p = optional_p(m, k, p)
    flags = hypothesis_check(m, k, p)

    factors = [
        _first_iteration(m, level_range(m, p, t), p, mode, t) for t in range(L)
    ]
    levels = []
    for d in range(L + 1):
        lists = k >> d
        if d == 0:
            exact = _exact(lists * n, bits)
            levels.append(BoundPair(lower=exact, upper=exact, flags=flags))
            continue
        if d == 1:
            exact = _exact(lists * factors[0][0] * n * n, bits)
            levels.append(BoundPair(lower=exact, upper=exact, flags=flags))
            continue

        gamma = _exact(prob_sum_in_range(level_range(m, p, d - 1), p), bits)
        lower, upper = gamma, gamma
        for t in range(d - 1):
            prob, ratio = factors[t]
            e = 1 << (d - t - 1)
            lower = lower * (_exact(prob, bits) / _exact(ratio, bits)) ** e
            upper = upper * (_exact(prob, bits) * _exact(ratio, bits)) ** e
        scale = _exact(lists, bits) * _exact(n, bits) ** (1 << d)
        levels.append(BoundPair(lower=scale * lower, upper=scale * upper, flags=flags))
    return levels


def size_bounds(
    m: int,
    k: int,
    n: int,
    p=None,
    mode: SumMode = SumMode.INTEGER,
    bits: int = DEFAULT_PRECISION_BITS,
) -> BoundPair:
    """Bracket E[total size], the sum of all list sizes over all levels."""
    levels = level_size_bounds(m, k, n, p, mode, bits)
    lower, upper = levels[0].lower, levels[0].upper
    for level in levels[1:]:
        lower = lower + level.lower
        upper = upper + level.upper
    return BoundPair(lower=lower, upper=upper, flags=levels[0].flags)


def max_level_size_bounds(levels: List[BoundPair]) -> BoundPair:
    """Largest per-level lower and upper values."""
    lower, upper = levels[0].lower, levels[0].upper
    for level in levels[1:]:
        lower = lower.max(level.lower)
        upper = upper.max(level.upper)
    return BoundPair(lower=lower, upper=upper, flags=levels[0].flags)


def _closed_form_inputs(m: int, k: int, n: int, bits: int):
    if k < 4:
        raise ParameterError(f"closed-form bounds need k >= 4, got {k}")
    check_params(m, k)
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    p = filter_power(m, k).enclose(bits)
    return p, p * n


def analytic_prob_bounds(m: int, k: int, n: int, bits: int = DEFAULT_PRECISION_BITS) -> BoundPair:
    """Closed-form success bounds with c = p*n.

    lower = (1 - 150p)^k / (c^-k + (1 + k/n)^k), clamped at 0
    upper = c^k (1 + 37p)^k, clamped at 1
    """
    p, c = _closed_form_inputs(m, k, n, bits)
    flags = hypothesis_check(m, k)
    if not flags.all_hold:
        logger.warning("closed-form hypotheses fail for m={}, k={}: {}", m, k, flags)

    shrink = 1 - 150 * p
    if shrink.certainly_gt(0):
        spread = _exact(1 + Fraction(k, n), bits) ** k
        lower = shrink**k / (c ** (-k) + spread)
    else:
        lower = _exact(0, bits)
    upper = (c ** k * (1 + 37 * p) ** k).min(1)
    return BoundPair(lower=lower.min(upper), upper=upper, flags=flags)


def analytic_size_bounds(m: int, k: int, n: int, bits: int = DEFAULT_PRECISION_BITS) -> BoundPair:
    """Closed-form expected size: kn (1 + sum_d c^(2^d - 1) / 2^d) (1 +- 37p)^(k-1)."""
    p, c = _closed_form_inputs(m, k, n, bits)
    L = k.bit_length() - 1
    center = _exact(1, bits)
    for d in range(1, L + 1):
        center = center + c ** ((1 << d) - 1) / (1 << d)
    center = center * (k * n)

    shrink = 1 - 37 * p
    lower = center * shrink ** (k - 1) if shrink.certainly_gt(0) else _exact(0, bits)
    upper = center * (1 + 37 * p) ** (k - 1)
    return BoundPair(lower=lower, upper=upper, flags=hypothesis_check(m, k))


def asymptotic_success(c, k: int, bits: int = DEFAULT_PRECISION_BITS) -> PrecReal:
    """c^k / (1 + c^k), the large-m success probability at relative size c."""
    c = c if isinstance(c, PrecReal) else _exact(Fraction(c), bits)
    ck = c**k
    return (ck / (1 + ck)).rounded(Rounding.NEAREST)


def compute_bounds(params: ProblemParams, analytic: bool = False) -> BoundsReport:
    """Run the whole pipeline for one instance."""
    m, k, n, mode, bits = params.m, params.k, params.n, params.mode, params.precision_bits
    p = params.p
    flags: HypothesisFlags = hypothesis_check(m, k, p)
    moments = moment_estimate(params)
    prob = prob_bounds(m, k, n, p, mode, bits)
    levels = level_size_bounds(m, k, n, p, mode, bits)

    report = dict(
        prob=prob,
        size=size_bounds(m, k, n, p, mode, bits),
        levels=levels,
        max_level=max_level_size_bounds(levels),
        moments=moments,
        flags=flags,
    )
    if analytic and k >= 4:
        report.update(
            analytic_prob=analytic_prob_bounds(m, k, n, bits),
            analytic_size=analytic_size_bounds(m, k, n, bits),
            asymptotic=asymptotic_success(p.enclose(bits) * n, k, bits),
        )
    return BoundsReport(**report)


def zm_bounds(m: int, k: int, n: int, bits: int = DEFAULT_PRECISION_BITS) -> Dict[str, BoundPair]:
    """Probability and size bounds with centered mod-m sums, m odd."""
    check_params(m, k, SumMode.CENTERED_MOD)
    return {
        "prob": prob_bounds(m, k, n, None, SumMode.CENTERED_MOD, bits),
        "size": size_bounds(m, k, n, None, SumMode.CENTERED_MOD, bits),
    }
