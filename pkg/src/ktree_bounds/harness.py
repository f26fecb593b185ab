"""
Monte-Carlo trials, list-size searches, sweeps and complexity curves.
"""

import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from loguru import logger
from typing_extensions import TypeAlias

from .bounds import (
    analytic_prob_bounds,
    analytic_size_bounds,
    prob_bounds,
    size_bounds,
)
from .errors import ParameterError, UnreachableTargetError
from .models import (
    ComplexityRow,
    Criterion,
    SearchResult,
    Side,
    SumMode,
    SweepRow,
    TrialAggregates,
    TrialSummary,
)
from .numeric import Rounding, as_power_real, format_fraction
from .params import DEFAULT_PRECISION_BITS, ProblemParams, check_params, filter_param, filter_power
from .solver import DEFAULT_MEMORY_CAP, InputLists, generate_lists, run_ktree

__all__ = [
    "CI_DELTA",
    "DEFAULT_N_MAX",
    "ci_radius99",
    "run_trials",
    "search_n",
    "sweep",
    "n_for_c",
    "complexity_at_target",
]

CI_DELTA = 0.01
DEFAULT_N_MAX = 1 << 40
_BATCHES_PER_WORKER = 4

ListFactory: TypeAlias = Callable[[ProblemParams, int], InputLists]


def ci_radius99(trials: int) -> float:
    """Two-sided Hoeffding radius at confidence 1 - CI_DELTA."""
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    return math.sqrt(math.log(2 / CI_DELTA) / (2 * trials))


def _run_batch(args) -> TrialAggregates:
    """Run trials [start, stop) of one seed.

    Module level so ProcessPoolExecutor can pickle it.
    """
    params, seed, start, stop, cap, list_factory = args
    agg = TrialAggregates()
    for trial in range(start, stop):
        lists = list_factory(params, trial) if list_factory else generate_lists(params, seed, trial)
        agg = agg.add(run_ktree(params, lists, cap))
    return agg


def _std(total: int, squares: int, trials: int) -> float:
    if trials < 2:
        return 0.0
    variance = (Fraction(squares) - Fraction(total * total, trials)) / (trials - 1)
    return math.sqrt(max(variance, 0))


def _summarize(params: ProblemParams, seed: int, agg: TrialAggregates) -> TrialSummary:
    t = agg.trials
    return TrialSummary(
        m=str(params.m),
        k=params.k,
        n=params.n,
        mode=params.mode,
        seed=seed,
        trials=t,
        successes=agg.successes,
        success_rate=agg.successes / t,
        ci_radius99=ci_radius99(t),
        mean_total_size=agg.total_size / t,
        std_total_size=_std(agg.total_size, agg.total_size_sq, t),
        mean_max_level_size=agg.max_level_size / t,
        std_max_level_size=_std(agg.max_level_size, agg.max_level_size_sq, t),
        mean_zero_count=agg.zero_count / t,
        mean_zero_count_squared=agg.zero_count_sq / t,
        aggregates=agg,
    )


def run_trials(
    params: ProblemParams,
    trials: int,
    seed: int,
    parallelism: int = 1,
    cap: Optional[int] = DEFAULT_MEMORY_CAP,
    list_factory: Optional[ListFactory] = None,
) -> TrialSummary:
    """Run ``trials`` independent k-Tree executions and aggregate them.

    Trial t draws its lists from the stream of (seed, t), and aggregates are
    integer sums, so the summary does not depend on ``parallelism``.

    Args:
        params: instance parameters
        trials: number of runs, >= 1
        seed: master seed, >= 0
        parallelism: worker processes; 1 runs inline
        cap: per-run memory cap in list elements
        list_factory: replaces random generation, called as (params, trial);
            always runs inline
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if parallelism < 1:
        raise ParameterError(f"parallelism must be >= 1, got {parallelism}")
    if seed < 0:
        raise ParameterError(f"seed must be non-negative, got {seed}")

    logger.info("running {} trials for m={}, k={}, n={} (seed {})", trials, params.m, params.k, params.n, seed)
    if parallelism == 1 or list_factory is not None or trials == 1:
        agg = _run_batch((params, seed, 0, trials, cap, list_factory))
    else:
        n_batches = min(trials, parallelism * _BATCHES_PER_WORKER)
        edges = [trials * i // n_batches for i in range(n_batches + 1)]
        batch_args = [
            (params, seed, edges[i], edges[i + 1], cap, None) for i in range(n_batches)
        ]
        agg = TrialAggregates()
        with ProcessPoolExecutor(max_workers=parallelism) as executor:
            futures = [executor.submit(_run_batch, args) for args in batch_args]
            for future in as_completed(futures):
                agg = agg.merge(future.result())

    summary = _summarize(params, seed, agg)
    logger.info("{} / {} trials succeeded", summary.successes, summary.trials)
    return summary


def _derived_seed(seed: int, *key: int) -> int:
    """Seed of the child stream ``key`` of the master seed."""
    return int(np.random.SeedSequence(seed, spawn_key=key).generate_state(1, dtype=np.uint64)[0])


def _approx_c(m: int, k: int, n: int) -> float:
    return float(filter_param(m, k, 64) * n)


def search_n(
    m: int,
    k: int,
    target: float,
    criterion: Criterion,
    mode: SumMode = SumMode.INTEGER,
    bits: int = DEFAULT_PRECISION_BITS,
    n_max: int = DEFAULT_N_MAX,
    trials: int = 1000,
    seed: int = 0,
    parallelism: int = 1,
    cap: Optional[int] = DEFAULT_MEMORY_CAP,
) -> SearchResult:
    """Smallest n in [1, n_max] whose criterion value reaches ``target``.

    The bracket doubles from n = 1 until the criterion reaches the target,
    then bisects, assuming the criterion is nondecreasing in n. Empirical
    probes run ``trials`` trials with a seed derived from (seed, n) and decide
    on the point estimate.

    Raises:
        UnreachableTargetError: no n up to n_max reaches the target
    """
    criterion = Criterion(criterion)
    mode = SumMode(mode)
    check_params(m, k, mode)
    if not 0 < target < 1:
        raise ParameterError(f"target must lie in (0, 1), got {target}")
    if n_max < 1:
        raise ParameterError(f"n_max must be >= 1, got {n_max}")
    goal = Fraction(repr(float(target)))

    values: Dict[int, Fraction] = {}

    def value(n: int) -> Fraction:
        if n not in values:
            if criterion is Criterion.EMPIRICAL:
                params = ProblemParams(m=m, k=k, n=n, mode=mode, precision_bits=bits)
                summary = run_trials(params, trials, _derived_seed(seed, n), parallelism, cap)
                values[n] = Fraction(summary.successes, summary.trials)
            else:
                pair = prob_bounds(m, k, n, None, mode, bits)
                values[n] = pair.lower.value if criterion is Criterion.LOWER else pair.upper.value
            logger.debug("probe n={}: {} = {}", n, criterion.value, float(values[n]))
        return values[n]

    def render(x: Fraction) -> str:
        return format_fraction(x, 30, Rounding.NEAREST)

    # value(lo) < goal <= value(hi); lo = 0 stands for "below 1"
    lo, hi = 0, 1
    while value(hi) < goal:
        if hi >= n_max:
            best_n = max(values, key=lambda n: (values[n], -n))
            raise UnreachableTargetError(
                f"{criterion.value} criterion stays below {target} up to n = {n_max}",
                best_n=best_n,
                best_value=render(values[best_n]),
            )
        lo, hi = hi, min(2 * hi, n_max)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if value(mid) >= goal:
            hi = mid
        else:
            lo = mid

    previous = render(value(hi - 1)) if hi > 1 else None
    return SearchResult(
        n=hi,
        c=_approx_c(m, k, hi),
        criterion=criterion,
        target=target,
        value=render(value(hi)),
        previous_value=previous,
        probes=len(values),
        ci_radius99=ci_radius99(trials) if criterion is Criterion.EMPIRICAL else None,
    )


def n_for_c(m: int, k: int, c) -> int:
    """round(c / p), at least 1, computed exactly."""
    value = Fraction(repr(c)) if isinstance(c, float) else Fraction(c)
    if value <= 0:
        raise ParameterError(f"c must be positive, got {c}")
    twice = as_power_real(value) * filter_power(m, k).reciprocal() * 2
    return max(1, (twice.floor() + 1) // 2)


def sweep(
    m: int,
    k: int,
    c_grid: Optional[Sequence[float]] = None,
    n_grid: Optional[Sequence[int]] = None,
    mode: SumMode = SumMode.INTEGER,
    bits: int = DEFAULT_PRECISION_BITS,
    empirical: bool = False,
    trials: int = 1000,
    seed: int = 0,
    parallelism: int = 1,
    cap: Optional[int] = DEFAULT_MEMORY_CAP,
) -> List[SweepRow]:
    """One SweepRow per grid point, with computed and (k >= 4) closed-form bounds.

    Exactly one of ``c_grid`` and ``n_grid`` must be given. Empirical rows each
    draw from their own child stream of ``seed``.
    """
    mode = SumMode(mode)
    check_params(m, k, mode)
    if (c_grid is None) == (n_grid is None):
        raise ParameterError("give exactly one of c_grid and n_grid")
    grid = list(c_grid if c_grid is not None else n_grid)
    if not grid:
        raise ParameterError("sweep grid is empty")
    ns = [n_for_c(m, k, c) for c in grid] if c_grid is not None else [int(n) for n in grid]

    rows = []
    for i, n in enumerate(ns):
        params = ProblemParams(m=m, k=k, n=n, mode=mode, precision_bits=bits)
        row = dict(
            n=n,
            c=_approx_c(m, k, n),
            prob=prob_bounds(m, k, n, None, mode, bits),
            size=size_bounds(m, k, n, None, mode, bits),
        )
        if k >= 4:
            row.update(
                analytic_prob=analytic_prob_bounds(m, k, n, bits),
                analytic_size=analytic_size_bounds(m, k, n, bits),
            )
        if empirical:
            # one stream per row, keyed by (n, position)
            row["empirical"] = run_trials(params, trials, _derived_seed(seed, n, i), parallelism, cap)
        rows.append(SweepRow(**row))
        logger.info("sweep row n={} c={:.4g}", n, rows[-1].c)
    return rows


def complexity_at_target(
    m: int,
    k_grid: Sequence[int],
    target: float,
    side: Side = Side.SUFFICIENT,
    mode: SumMode = SumMode.INTEGER,
    bits: int = DEFAULT_PRECISION_BITS,
    n_max: int = DEFAULT_N_MAX,
) -> List[ComplexityRow]:
    """Provable complexity at a success target for each k.

    Sufficient: the smallest n whose probability lower bound reaches the
    target, reported with the size upper bound there. Necessary: the smallest
    n whose upper bound reaches it, reported with the size lower bound.
    Unreachable k are kept as rows with ``reachable=False``.
    """
    side = Side(side)
    criterion = Criterion.LOWER if side is Side.SUFFICIENT else Criterion.UPPER
    rows = []
    for k in k_grid:
        try:
            found = search_n(m, k, target, criterion, mode, bits, n_max)
        except UnreachableTargetError as exc:
            logger.warning("k={}: {}", k, exc)
            rows.append(ComplexityRow(
                k=k, side=side, reachable=False, best_n=exc.best_n, best_value=exc.best_value
            ))
            continue
        size = size_bounds(m, k, found.n, None, mode, bits)
        rows.append(ComplexityRow(
            k=k,
            side=side,
            reachable=True,
            n=found.n,
            c=found.c,
            size_bound=size.upper if side is Side.SUFFICIENT else size.lower,
        ))
    return rows
