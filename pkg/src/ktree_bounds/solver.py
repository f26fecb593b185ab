"""
Instrumented k-Tree algorithm over the integers and over centered Z_m.

Lists are merged pairwise up a binary tree. At level d only sums inside
<m * p^d> survive; a solution is a zero in the root list. Duplicates are kept,
so every surviving leaf tuple appears exactly once.
"""

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from .errors import ParameterError, ResourceCapError
from .models import RunTrace, SumMode
from .params import ProblemParams, level_range

__all__ = [
    "DEFAULT_MEMORY_CAP",
    "ElementRecord",
    "InputLists",
    "generate_lists",
    "merge",
    "centered",
    "level_thresholds",
    "reduction_levels",
    "run_ktree",
    "verify_solution",
]

DEFAULT_MEMORY_CAP = 1 << 31


class ElementRecord(NamedTuple):
    """A list entry: its value and the positions of the two entries it came from.

    At level 0 both positions are the element's own index.
    """
    value: int
    left: int
    right: int


@dataclass(frozen=True)
class InputLists:
    """k lists of n integers from <m>, plus the seed and trial they came from."""
    lists: Tuple[Tuple[int, ...], ...]
    seed: Optional[int] = None
    trial: int = 0

    @property
    def k(self) -> int:
        return len(self.lists)

    @property
    def n(self) -> int:
        return len(self.lists[0]) if self.lists else 0

    @classmethod
    def of(cls, lists: Sequence[Sequence[int]], seed: Optional[int] = None, trial: int = 0) -> "InputLists":
        return cls(tuple(tuple(int(v) for v in lst) for lst in lists), seed, trial)

    def check(self, params: ProblemParams) -> None:
        if self.k != params.k:
            raise ParameterError(f"expected {params.k} lists, got {self.k}")
        half = params.m // 2
        for i, lst in enumerate(self.lists):
            if len(lst) != params.n:
                raise ParameterError(f"list {i} has {len(lst)} elements, expected {params.n}")
            if lst and (min(lst) < -half or max(lst) > half):
                raise ParameterError(f"list {i} has values outside <m>")


def _stream(seed: int, trial: int) -> np.random.Generator:
    if seed < 0:
        raise ParameterError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(trial,))))


def _uniform_big(rng: np.random.Generator, half: int, count: int) -> List[int]:
    """Uniform draws from [-half, half] by rejection from 64-bit words."""
    span = 2 * half + 1
    bits = (span - 1).bit_length()
    words = (bits + 63) // 64
    mask = (1 << bits) - 1
    out: List[int] = []
    while len(out) < count:
        raw = rng.integers(0, 1 << 64, size=(count - len(out), words), dtype=np.uint64, endpoint=False)
        for row in raw.tolist():
            value = 0
            for word in row:
                value = (value << 64) | word
            value &= mask
            if value < span:
                out.append(value - half)
    return out


def generate_lists(params: ProblemParams, seed: int, trial: int = 0) -> InputLists:
    """Draw k x n integers i.i.d. uniform on <m>.

    The stream depends only on (seed, trial), so trial t can be regenerated
    anywhere without replaying trials 0..t-1.
    """
    rng = _stream(seed, trial)
    half = params.m // 2
    total = params.k * params.n
    if 2 * half < 2**63:
        values = rng.integers(-half, half, size=total, endpoint=True).tolist()
    else:
        values = _uniform_big(rng, half, total)
    n = params.n
    lists = tuple(tuple(values[i * n:(i + 1) * n]) for i in range(params.k))
    return InputLists(lists=lists, seed=seed, trial=trial)


def centered(x: int, m: int) -> int:
    """x reduced into [-(m-1)/2, (m-1)/2] for odd m."""
    half = (m - 1) // 2
    return (x + half) % m - half


def merge(
    la: Sequence[int],
    lb: Sequence[int],
    tau: int,
    modulus: Optional[int] = None,
    cap: Optional[int] = None,
    level: Optional[int] = None,
) -> List[ElementRecord]:
    """All pairs (a, b) with |a + b| <= tau, in canonical order.

    Args:
        la, lb: values of the two child lists
        tau: integer threshold, >= 0
        modulus: reduce each sum into <modulus> before filtering
        cap: raise ResourceCapError once the output exceeds this many records
        level: tree level, for error messages

    Returns:
        Records sorted by (value, left, right); left/right index la/lb.
    """
    if tau < 0:
        raise ParameterError(f"threshold must be >= 0, got {tau}")
    order = sorted(range(len(lb)), key=lb.__getitem__)
    keys = [lb[j] for j in order]

    if modulus is None:
        shifts = (0,)
    elif 2 * tau + 1 >= modulus:
        shifts = None
    else:
        shifts = (0, modulus, -modulus)

    out: List[ElementRecord] = []
    for i, a in enumerate(la):
        if shifts is None:
            out.extend(ElementRecord(centered(a + b, modulus), i, j) for j, b in enumerate(lb))
        else:
            for shift in shifts:
                lo = bisect_left(keys, shift - tau - a)
                hi = bisect_right(keys, shift + tau - a)
                out.extend(
                    ElementRecord(a + keys[x] - shift, i, order[x]) for x in range(lo, hi)
                )
        if cap is not None and len(out) > cap:
            raise ResourceCapError(
                f"merge output at level {level} exceeds the memory cap of {cap}", level=level
            )
    out.sort()
    return out


def level_thresholds(params: ProblemParams) -> List[int]:
    """tau_d = floor(m p^d / 2) for d = 0..log k."""
    p = params.p
    return [level_range(params.m, p, d).floor_half() for d in range(params.log_k + 1)]


def reduction_levels(params: ProblemParams) -> Tuple[int, ...]:
    """Levels whose sums are reduced mod m.

    Only level 1 in zm mode; every level if p >= 1/2, where later ranges can
    still wrap around.
    """
    if params.mode is not SumMode.CENTERED_MOD:
        return ()
    if params.p >= 0.5:
        return tuple(range(1, params.log_k + 1))
    return (1,)


def _leaf_indices(levels: List[List[List[ElementRecord]]], level: int, index: int, pos: int) -> List[int]:
    if level == 0:
        return [pos + 1]
    rec = levels[level][index][pos]
    return (
        _leaf_indices(levels, level - 1, 2 * index, rec.left)
        + _leaf_indices(levels, level - 1, 2 * index + 1, rec.right)
    )


def run_ktree(params: ProblemParams, lists: InputLists, cap: Optional[int] = DEFAULT_MEMORY_CAP) -> RunTrace:
    """Run the k-Tree algorithm on ``lists`` and record every list size.

    On success the 1-based leaf indices of the first zero of the root list are
    recovered. An empty list at some level ends the run; later levels are
    recorded with size 0.
    """
    lists.check(params)
    taus = level_thresholds(params)
    reduce_at = reduction_levels(params)
    if len(reduce_at) > 1:
        logger.warning("p >= 1/2 for m={}, k={}: reducing mod m at every level", params.m, params.k)

    budget = None if cap is None else cap - params.k * params.n
    if budget is not None and budget < 0:
        raise ResourceCapError(f"input lists exceed the memory cap of {cap}", level=0)

    leaf = [[ElementRecord(v, j, j) for j, v in enumerate(lst)] for lst in lists.lists]
    levels: List[List[List[ElementRecord]]] = [leaf]
    sizes = [[params.n] * params.k]
    for d in range(1, params.log_k + 1):
        below = levels[-1]
        if any(not lst for lst in below):
            sizes.append([0] * (params.k >> d))
            continue
        modulus = params.m if d in reduce_at else None
        current = []
        for i in range(0, len(below), 2):
            merged = merge(
                [r.value for r in below[i]],
                [r.value for r in below[i + 1]],
                taus[d],
                modulus,
                budget,
                d,
            )
            if budget is not None:
                budget -= len(merged)
            current.append(merged)
        levels.append(current)
        sizes.append([len(lst) for lst in current])
        logger.debug("level {}: sizes {}", d, sizes[-1])

    root = levels[-1][0] if len(levels) == params.log_k + 1 else []
    first = bisect_left(root, (0,))
    zero_count = bisect_left(root, (1,)) - first
    indices = _leaf_indices(levels, params.log_k, 0, first) if zero_count else None

    per_level = [sum(s) for s in sizes]
    return RunTrace(
        level_list_sizes=sizes,
        total_size=sum(per_level),
        max_level_size=max(per_level),
        success=zero_count > 0,
        solution_indices=indices,
        zero_count=zero_count,
        reduced_every_level=len(reduce_at) > 1,
    )


def verify_solution(lists: InputLists, indices: Sequence[int], params: ProblemParams) -> bool:
    """Check that the leaves at ``indices`` pass every filter and sum to 0."""
    if len(indices) != params.k or len(lists.lists) != params.k:
        return False
    if any(not 1 <= ix <= len(lists.lists[i]) for i, ix in enumerate(indices)):
        return False
    taus = level_thresholds(params)
    reduce_at = reduction_levels(params)

    values = [lists.lists[i][ix - 1] for i, ix in enumerate(indices)]
    for d in range(1, params.log_k + 1):
        values = [values[i] + values[i + 1] for i in range(0, len(values), 2)]
        if d in reduce_at:
            values = [centered(v, params.m) for v in values]
        if any(abs(v) > taus[d] for v in values):
            return False
    return values == [0]
