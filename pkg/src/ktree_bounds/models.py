"""
Data models for ktree-bounds results.
"""

from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    FieldSerializationInfo,
    field_serializer,
    field_validator,
    model_validator,
)
from pydantic.alias_generators import to_camel

from .numeric import PrecReal, Rounding

__all__ = [
    "SumMode",
    "Criterion",
    "Side",
    "HypothesisFlags",
    "BoundPair",
    "MomentEstimate",
    "BoundsReport",
    "RunTrace",
    "TrialAggregates",
    "TrialSummary",
    "SweepRow",
    "SearchResult",
    "ComplexityRow",
    "OutputRecord",
    "SCHEMA_VERSION",
]

SCHEMA_VERSION = "1.0"


class SumMode(str, Enum):
    """How two list elements are added."""
    INTEGER = "int"      # plain integer sum
    CENTERED_MOD = "zm"  # sum reduced into <m>, m odd


class Criterion(str, Enum):
    """What a list-size search compares against the target."""
    LOWER = "lb"
    UPPER = "ub"
    EMPIRICAL = "empirical"


class Side(str, Enum):
    """Which complexity a target search reports."""
    SUFFICIENT = "sufficient"
    NECESSARY = "necessary"


def _render_real(value: Optional[PrecReal], info: FieldSerializationInfo):
    if value is None:
        return None
    digits = (info.context or {}).get("digits", 30)
    return {
        "decimal": value.to_decimal(digits),
        "rounding": value.rounding.value,
        "log2": value.log2_decimal(),
    }


class _Record(BaseModel):
    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True)


class HypothesisFlags(_Record):
    """Which closed-form hypotheses provably hold for (m, k, p)."""
    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True, frozen=True)

    k_ge_4: bool = Field(description="k >= 4")
    m_gt_30_pow: bool = Field(description="m > 30^(log k + 1)")
    p_lt_1_over_30: bool = Field(alias="pLt1over30", description="p < 1/30")
    mp_logk_gt_30: bool = Field(alias="mpLogKGt30", description="m * p^(log k) > 30")
    m_gt_7k: bool = Field(description="m > 7k")
    pk_cond: bool = Field(description="p * k > (7/m)^(k/2 - 1)")
    below_theorem_scope: bool = Field(
        default=False,
        description="k < 4, outside the closed-form theorem's scope",
    )

    @property
    def all_hold(self) -> bool:
        return all((
            self.k_ge_4,
            self.m_gt_30_pow,
            self.p_lt_1_over_30,
            self.mp_logk_gt_30,
            self.m_gt_7k,
            self.pk_cond,
        ))


class BoundPair(BaseModel):
    """A lower bound rounded down and an upper bound rounded up."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    lower: PrecReal = Field(description="Lower bound, reported rounded down")
    upper: PrecReal = Field(description="Upper bound, reported rounded up")
    flags: Optional[HypothesisFlags] = Field(
        default=None, description="Hypotheses in force for these parameters"
    )

    @field_validator("lower")
    @classmethod
    def _round_lower(cls, v: PrecReal) -> PrecReal:
        return v.rounded(Rounding.DOWN)

    @field_validator("upper")
    @classmethod
    def _round_upper(cls, v: PrecReal) -> PrecReal:
        return v.rounded(Rounding.UP)

    @model_validator(mode="after")
    def _ordered(self) -> "BoundPair":
        if self.lower.value > self.upper.value:
            raise ValueError("lower bound exceeds upper bound")
        return self

    @field_serializer("lower", "upper")
    def _serialize_real(self, value: PrecReal, info: FieldSerializationInfo):
        return _render_real(value, info)

    def contains(self, x) -> bool:
        """True if the exact rational ``x`` lies inside the reported bounds."""
        return self.lower.value <= x <= self.upper.value


class MomentEstimate(BaseModel):
    """Bracket on E[C] and an upper bound on E[C^2]."""
    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True, arbitrary_types_allowed=True, frozen=True)

    first_moment: BoundPair
    second_moment_ub: PrecReal

    @field_validator("second_moment_ub")
    @classmethod
    def _round_up(cls, v: PrecReal) -> PrecReal:
        return v.rounded(Rounding.UP)

    @model_validator(mode="after")
    def _dominates(self) -> "MomentEstimate":
        if self.second_moment_ub.value < self.first_moment.lower.value ** 2:
            raise ValueError("second moment bound is below the squared first moment")
        return self

    @field_serializer("second_moment_ub")
    def _serialize_real(self, value: PrecReal, info: FieldSerializationInfo):
        return _render_real(value, info)


class BoundsReport(BaseModel):
    """Everything the bound pipeline computes for one instance."""
    model_config = ConfigDict(
        alias_generator=to_camel, populate_by_name=True, arbitrary_types_allowed=True, frozen=True
    )

    prob: BoundPair
    size: BoundPair
    levels: List[BoundPair] = Field(description="Per-level expected size bounds")
    max_level: BoundPair
    moments: MomentEstimate
    analytic_prob: Optional[BoundPair] = None
    analytic_size: Optional[BoundPair] = None
    asymptotic: Optional[PrecReal] = Field(
        default=None, description="c^k / (1 + c^k), an estimate rather than a bound"
    )
    flags: HypothesisFlags

    @field_serializer("asymptotic")
    def _serialize_real(self, value: Optional[PrecReal], info: FieldSerializationInfo):
        return _render_real(value, info)


class RunTrace(_Record):
    """One execution of the k-Tree algorithm."""
    level_list_sizes: List[List[int]] = Field(description="|L^d_i| for each level d")
    total_size: int
    max_level_size: int
    success: bool
    solution_indices: Optional[List[int]] = Field(
        default=None, description="1-based leaf indices of the recovered solution"
    )
    zero_count: int = Field(ge=0, description="Occurrences of 0 in the root list")
    reduced_every_level: bool = Field(
        default=False, description="Centered reduction applied beyond level 1"
    )

    @model_validator(mode="after")
    def _consistent(self) -> "RunTrace":
        per_level = [sum(sizes) for sizes in self.level_list_sizes]
        if self.total_size != sum(per_level):
            raise ValueError("total_size does not match level sizes")
        if self.max_level_size != max(per_level, default=0):
            raise ValueError("max_level_size does not match level sizes")
        if self.success != (self.zero_count >= 1):
            raise ValueError("success must equal zero_count >= 1")
        if self.success != (self.solution_indices is not None):
            raise ValueError("solution indices present iff success")
        return self


class TrialAggregates(_Record):
    """Exact integer sums over a batch of trials; merging is order-independent."""
    trials: int = 0
    successes: int = 0
    total_size: int = 0
    total_size_sq: int = 0
    max_level_size: int = 0
    max_level_size_sq: int = 0
    zero_count: int = 0
    zero_count_sq: int = 0

    def add(self, trace: RunTrace) -> "TrialAggregates":
        return TrialAggregates(
            trials=self.trials + 1,
            successes=self.successes + int(trace.success),
            total_size=self.total_size + trace.total_size,
            total_size_sq=self.total_size_sq + trace.total_size**2,
            max_level_size=self.max_level_size + trace.max_level_size,
            max_level_size_sq=self.max_level_size_sq + trace.max_level_size**2,
            zero_count=self.zero_count + trace.zero_count,
            zero_count_sq=self.zero_count_sq + trace.zero_count**2,
        )

    def merge(self, other: "TrialAggregates") -> "TrialAggregates":
        return TrialAggregates(**{
            name: getattr(self, name) + getattr(other, name)
            for name in type(self).model_fields
        })


class TrialSummary(_Record):
    """Monte-Carlo statistics for one parameter set."""
    m: str = Field(description="Modulus, decimal")
    k: int
    n: int
    mode: SumMode
    seed: int
    trials: int = Field(ge=1)
    successes: int = Field(ge=0)
    success_rate: float
    ci_radius99: float = Field(description="Two-sided 99% Hoeffding radius")
    mean_total_size: float
    std_total_size: float
    mean_max_level_size: float
    std_max_level_size: float
    mean_zero_count: float
    mean_zero_count_squared: float
    aggregates: TrialAggregates

    @model_validator(mode="after")
    def _counts(self) -> "TrialSummary":
        if self.successes > self.trials:
            raise ValueError("more successes than trials")
        return self


class SweepRow(_Record):
    """Bounds, and optionally Monte-Carlo results, at one list size."""
    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True, arbitrary_types_allowed=True)

    n: int
    c: float = Field(description="n * p")
    prob: BoundPair
    size: BoundPair
    analytic_prob: Optional[BoundPair] = None
    analytic_size: Optional[BoundPair] = None
    empirical: Optional[TrialSummary] = None


class SearchResult(_Record):
    """Smallest list size meeting a target under some criterion."""
    n: int
    c: float
    criterion: Criterion
    target: float
    value: str = Field(description="Criterion value at n, decimal")
    previous_value: Optional[str] = Field(
        default=None, description="Criterion value at n - 1, when n > 1"
    )
    probes: int
    ci_radius99: Optional[float] = None


class ComplexityRow(_Record):
    """Sufficient or necessary complexity for one k."""
    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True, arbitrary_types_allowed=True)

    k: int
    side: Side
    reachable: bool
    n: Optional[int] = None
    c: Optional[float] = None
    size_bound: Optional[PrecReal] = None
    best_n: Optional[int] = None
    best_value: Optional[str] = None

    @field_serializer("size_bound")
    def _serialize_real(self, value: Optional[PrecReal], info: FieldSerializationInfo):
        return _render_real(value, info)


class OutputRecord(_Record):
    """Envelope for every command's machine-readable output."""
    schema_version: str = Field(default=SCHEMA_VERSION)
    command: str
    params: Dict[str, Any]
    results: Dict[str, Any]
    flags: Optional[Dict[str, bool]] = None
    timing: Optional[Dict[str, float]] = None
