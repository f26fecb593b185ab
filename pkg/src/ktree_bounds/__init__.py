"""
ktree-bounds - provable bounds and experiments for Wagner's k-Tree algorithm

Computes directed-rounded lower and upper bounds on the success probability
and expected list sizes of the k-Tree algorithm for average-case k-SUM over
the integers and over centered Z_m, and checks them against exact oracles and
Monte-Carlo runs.
"""

from loguru import logger

__version__ = "0.2.0"

from .bounds import (
    analytic_prob_bounds,
    analytic_size_bounds,
    asymptotic_success,
    compute_bounds,
    first_moment_bounds,
    level_size_bounds,
    prob_bounds,
    second_moment_ub,
    size_bounds,
    zm_bounds,
)
from .config import KTreeSettings, load_settings, save_settings
from .errors import (
    DomainError,
    KTreeError,
    ParameterError,
    PrecisionError,
    ResourceCapError,
    UnreachableTargetError,
)
from .harness import complexity_at_target, run_trials, search_n, sweep
from .models import BoundPair, Criterion, RunTrace, Side, SumMode, TrialSummary
from .numeric import PowerReal, PrecReal, Rounding
from .params import ProblemParams, filter_param, hypothesis_check, parse_modulus
from .solver import generate_lists, merge, run_ktree, verify_solution

logger.disable("ktree_bounds")

__all__ = [
    "__version__",
    "ProblemParams",
    "SumMode",
    "Criterion",
    "Side",
    "BoundPair",
    "RunTrace",
    "TrialSummary",
    "PrecReal",
    "PowerReal",
    "Rounding",
    "KTreeSettings",
    "load_settings",
    "save_settings",
    "parse_modulus",
    "filter_param",
    "hypothesis_check",
    "first_moment_bounds",
    "second_moment_ub",
    "prob_bounds",
    "level_size_bounds",
    "size_bounds",
    "analytic_prob_bounds",
    "analytic_size_bounds",
    "asymptotic_success",
    "compute_bounds",
    "zm_bounds",
    "generate_lists",
    "merge",
    "run_ktree",
    "verify_solution",
    "run_trials",
    "search_n",
    "sweep",
    "complexity_at_target",
    "KTreeError",
    "ParameterError",
    "DomainError",
    "PrecisionError",
    "UnreachableTargetError",
    "ResourceCapError",
]
