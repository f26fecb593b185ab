"""
Tests for ktree_bounds.harness.
"""

import math
from fractions import Fraction

import pytest

from ktree_bounds.bounds import first_moment_bounds, prob_bounds, second_moment_ub
from ktree_bounds.errors import ParameterError, UnreachableTargetError
from ktree_bounds.harness import (
    ci_radius99,
    complexity_at_target,
    n_for_c,
    run_trials,
    search_n,
    sweep,
)
from ktree_bounds.models import Criterion, Side
from ktree_bounds.params import ProblemParams
from ktree_bounds.solver import InputLists


def _zero_lists(params, trial):
    return InputLists.of([[0] * params.n] * params.k)


class TestConfidenceRadius:
    """Test the Hoeffding radius."""

    def test_values(self):
        """Test T = 10 and T = 1000."""
        assert ci_radius99(10) == math.sqrt(math.log(200) / 20)
        assert math.isclose(ci_radius99(10), 0.5147, abs_tol=1e-4)
        assert math.isclose(ci_radius99(1000), 0.05147, abs_tol=1e-5)
        assert ci_radius99(1000) == math.sqrt(math.log(200) / 2000)

    def test_invalid(self):
        """Test that T = 0 is rejected."""
        with pytest.raises(ParameterError):
            ci_radius99(0)


class TestRunTrials:
    """Test Monte-Carlo aggregation."""

    def test_injected_success(self):
        """Test all-zero lists: every trial succeeds."""
        params = ProblemParams(m=2**32, k=4, n=1)
        summary = run_trials(params, 10, seed=0, list_factory=_zero_lists)
        assert summary.success_rate == 1.0
        assert summary.successes == 10
        assert math.isclose(summary.ci_radius99, 0.5147, abs_tol=1e-4)
        assert summary.std_total_size == 0.0
        assert summary.mean_zero_count == 1.0

    def test_aggregates_match_means(self):
        """Test that the means are recomputed from the stored sums."""
        params = ProblemParams(m=2**16, k=4, n=40)
        summary = run_trials(params, 50, seed=3)
        agg = summary.aggregates
        assert summary.trials == agg.trials == 50
        assert summary.mean_total_size == agg.total_size / 50
        assert summary.mean_zero_count_squared == agg.zero_count_sq / 50
        assert summary.successes <= summary.trials

    def test_parallel_identical(self):
        """Test that worker count does not change the summary."""
        params = ProblemParams(m=2**16, k=4, n=40)
        serial = run_trials(params, 40, seed=9, parallelism=1)
        pooled = run_trials(params, 40, seed=9, parallelism=3)
        assert serial.model_dump_json() == pooled.model_dump_json()

    def test_invalid(self):
        """Test argument checks."""
        params = ProblemParams(m=101, k=4, n=1)
        with pytest.raises(ParameterError):
            run_trials(params, 0, seed=0)
        with pytest.raises(ParameterError):
            run_trials(params, 1, seed=0, parallelism=0)

    @pytest.mark.slow
    def test_rate_within_bounds(self):
        """Test empirical rates against probability bounds, m = 2^32."""
        m = 2**32
        for k in (4, 8):
            for c in (0.6, 1.0, 1.4):
                n = n_for_c(m, k, c)
                params = ProblemParams(m=m, k=k, n=n)
                summary = run_trials(params, 1000, seed=2024)
                pair = prob_bounds(m, k, n)
                eps = summary.ci_radius99
                assert float(pair.lower.value) - eps <= summary.success_rate
                assert summary.success_rate <= float(pair.upper.value) + eps
                second = second_moment_ub(m, k, n)
                assert summary.mean_zero_count_squared <= 1.25 * float(second.value)
                first = first_moment_bounds(m, k, n)
                spread = max(summary.mean_zero_count_squared - summary.mean_zero_count**2, 0.0)
                tol = 4 * math.sqrt(spread / summary.trials) + eps
                assert float(first.lower.value) - tol <= summary.mean_zero_count
                assert summary.mean_zero_count <= float(first.upper.value) + tol


class TestSearchN:
    """Test the list-size search."""

    def test_upper_criterion_self_consistent(self):
        """Test UB(n - 1) < target <= UB(n) for m = 2^64, k = 4."""
        result = search_n(2**64, 4, 0.99, Criterion.UPPER)
        goal = Fraction("0.99")
        assert prob_bounds(2**64, 4, result.n).upper.value >= goal
        assert prob_bounds(2**64, 4, result.n - 1).upper.value < goal
        assert result.previous_value is not None

    def test_lower_criterion_near_one_over_p(self):
        """Test that LB = 1/2 at m = 2^96, k = 4 needs c slightly above 1."""
        result = search_n(2**96, 4, 0.5, Criterion.LOWER)
        assert 1 <= result.c <= 1.5

    def test_unreachable(self):
        """Test that a lower bound plateauing below the target is reported."""
        with pytest.raises(UnreachableTargetError) as exc:
            search_n(2**24, 64, 0.999999, Criterion.LOWER, n_max=2**30)
        assert exc.value.best_n >= 1
        assert exc.value.to_dict()["error_code"] == "UNREACHABLE_TARGET"

    def test_small_target_gives_one(self):
        """Test that a target met at n = 1 returns n = 1."""
        result = search_n(11, 2, 0.05, Criterion.UPPER)
        assert result.n == 1
        assert result.previous_value is None

    def test_empirical(self):
        """Test an empirical search carries its confidence radius."""
        result = search_n(2**12, 4, 0.5, Criterion.EMPIRICAL, trials=40, seed=1)
        assert result.ci_radius99 == ci_radius99(40)
        assert result.n >= 1

    def test_invalid_target(self):
        """Test targets outside (0, 1)."""
        for target in (0, 1, 1.5):
            with pytest.raises(ParameterError):
                search_n(2**32, 4, target, Criterion.LOWER)


class TestSweep:
    """Test sweeps over list sizes."""

    def test_c_one(self):
        """Test that c = 1 gives n = round(m^(1/3)) for k = 4."""
        rows = sweep(2**64, 4, c_grid=[1.0])
        assert len(rows) == 1
        assert rows[0].n == 2642246
        assert math.isclose(rows[0].c, 1.0, rel_tol=1e-6)
        assert rows[0].analytic_prob is not None

    def test_n_grid_monotone_c(self):
        """Test that increasing n gives increasing c."""
        rows = sweep(2**32, 4, n_grid=[100, 500, 1000, 2000])
        cs = [row.c for row in rows]
        assert cs == sorted(cs)
        assert len(set(cs)) == len(cs)

    def test_with_empirical(self):
        """Test that empirical summaries are attached on request."""
        rows = sweep(2**16, 4, c_grid=[1.0], empirical=True, trials=20, seed=4)
        assert rows[0].empirical is not None
        assert rows[0].empirical.trials == 20

    def test_rows_get_own_streams(self):
        """Test that repeated grid points draw from different seeded streams."""
        rows = sweep(2**16, 4, n_grid=[40, 40], empirical=True, trials=20, seed=4)
        assert rows[0].empirical.seed != rows[1].empirical.seed
        again = sweep(2**16, 4, n_grid=[40, 40], empirical=True, trials=20, seed=4)
        assert [row.model_dump_json() for row in rows] == [row.model_dump_json() for row in again]

    def test_grid_arguments(self):
        """Test that exactly one non-empty grid is needed."""
        with pytest.raises(ParameterError):
            sweep(2**32, 4)
        with pytest.raises(ParameterError):
            sweep(2**32, 4, c_grid=[1.0], n_grid=[10])
        with pytest.raises(ParameterError):
            sweep(2**32, 4, c_grid=[])

    @pytest.mark.slow
    def test_empirical_acceptance(self):
        """Test empirical rates within bounds along a c grid, m = 2^32, k = 8."""
        rows = sweep(2**32, 8, c_grid=[0.5, 0.8, 1.0, 1.5, 2.0], empirical=True, trials=1000, seed=5)
        for row in rows:
            emp = row.empirical
            eps = emp.ci_radius99
            assert float(row.prob.lower.value) - eps <= emp.success_rate
            assert emp.success_rate <= float(row.prob.upper.value) + eps


class TestNForC:
    """Test c to n conversion."""

    def test_rounding(self):
        """Test exact rounding of c / p."""
        assert n_for_c(2**96, 4, 1) == 2**32
        assert n_for_c(2**64, 4, 1) == 2642246
        assert n_for_c(2**64, 8, 0.5) == 2**15
        assert n_for_c(101, 4, 1e-9) == 1

    def test_non_positive(self):
        """Test that c <= 0 is rejected."""
        with pytest.raises(ParameterError):
            n_for_c(101, 4, 0)
        with pytest.raises(ParameterError):
            n_for_c(101, 4, -1.0)
        with pytest.raises(ParameterError):
            n_for_c(101, 4, 0.0)

    def test_input_types(self):
        """Test that float, Fraction and string c agree."""
        assert n_for_c(2**64, 4, 1.0) == 2642246
        assert n_for_c(2**64, 4, Fraction(1)) == 2642246
        assert n_for_c(2**64, 4, "1") == 2642246
        assert n_for_c(2**64, 4, 0.5) == n_for_c(2**64, 4, Fraction(1, 2))


class TestComplexity:
    """Test complexity at a target."""

    def test_sufficient_rows(self):
        """Test that reachable rows carry n, c and a size bound."""
        rows = complexity_at_target(2**64, [4, 8], 0.01, Side.SUFFICIENT)
        assert [row.k for row in rows] == [4, 8]
        for row in rows:
            assert row.reachable
            assert row.n >= 1
            assert row.size_bound is not None

    def test_necessary_not_above_sufficient(self):
        """Test that the necessary size never exceeds the sufficient size."""
        sufficient = complexity_at_target(2**64, [8], 0.01, Side.SUFFICIENT)[0]
        necessary = complexity_at_target(2**64, [8], 0.01, Side.NECESSARY)[0]
        assert necessary.n <= sufficient.n
        assert necessary.size_bound.value <= sufficient.size_bound.value

    def test_unreachable_marked(self):
        """Test that an unreachable k is kept and marked."""
        rows = complexity_at_target(2**24, [64], 0.999999, n_max=2**30)
        assert not rows[0].reachable
        assert rows[0].best_n is not None
        assert rows[0].size_bound is None

    @pytest.mark.slow
    def test_curve_unimodal(self):
        """Test that sufficient complexity over k = 4..1024 falls then rises."""
        ks = [4, 8, 16, 32, 64, 128, 256, 512, 1024]
        rows = complexity_at_target(2**64, ks, 0.01, Side.SUFFICIENT)
        sizes = [row.size_bound.value for row in rows if row.reachable]
        best = sizes.index(min(sizes))
        assert all(a >= b for a, b in zip(sizes[:best], sizes[1:best + 1]))
        assert all(a <= b for a, b in zip(sizes[best:], sizes[best + 1:]))
        assert 0 < best < len(sizes) - 1
