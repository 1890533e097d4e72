"""
Tests for the closed-form moment, GBO-norm and tail bounds
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subweibull.bounds import (
    DualFunctions,
    K_domain_threshold,
    K_of_t,
    Regime,
    dual_moment_rate,
    gbo_bound_params,
    lp_interpolation_bracket,
    moment_rate,
    moment_rate_psi,
    moment_to_gbo,
    rate_sum_form,
    tail_closed_form,
    tail_exponent,
    tail_lower_K,
    tail_upper_K,
)
from subweibull.errors import DomainError
from subweibull.model import WeightedSumProblem, canonicalize


def make(alpha, weights, scales):
    return canonicalize(WeightedSumProblem.create(alpha, weights, scales))


class TestMomentRate:
    """Test cases for moment_rate and its variants"""

    def test_balanced_problem(self):
        """Test max{2*2, 4*1} = 4 with both branches equal"""
        result = moment_rate(make(1.0, [1, 1, 1, 1], [1, 1, 1, 1]), 4)
        assert result.value == pytest.approx(4.0)
        assert result.regime == Regime.MIXED
        assert result.constant_c == 1.0

    def test_singleton_with_zero_entry(self):
        result = moment_rate(make(1.0, [1, 0], [1, 0]), 1)
        assert result.value == pytest.approx(1.0)

    def test_subweibull_branch(self):
        """Test alpha=0.5, a=(1), L=(2), p=4: max{2*2, 16*2} = 32"""
        result = moment_rate(make(0.5, [1], [2]), 4)
        assert result.value == pytest.approx(32.0)
        assert result.regime == Regime.SUBWEIBULL

    def test_constant_scales_value(self):
        problem = make(1.0, [1, 1, 1, 1], [1, 1, 1, 1])
        assert moment_rate(problem, 4, constant_c=3.0).value == pytest.approx(12.0)

    def test_non_canonical_input_is_reordered(self):
        a = moment_rate(WeightedSumProblem.create(1.0, [1, 3, 2], [1, 1, 1]), 2)
        b = moment_rate(make(1.0, [3, 2, 1], [1, 1, 1]), 2)
        assert a.value == b.value

    @pytest.mark.parametrize("p", [0.5, math.inf, math.nan])
    def test_rejects_bad_p(self, p):
        with pytest.raises(DomainError):
            moment_rate(make(1.0, [1], [1]), p)

    def test_rejects_bad_constant(self):
        with pytest.raises(DomainError):
            moment_rate(make(1.0, [1], [1]), 2, constant_c=0.0)

    def test_psi_examples(self):
        assert moment_rate_psi([1, 1], 1.0, 2).value == pytest.approx(2.0)
        result = moment_rate_psi([1, 0, 0, 0], 2.0, 4)
        assert result.value == pytest.approx(2.0)
        assert result.regime == Regime.MIXED

    @given(st.lists(st.floats(min_value=0.0, max_value=100.0), min_size=1, max_size=10).filter(lambda v: max(v) > 0))
    @settings(max_examples=50, deadline=None)
    def test_psi_at_p_one_is_l2_norm(self, a):
        """Test that for p=1 and alpha<=1 the Gaussian branch dominates"""
        expected = math.sqrt(sum(x * x for x in a))
        assert moment_rate_psi(a, 0.7, 1).value == pytest.approx(expected, rel=1e-12)

    @given(
        st.floats(min_value=0.2, max_value=1.0),
        st.lists(st.tuples(st.floats(min_value=0.0, max_value=10.0), st.floats(min_value=0.0, max_value=10.0)),
                 min_size=1, max_size=8),
        st.floats(min_value=1.0, max_value=50.0),
    )
    @settings(max_examples=100, deadline=None)
    def test_max_and_sum_forms_agree_within_two(self, alpha, pairs, p):
        problem = make(alpha, [a for a, _ in pairs], [l for _, l in pairs])
        rate_max = moment_rate(problem, p).value
        rate_sum = rate_sum_form(problem, p)
        assert rate_max <= rate_sum * (1 + 1e-12)
        assert rate_sum <= 2 * rate_max * (1 + 1e-12)

    @given(
        st.floats(min_value=0.2, max_value=3.0),
        st.lists(st.tuples(st.floats(min_value=0.0, max_value=10.0), st.floats(min_value=0.0, max_value=10.0)),
                 min_size=1, max_size=8),
        st.floats(min_value=1.0, max_value=50.0),
        st.floats(min_value=0.0, max_value=20.0),
    )
    @settings(max_examples=100, deadline=None)
    def test_nondecreasing_in_p(self, alpha, pairs, p, step):
        problem = make(alpha, [a for a, _ in pairs], [l for _, l in pairs])
        assert moment_rate(problem, p).value <= moment_rate(problem, p + step).value * (1 + 1e-12)

    @given(
        st.floats(min_value=0.2, max_value=3.0),
        st.lists(st.tuples(st.floats(min_value=0.01, max_value=10.0), st.floats(min_value=0.0, max_value=10.0)),
                 min_size=1, max_size=8),
        st.floats(min_value=1.0, max_value=50.0),
        st.floats(min_value=1e-3, max_value=1e3),
    )
    @settings(max_examples=100, deadline=None)
    def test_homogeneous_in_weights(self, alpha, pairs, p, c):
        """Test that scaling every a_i by c scales the rate by c"""
        problem = make(alpha, [a for a, _ in pairs], [l for _, l in pairs])
        expected = c * moment_rate(problem, p).value
        assert moment_rate(problem.scaled(c), p).value == pytest.approx(expected, rel=1e-9)


class TestGBOBoundParams:
    """Test cases for the GBO-norm bound parameters"""

    def test_unit_problem(self):
        params = gbo_bound_params(make(1.0, [1], [1]))
        assert params.l_star == pytest.approx(1.0)
        assert params.nu_star == pytest.approx(1.0)

    def test_large_scales(self):
        params = gbo_bound_params(make(1.0, [1, 1], [2, 2]))
        assert params.l_star == pytest.approx(1 / math.sqrt(2))
        assert params.nu_star == pytest.approx(2 * math.sqrt(2))

    def test_zero_scales(self):
        params = gbo_bound_params(make(2.0, [1, 1], [0, 0]))
        assert params.l_star == 0.0
        assert params.nu_star == pytest.approx(math.sqrt(2))

    def test_all_zero_weights(self):
        with pytest.raises(DomainError):
            gbo_bound_params(make(1.0, [0, 0], [1, 1]))

    def test_moment_growth_to_gbo(self):
        params = moment_to_gbo(1.0, 0.0, 1.0)
        assert params.l_star == 0.0
        assert params.nu_star == pytest.approx(2 * math.e)
        assert moment_to_gbo(1.0, 2.0, 2.0).l_star == pytest.approx(2.0)


class TestKOfT:
    """Test cases for the inverse rate K(t) and the K-based tails"""

    def test_threshold(self):
        assert K_of_t(make(1.0, [1], [1]), 2.0) == pytest.approx(1.0, rel=1e-9)

    def test_quadratic_in_root_p(self):
        """Test sqrt(p) + p = 6 at p = 4"""
        k = K_of_t(make(1.0, [1], [1]), 6.0)
        assert k == pytest.approx(4.0, rel=1e-8)
        assert rate_sum_form(make(1.0, [1], [1]), k) <= 6.0

    def test_alpha_two(self):
        """Test g(p) = 2 sqrt(p) for alpha=2, a=(1), L=(1)"""
        assert K_of_t(make(2.0, [1], [1]), 2 * math.sqrt(2)) == pytest.approx(2.0, rel=1e-8)

    def test_below_threshold(self):
        problem = make(1.0, [1], [1])
        assert K_domain_threshold(problem) == pytest.approx(2.0)
        with pytest.raises(DomainError) as info:
            K_of_t(problem, 1.9)
        assert info.value.diagnostics["threshold"] == pytest.approx(2.0)

    def test_tail_upper(self):
        problem = make(1.0, [1], [1])
        assert tail_upper_K(problem, 2.0).value == pytest.approx(math.exp(-1))
        assert tail_upper_K(problem, 6.0).value == pytest.approx(math.exp(-4))
        assert tail_upper_K(problem, 6.0, constant_c=2.0).value == pytest.approx(math.exp(-2))

    def test_tail_lower(self):
        problem = make(1.0, [1], [1])
        assert tail_lower_K(problem, 6.0, constant_c=2.0).value == pytest.approx(math.exp(-8))

    @given(st.floats(min_value=2.0, max_value=1e4), st.floats(min_value=1.0, max_value=10.0))
    @settings(max_examples=30, deadline=None)
    def test_monotone_in_t(self, t, step):
        problem = make(0.5, [1, 0.5], [1, 2])
        t0 = max(t, K_domain_threshold(problem))
        assert K_of_t(problem, t0) <= K_of_t(problem, t0 * (1 + step)) * (1 + 1e-9)

    @given(st.floats(min_value=1.0, max_value=1e6))
    @settings(max_examples=50, deadline=None)
    def test_inverts_rate_sum_form(self, factor):
        """Test g(K(t)) <= t < g(K(t)(1 + 1e-6)) from the threshold upwards"""
        for problem in (make(0.5, [1, 0.5], [1, 2]), make(1.5, [1, 1, 1], [0, 2, 0.5])):
            t = K_domain_threshold(problem) * factor
            k = K_of_t(problem, t)
            assert rate_sum_form(problem, k) <= t
            assert rate_sum_form(problem, k * (1 + 1e-6)) > t


class TestClosedFormTail:
    """Test cases for tail_closed_form"""

    def test_zero_t_is_trivial(self):
        result = tail_closed_form(make(1.0, [1], [1]), 0.0)
        assert result.value == 2.0
        assert result.exceeds_one

    def test_upper_and_lower(self):
        problem = make(1.0, [1], [1])
        upper = tail_closed_form(problem, 2.0)
        lower = tail_closed_form(problem, 2.0, side="lower")
        assert upper.value == pytest.approx(2 * math.exp(-2))
        assert lower.value == pytest.approx(math.exp(-2))
        assert upper.regime == Regime.SUBWEIBULL
        assert not upper.exceeds_one

    def test_lower_needs_alpha_at_most_one(self):
        with pytest.raises(DomainError):
            tail_closed_form(make(1.5, [1], [1]), 2.0, side="lower")

    def test_unknown_side(self):
        with pytest.raises(DomainError):
            tail_closed_form(make(1.0, [1], [1]), 2.0, side="middle")

    def test_zero_scale_branch_is_infinite(self):
        gauss, weib = tail_exponent(make(1.0, [1], [0]), 2.0)
        assert gauss == pytest.approx(4.0)
        assert weib == math.inf

    def test_huge_t_saturates(self):
        """Test that t beyond sqrt of the largest float saturates both branches and the upper tail to 0"""
        problem = make(2.0, [1], [1])
        assert tail_exponent(problem, 1e200) == (math.inf, math.inf)
        assert tail_closed_form(problem, 1e200).value == 0.0
        assert tail_closed_form(make(0.5, [1], [1]), 1e200, side="lower").value == 0.0

    def test_exponent_matches_rate_sum_form(self):
        """Test p/4 <= m(g(p)) <= 4p for alpha in [1/2, 1] and p in [1, 64]"""
        rng = np.random.default_rng(7)
        for _ in range(200):
            n = int(rng.integers(1, 5))
            problem = make(float(rng.uniform(0.5, 1.0)), rng.uniform(0.1, 2.0, n).tolist(),
                           rng.uniform(0.0, 3.0, n).tolist())
            for p in np.geomspace(1.0, 64.0, 13):
                m = min(tail_exponent(problem, rate_sum_form(problem, float(p))))
                assert p / 4 <= m <= 4 * p * (1 + 1e-12)


class TestDualRate:
    """Test cases for the alpha > 1 dual characterization"""

    def test_unit_scale(self):
        """Test N*(x) = x^2/4 for alpha=2, L=1, so inf{t : (1/t)^2/4 <= 1} = 1/2"""
        assert dual_moment_rate(make(2.0, [1], [1]), 1) == pytest.approx(0.5, rel=1e-8)

    def test_small_scale(self):
        assert dual_moment_rate(make(2.0, [1], [0.5]), 1) == pytest.approx(0.5, rel=1e-8)

    def test_tail_sum(self):
        """Test that indices past floor(p) contribute sqrt(p) ||a Lbar||_2"""
        assert dual_moment_rate(make(2.0, [1, 1], [1, 1]), 1) == pytest.approx(1.5, rel=1e-8)

    def test_empty_tail(self):
        problem = make(1.5, [1, 1], [1, 2])
        duals = DualFunctions(problem)
        p = problem.n + 1

        def load(t):
            return sum(duals.n_star(i, p * problem.a_lbar[i] / t) for i in range(problem.n))

        value = dual_moment_rate(problem, p)
        assert load(value) <= p * (1 + 1e-9)

    def test_needs_alpha_above_one(self):
        with pytest.raises(DomainError):
            dual_moment_rate(make(1.0, [1], [1]), 2)
        with pytest.raises(DomainError):
            DualFunctions(make(0.5, [1], [1]))

    @given(
        st.floats(min_value=1.1, max_value=2.0),
        st.lists(st.tuples(st.floats(min_value=0.01, max_value=10.0), st.floats(min_value=0.0, max_value=10.0)),
                 min_size=1, max_size=8),
        st.sampled_from([2.0, 4.0, 8.0, 16.0]),
    )
    @settings(max_examples=100, deadline=None)
    def test_agrees_with_moment_rate_within_ten(self, alpha, pairs, p):
        problem = make(alpha, [a for a, _ in pairs], [l for _, l in pairs])
        ratio = dual_moment_rate(problem, p) / moment_rate(problem, p).value
        assert 0.1 <= ratio <= 10.0

    @pytest.mark.parametrize("s", [0.5, 2.0, 6.0])
    def test_legendre_transform(self, s):
        """Test n_star(s) = sup_t (s t - n(t)) on a fine grid"""
        duals = DualFunctions(make(1.5, [1], [2]))
        n, n_star = duals.closures(0)
        grid = np.linspace(0.0, 100.0, 200001)
        sup = max(s * t - n(t) for t in grid)
        assert n_star(s) == pytest.approx(sup, rel=1e-3)


class TestInterpolationBracket:
    """Test cases for the l_p interpolation bracket"""

    def test_bracket_holds(self):
        bracket = lp_interpolation_bracket(make(1.0, [1, 1, 1, 1], [1, 1, 1, 1]), 2)
        assert bracket.lower == pytest.approx(1.0)
        assert bracket.value == pytest.approx(2.0)
        assert bracket.lower <= bracket.value <= bracket.upper

    @given(st.floats(min_value=0.2, max_value=1.0), st.floats(min_value=2.0, max_value=40.0),
           st.lists(st.floats(min_value=0.01, max_value=10.0), min_size=1, max_size=10))
    @settings(max_examples=50, deadline=None)
    def test_bracket_property(self, alpha, p, weights):
        bracket = lp_interpolation_bracket(make(alpha, weights, [1.0] * len(weights)), p)
        assert bracket.lower <= bracket.value * (1 + 1e-12)
        assert bracket.value <= bracket.upper * (1 + 1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            lp_interpolation_bracket(make(1.0, [1], [1]), 1.5)
        with pytest.raises(DomainError):
            lp_interpolation_bracket(make(2.0, [1], [1]), 2)
