"""
Tests for the grouped covariance-estimation experiment
"""

import math

import numpy as np
import pytest

from subweibull.bounds import Regime
from subweibull.covapp import (
    CovErrorStats,
    CovExperimentConfig,
    coverage_experiment,
    empirical_covariance,
    fit_quantile_constant,
    leading_term,
    leading_term_from_data,
    mixture_tail_bound,
    quantile_scaling_sweep,
    sample_complexity_rate,
    simulate_leading_terms,
    theorem4_exponent,
    theorem4_quantile,
    theorem4_tail_lower,
    theorem4_tail_upper,
)
from subweibull.errors import DomainError
from subweibull.sampling import derive_seed


class TestLeadingTerm:
    """Test cases for covariance estimates and the leading error term"""

    def test_empirical_covariance(self):
        assert np.array_equal(empirical_covariance(np.eye(2)), np.eye(2) / 2)

    def test_zero_data(self):
        """Test that all-zero data leaves one unit of squared error per group on the diagonal"""
        stats = leading_term_from_data(np.zeros((2, 3, 2)))
        assert np.array_equal(stats.pair_terms, 2 * np.eye(2))
        assert stats.sup_term == 2.0
        assert stats.upper_terms().tolist() == [2.0, 0.0, 2.0]

    def test_matches_direct_sum(self):
        rng = np.random.default_rng(0)
        cube = rng.standard_normal((3, 10, 4))
        expected = sum((empirical_covariance(cube[l]) - np.eye(4)) ** 2 for l in range(3))
        assert np.allclose(leading_term_from_data(cube).pair_terms, expected)

    def test_shape_checks(self):
        with pytest.raises(DomainError):
            leading_term_from_data(np.zeros((2, 3)))
        with pytest.raises(DomainError):
            leading_term_from_data(np.zeros((1, 3, 2)), sigma=np.eye(3))

    def test_reproducible(self):
        config = CovExperimentConfig(m=2, n=10, q=3, reps=1, seed=0)
        a, b = leading_term(config, 5), leading_term(config, 5)
        assert np.array_equal(a.pair_terms, b.pair_terms)

    def test_simulate_uses_rep_substreams(self):
        config = CovExperimentConfig(m=2, n=10, q=3, reps=4, seed=9)
        records = simulate_leading_terms(config)
        assert len(records) == 4
        third = leading_term(config, derive_seed(9, "covapp", 2))
        assert np.array_equal(records[2].pair_terms, third.pair_terms)
        assert records[2].sup_term == third.sup_term

    def test_config_validation(self):
        with pytest.raises(DomainError):
            CovExperimentConfig(m=0, n=10, q=3, reps=1, seed=0)


class TestTailForms:
    """Test cases for the three-regime tail and quantile forms"""

    def test_all_branches_tie(self):
        assert theorem4_exponent(1.0, 1, 1) == 1.0
        assert theorem4_tail_upper(1.0, 1, 1).regime == Regime.MIXED

    @pytest.mark.parametrize("t,m,n,regime,value", [
        (0.01, 1, 10, Regime.SUBGAUSSIAN, 0.01),
        (100.0, 1, 1, Regime.SUBWEIBULL, 10.0),
        (0.5, 100, 2, Regime.SUBGAUSSIAN, 0.01),
    ])
    def test_active_branch(self, t, m, n, regime, value):
        result = theorem4_tail_upper(t, m, n)
        assert theorem4_exponent(t, m, n) == pytest.approx(value)
        assert result.regime == regime
        assert result.value == pytest.approx(4 * math.exp(-value))

    def test_subexponential_branch(self):
        """Test n t < min{n^2 t^2/m, n sqrt(t)} for t in (m/n, 1)"""
        result = theorem4_tail_upper(0.5, 1, 10)
        assert result.regime == Regime.SUBEXPONENTIAL
        assert theorem4_exponent(0.5, 1, 10) == pytest.approx(5.0)

    def test_trivial_constant(self):
        result = theorem4_tail_upper(1.0, 1, 1, constant_c=0.0)
        assert result.value == 4.0
        assert result.exceeds_one

    def test_lower(self):
        assert theorem4_tail_lower(1.0, 1, 1, constant_c=2.0).value == pytest.approx(math.exp(-2) / 2)
        with pytest.raises(DomainError):
            theorem4_tail_lower(1.0, 1, 1, constant_c=0.0)

    def test_quantile(self):
        assert theorem4_quantile(1.0, 4, 2) == pytest.approx(3.75)
        assert theorem4_quantile(1.0, 4, 2, constant_c=2.0) == pytest.approx(7.5)
        with pytest.raises(DomainError):
            theorem4_quantile(0.0, 4, 2)

    def test_rates(self):
        assert sample_complexity_rate(1, 1, 1) == 1.0
        assert sample_complexity_rate(2, 10, 5) == pytest.approx((2 + math.log(50)) / 10)
        assert mixture_tail_bound(1.0, 1) == pytest.approx(2 * math.exp(-1))

    def test_bad_t(self):
        with pytest.raises(DomainError):
            theorem4_exponent(0.0, 1, 1)


class TestCoverage:
    """Test cases for the constant fits and the coverage experiment"""

    def test_quantile_constant_constant_terms(self):
        terms = np.ones((1000, 1))
        assert fit_quantile_constant(terms, [1.0], 1, 1) == pytest.approx(0.25)

    def test_quantile_constant_guarantee(self):
        """Test that after fitting, every pair exceeds the quantile at most e^-nu of the time"""
        rng = np.random.default_rng(3)
        terms = rng.exponential(size=(2000, 3)) * np.array([1.0, 2.0, 0.5])
        nu_grid = [0.5, 1.0, 2.0, 4.0]
        c = fit_quantile_constant(terms, nu_grid, 2, 10)
        for nu in nu_grid:
            threshold = theorem4_quantile(nu, 2, 10, c)
            assert np.max(np.mean(terms > threshold, axis=0)) <= math.exp(-nu)

    def test_synthetic_experiment(self):
        rng = np.random.default_rng(4)
        q = 2
        stats = []
        for _ in range(1000):
            pair = rng.exponential(0.1, size=(q, q))
            pair = (pair + pair.T) / 2
            stats.append(CovErrorStats(pair, float(pair.max())))
        config = CovExperimentConfig(m=2, n=20, q=q, reps=1000, seed=0)
        report = coverage_experiment(config, [1.0, 2.0], stats=stats)
        assert report.c_fit > 0
        assert all(f <= math.exp(-nu) for f, nu in zip(report.quantile.empirical, [1.0, 2.0]))
        rows = report.rows()
        assert len(rows) == 2 + 4
        assert set(rows[0]) == {"nu_or_t", "empirical_freq", "bound_value", "c_fit"}

    def test_needs_enough_reps(self):
        with pytest.raises(DomainError):
            coverage_experiment(CovExperimentConfig(m=2, n=20, q=2, reps=10, seed=0))

    def test_simulated_experiment(self):
        config = CovExperimentConfig(m=2, n=20, q=2, reps=1000, seed=7)
        report = coverage_experiment(config, [1.0, 2.0])
        assert report.c_fit > 0
        # E[T_ii] = 2m/n and E[T_ij] = m/n, so the mean over (T_11, T_12, T_22) is 5m/(3n)
        assert report.centering_ratio == pytest.approx(5 / 3, rel=0.1)
        payload = report.to_dict()
        assert payload["config"]["seed"] == 7

    def test_sweep(self):
        report = quantile_scaling_sweep(ms=(2,), ns=(20,), qs=(2,), reps=200, seed=1)
        assert report.passed
        assert report.summary["spread"] == 1.0
        assert len(report.rows) == 1
