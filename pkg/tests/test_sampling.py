"""
Tests for seeded samplers and seed derivation
"""

import math

import numpy as np
import pytest
from scipy import stats

from subweibull.errors import DomainError
from subweibull.model import WeightedSumProblem, canonicalize
from subweibull.sampling import (
    GAUSSIAN_ID,
    GENERATOR_ID,
    ZSTAR_BLOCK,
    derive_seed,
    lag1_autocorrelation,
    sample_gaussian_groups,
    sample_rademacher,
    sample_Y,
    sample_Z,
    sample_Z_representation,
    sample_Zstar,
    y_magnitude,
    z_magnitude,
)


class TestSeeds:
    """Test cases for child seed derivation"""

    def test_deterministic(self):
        assert derive_seed(42, "zstar", 1, 2) == derive_seed(42, "zstar", 1, 2)

    def test_distinct_roles_and_indices(self):
        seeds = {derive_seed(42, "zstar", 1, 2), derive_seed(42, "zstar", 2, 1),
                 derive_seed(42, "sign"), derive_seed(43, "sign"), derive_seed(42, "magnitude")}
        assert len(seeds) == 5

    def test_range(self):
        for parent in (0, 1, 2**64 - 1):
            assert 0 <= derive_seed(parent, "x") < 2**64


class TestInversion:
    """Test cases for the inverse-transform magnitudes"""

    def test_y_magnitude(self):
        """Test |Y| = sqrt(-ln U): U = e^-1 gives 1 and U = e^-4 gives 2"""
        assert y_magnitude(np.array([1.0, 4.0])).tolist() == [1.0, 2.0]

    def test_z_magnitude(self):
        assert z_magnitude(np.array([1.0]), 1.0, 2.0)[0] == pytest.approx(2.0)
        assert z_magnitude(np.array([0.25]), 1.0, 2.0)[0] == pytest.approx(0.5)

    def test_z_magnitude_without_scale(self):
        s = np.array([0.1, 1.0, 7.0])
        assert np.array_equal(z_magnitude(s, 0.5, 0.0), np.sqrt(s))


class TestSamplers:
    """Test cases for the Y, Z, Z* and Gaussian samplers"""

    def test_reproducible(self):
        a = sample_Z(0.5, 2.0, 1000, seed=7)
        b = sample_Z(0.5, 2.0, 1000, seed=7)
        assert np.array_equal(a.values, b.values)
        assert not np.array_equal(a.values, sample_Z(0.5, 2.0, 1000, seed=8).values)
        assert a.generator_id == GENERATOR_ID

    def test_zero_scale_reduces_to_Y(self):
        assert np.array_equal(sample_Z(1.0, 0.0, 500, seed=3).values, sample_Y(500, seed=3).values)

    def test_rademacher(self):
        values = sample_rademacher(10_000, seed=1).values
        assert set(np.unique(values).tolist()) == {-1.0, 1.0}
        assert abs(values.mean()) < 4 / math.sqrt(10_000)

    def test_Y_tail_frequency(self):
        """Test Pr[|Y| >= 1] = e^-1 within 4 standard errors"""
        n = 1_000_000
        ys = sample_Y(n, seed=5).values
        freq = np.mean(np.abs(ys) >= 1.0)
        se = math.sqrt(math.exp(-1) * (1 - math.exp(-1)) / n)
        assert abs(freq - math.exp(-1)) < 4 * se

    def test_Z_matches_survival(self):
        mags = np.abs(sample_Z(0.5, 1.0, 50_000, seed=9).values)
        res = stats.kstest(mags, lambda t: 1 - np.exp(-np.minimum(t * t, np.sqrt(np.maximum(t, 0)))))
        assert res.pvalue > 1e-3

    def test_representation_matches_inversion(self):
        a = np.abs(sample_Z(0.5, 2.0, 50_000, seed=10).values)
        b = np.abs(sample_Z_representation(0.5, 2.0, 50_000, seed=11).values)
        assert stats.ks_2samp(a, b).pvalue > 1e-3

    def test_invalid_inputs(self):
        with pytest.raises(DomainError):
            sample_Z(0.0, 1.0, 10, seed=0)
        with pytest.raises(DomainError):
            sample_Z(1.0, -1.0, 10, seed=0)
        with pytest.raises(DomainError):
            sample_Y(0, seed=0)

    def test_zstar_zero_weights(self):
        batch = sample_Zstar(WeightedSumProblem.create(1.0, [0, 0], [1, 1]), 100, seed=1)
        assert np.all(batch.values == 0.0)
        assert len(batch) == 100

    def test_zstar_prefix_stable(self):
        """Test that a shorter run is a prefix of a longer one across a block boundary"""
        problem = canonicalize(WeightedSumProblem.create(0.5, [1, 0.5], [1, 2]))
        short = sample_Zstar(problem, ZSTAR_BLOCK + 10, seed=4).values
        long = sample_Zstar(problem, 2 * ZSTAR_BLOCK + 3, seed=4).values
        assert np.array_equal(short, long[: short.size])

    def test_zstar_independent_of_jobs(self):
        problem = canonicalize(WeightedSumProblem.create(1.0, [1, 1, 1], [0.5, 1, 2]))
        serial = sample_Zstar(problem, 3 * ZSTAR_BLOCK, seed=6, jobs=1).values
        parallel = sample_Zstar(problem, 3 * ZSTAR_BLOCK, seed=6, jobs=2).values
        assert np.array_equal(serial, parallel)

    def test_zstar_single_index_law(self):
        problem = WeightedSumProblem.create(1.0, [1], [2])
        zstar = np.abs(sample_Zstar(problem, 50_000, seed=13).values)
        z = np.abs(sample_Z(1.0, 2.0, 50_000, seed=14).values)
        assert stats.ks_2samp(zstar, z).pvalue > 1e-3

    def test_zstar_symmetric_mean(self):
        problem = canonicalize(WeightedSumProblem.create(1.0, [0.5] * 4, [1.0] * 4))
        xs = sample_Zstar(problem, 100_000, seed=15).values
        assert abs(xs.mean()) < 4 * xs.std() / math.sqrt(xs.size)

    def test_gaussian_groups(self):
        batch = sample_gaussian_groups(4, 500, 3, seed=2)
        assert batch.values.shape == (4, 500, 3)
        assert batch.generator_id == GAUSSIAN_ID
        flat = batch.values.reshape(-1, 3)
        se = math.sqrt(2 / flat.shape[0])
        assert np.all(np.abs(flat.var(axis=0) - 1) < 4 * se)
        assert np.array_equal(batch.values, sample_gaussian_groups(4, 500, 3, seed=2).values)

    def test_gaussian_groups_shape_checks(self):
        with pytest.raises(DomainError):
            sample_gaussian_groups(0, 1, 1, seed=0)

    def test_metadata(self):
        batch = sample_Z(0.5, 2.0, 10, seed=99)
        meta = batch.metadata()
        assert meta["seed"] == 99
        assert meta["spec"] == {"law": "Z", "alpha": 0.5, "l": 2.0, "count": 10}
        assert "alpha=0.5" in batch.describe()

    def test_streams_have_no_lag_one_correlation(self):
        n = 100_000
        xs = sample_Z(1.0, 1.0, n, seed=21).values
        assert abs(lag1_autocorrelation(xs)) < 4 / math.sqrt(n)

    def test_lag1_degenerate(self):
        assert lag1_autocorrelation([1.0, 1.0, 1.0]) is None
        assert lag1_autocorrelation([1.0]) is None
