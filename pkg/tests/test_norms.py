"""
Tests for l_beta norms and prefix-truncated norms
"""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subweibull.errors import DomainError
from subweibull.model import INFINITE_BETA, BetaExponent
from subweibull.norms import TruncationLevel, lp_norm, truncated_norm


vectors = st.lists(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False), min_size=1, max_size=20)


class TestLpNorm:
    """Test cases for lp_norm"""

    def test_examples(self):
        assert lp_norm([3, 4], 2) == pytest.approx(5.0)
        assert lp_norm([1, 2, 3], math.inf) == 3.0
        assert lp_norm([1, 2, 3], INFINITE_BETA) == 3.0
        assert lp_norm([1, 1], 3) == pytest.approx(2 ** (1 / 3))
        assert lp_norm([1, 1], BetaExponent(3.0)) == pytest.approx(1.2599, abs=1e-4)

    def test_empty_vector_is_zero(self):
        assert lp_norm([], 2) == 0.0
        assert lp_norm([], math.inf) == 0.0

    def test_zero_vector(self):
        assert lp_norm([0.0, 0.0], 2) == 0.0

    def test_no_overflow_for_large_entries(self):
        """Test that entries near the float limit do not overflow the power sum"""
        assert lp_norm([1e200, 1e200], 2) == pytest.approx(math.sqrt(2) * 1e200)

    @pytest.mark.parametrize("beta", [0.5, 0.0, -1.0])
    def test_rejects_small_beta(self, beta):
        with pytest.raises(DomainError):
            lp_norm([1.0], beta)

    def test_rejects_non_finite_entries(self):
        with pytest.raises(DomainError):
            lp_norm([1.0, math.inf], 2)

    @given(vectors)
    @settings(max_examples=100, deadline=None)
    def test_norms_are_ordered(self, v):
        """Test ||v||_inf <= ||v||_2 <= ||v||_1"""
        sup, two, one = lp_norm(v, math.inf), lp_norm(v, 2), lp_norm(v, 1)
        assert sup <= two * (1 + 1e-12)
        assert two <= one * (1 + 1e-12)


class TestTruncatedNorm:
    """Test cases for prefix-truncated norms"""

    def test_examples(self):
        assert truncated_norm([4, 3, 2, 1], 2, math.inf) == 4.0
        assert truncated_norm([4, 3, 2, 1], 2.9, 2) == pytest.approx(5.0)
        assert truncated_norm([4, 3], 10, math.inf) == 4.0

    def test_truncation_level(self):
        assert TruncationLevel(2.9).prefix_length(10) == 2
        assert TruncationLevel(1.0).prefix_length(10) == 1
        assert TruncationLevel(50.0).prefix_length(3) == 3
        assert TruncationLevel(math.inf).prefix_length(7) == 7

    @pytest.mark.parametrize("p", [0.5, 0.999, math.nan])
    def test_rejects_p_below_one(self, p):
        with pytest.raises(DomainError):
            TruncationLevel(p)

    @given(vectors, st.floats(min_value=1.0, max_value=30.0))
    @settings(max_examples=100, deadline=None)
    def test_prefix_norm_bounded_by_full_norm(self, v, p):
        assert truncated_norm(v, p, 2) <= lp_norm(v, 2) * (1 + 1e-12)
