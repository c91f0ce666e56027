"""Goodness-of-fit statistics, ordering checks, and rate identities."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atlas_sim import (
    InvalidInputError,
    alpha_identity_check,
    anchored_identity_check,
    domination_violation,
    ks_critical_value,
    ks_exponential,
    scaling_fit,
    stochastic_dominance,
)


class TestKolmogorovSmirnov:
    def test_critical_value_formula(self):
        assert ks_critical_value(1, 0.001) == pytest.approx(
            math.sqrt(-math.log(0.0005) / 2.0), rel=1e-15)
        # classic two-sided 5% coefficient
        assert ks_critical_value(1000, 0.05) == pytest.approx(
            1.3581015157406195 / math.sqrt(1000), rel=1e-12)
        with pytest.raises(InvalidInputError):
            ks_critical_value(0)
        with pytest.raises(InvalidInputError):
            ks_critical_value(100, 1.0)

    def test_quantile_construction_attains_half_step(self):
        # plugging in the mid-step quantiles makes both one-sided gaps 0.5/n
        n, rate = 400, 2.0
        u = (np.arange(1, n + 1) - 0.5) / n
        x = -np.log1p(-u) / rate
        res = ks_exponential(x, rate)
        assert res.statistic == pytest.approx(0.5 / n, abs=1e-12)
        assert res.n == n and res.passed

    def test_degenerate_sample_has_statistic_one(self):
        res = ks_exponential(np.zeros(50), 1.0)
        assert res.statistic == 1.0
        assert not res.passed

    def test_wrong_rate_rejected(self):
        rng = np.random.default_rng(6)
        x = rng.exponential(0.5, size=1000)  # Exp(2) draws
        assert not ks_exponential(x, 1.0).passed
        assert ks_exponential(x, 2.0).passed

    def test_rescaling_invariance(self):
        rng = np.random.default_rng(7)
        x = rng.exponential(1.0, size=500)
        base = ks_exponential(x, 1.0).statistic
        # powers of two rescale exactly; irrational factors to rounding
        assert ks_exponential(2.0 * x, 0.5).statistic == base
        assert ks_exponential(math.pi * x, 1.0 / math.pi).statistic == pytest.approx(
            base, abs=1e-12)

    def test_alpha_feeds_threshold(self):
        rng = np.random.default_rng(8)
        x = rng.exponential(1.0, size=200)
        res_tight = ks_exponential(x, 1.0, alpha=0.5)
        res_loose = ks_exponential(x, 1.0, alpha=0.001)
        assert res_tight.statistic == res_loose.statistic
        assert res_tight.critical() < res_loose.critical()
        assert res_loose.critical(0.5) == res_tight.critical()

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            ks_exponential(np.ones(9), 1.0)
        with pytest.raises(InvalidInputError):
            ks_exponential(np.array([-1.0] + [1.0] * 19), 1.0)
        with pytest.raises(InvalidInputError):
            ks_exponential(np.ones(20), 0.0)


class TestDominationViolation:
    def test_ordered_pairs_give_zero(self):
        lo = np.zeros((5, 4))
        hi = np.full((5, 4), 1.0)
        assert domination_violation(lo, hi) == 0.0
        assert domination_violation(lo, lo) == 0.0  # ties are not violations

    def test_tolerance_boundary(self):
        hi = np.ones((3, 3))
        assert domination_violation(hi + 2e-12, hi, tol=1e-12) == 1.0
        assert domination_violation(hi + 5e-13, hi, tol=1e-12) == 0.0

    def test_counts_fraction(self):
        lo = np.array([0.0, 2.0, 0.5, 3.0])
        hi = np.array([1.0, 1.0, 1.0, 1.0])
        assert domination_violation(lo, hi) == 0.5

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            domination_violation(np.zeros((2, 2)), np.zeros((2, 3)))
        with pytest.raises(InvalidInputError):
            domination_violation(np.zeros(0), np.zeros(0))


class TestStochasticDominance:
    def test_hand_case(self):
        assert stochastic_dominance([1.0, 3.0], [2.0, 4.0]) == 0.0
        assert stochastic_dominance([2.0, 4.0], [1.0, 3.0]) == 0.5

    def test_shifted_sample_dominates(self):
        rng = np.random.default_rng(9)
        a = rng.exponential(1.0, size=3000)
        assert stochastic_dominance(a, a + 1.0) == 0.0

    def test_smaller_sample_detected(self):
        rng = np.random.default_rng(10)
        a = rng.exponential(1.0, size=3000)   # Exp(1)
        b = rng.exponential(0.5, size=3000)   # Exp(2), stochastically smaller
        # sup_x (F_B - F_A) approximates max(e^-x - e^-2x) = 0.25
        assert stochastic_dominance(a, b) > 0.2

    def test_empty_rejected(self):
        with pytest.raises(InvalidInputError):
            stochastic_dominance([], [1.0])


class TestScalingFit:
    def test_exact_power_law_recovered(self):
        t = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
        fit = scaling_fit(t, 3.0 * t ** 0.5)
        assert fit.slope == pytest.approx(0.5, abs=1e-12)
        assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
        assert len(fit.points) == 5

    def test_constant_series_is_flat_with_unit_r2(self):
        fit = scaling_fit([1.0, 2.0, 3.0], [4.0, 4.0, 4.0])
        assert fit.slope == pytest.approx(0.0, abs=1e-12)
        assert fit.r_squared == 1.0

    @given(st.floats(-1.5, 1.5), st.floats(0.1, 10.0))
    @settings(max_examples=100, deadline=None)
    def test_recovers_arbitrary_exponent(self, slope, scale):
        t = np.array([0.5, 1.0, 2.0, 4.0, 8.0])
        fit = scaling_fit(t, scale * t ** slope)
        assert fit.slope == pytest.approx(slope, abs=1e-9)

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            scaling_fit([1.0, 2.0], [1.0, 2.0])
        with pytest.raises(InvalidInputError):
            scaling_fit([1.0, 2.0, 3.0], [1.0, -2.0, 3.0])
        with pytest.raises(InvalidInputError):
            scaling_fit([0.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        with pytest.raises(InvalidInputError):
            scaling_fit([1.0, 2.0, 3.0], [1.0, 2.0])


class TestRateIdentities:
    def test_residuals_at_rounding_level(self):
        for m in [2, 3, 5, 10, 37, 100, 251, 600, 1000]:
            assert alpha_identity_check(m) <= 1e-12
            assert anchored_identity_check(m) <= 1e-12

    def test_typical_size_is_tighter(self):
        assert alpha_identity_check(100) <= 1e-14
        assert anchored_identity_check(100) <= 1e-14

    @given(st.integers(2, 1000))
    @settings(max_examples=120, deadline=None)
    def test_every_size_in_range(self, m):
        assert alpha_identity_check(m) <= 1e-12
        assert anchored_identity_check(m) <= 1e-12

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            alpha_identity_check(1)
        with pytest.raises(InvalidInputError):
            anchored_identity_check(1)
