"""Product-exponential measures: sampling, densities, conditioning, entropies."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from atlas_sim import (
    InvalidInputError,
    InvalidModelError,
    ProductExponentialMeasure,
    conditioned_above,
    conditioned_below,
    entropy_conditioned_above,
    entropy_conditioned_below,
    kl_product_exp,
    linear_rate_measure,
    log_density,
    sample,
    stationary_measure,
    stationary_rates,
)

rate_vectors = st.lists(st.floats(0.05, 20.0), min_size=1, max_size=6).map(tuple)


class TestConstruction:
    def test_stationary_rates_closed_form(self):
        assert np.array_equal(stationary_rates(4), [1.5, 1.0, 0.5])
        assert np.array_equal(stationary_rates(2, gamma=3.0), [3.0])

    def test_linear_rates_closed_form(self):
        meas = linear_rate_measure(4, 1.0, 0.5)
        assert meas.rates == (1.5, 2.0, 2.5)
        assert linear_rate_measure(3, 2.0).rates == (2.0, 2.0)

    def test_rejects_bad_parameters(self):
        with pytest.raises(InvalidInputError):
            ProductExponentialMeasure(rates=(1.0, -1.0))
        with pytest.raises(InvalidInputError):
            ProductExponentialMeasure(rates=(0.0,))
        with pytest.raises(InvalidInputError):
            ProductExponentialMeasure(rates=(1.0,), lower=(0.0, 0.0))
        with pytest.raises(InvalidInputError):
            ProductExponentialMeasure(rates=(1.0,), lower=(-0.5,))
        with pytest.raises(InvalidInputError):
            # zero-mass interval
            ProductExponentialMeasure(rates=(1.0,), lower=(2.0,), upper=(2.0,))
        with pytest.raises(InvalidInputError):
            linear_rate_measure(3, 1.0, a=-0.1)
        with pytest.raises(InvalidModelError):
            stationary_measure(1)

    def test_conditioning_requires_untruncated_base(self):
        base = stationary_measure(3)
        cond = conditioned_above(base, 1.0)
        with pytest.raises(InvalidInputError):
            conditioned_above(cond, 1.0)
        with pytest.raises(InvalidInputError):
            conditioned_below(cond, 2.0)

    def test_threshold_broadcasts(self):
        base = stationary_measure(4)
        assert conditioned_above(base, 1.0).lower == (1.0, 1.0, 1.0)
        assert conditioned_below(base, [1.0, 2.0, 3.0]).upper == (1.0, 2.0, 3.0)


class TestSampling:
    def test_shapes(self):
        meas = stationary_measure(4)
        rng = np.random.default_rng(0)
        assert sample(meas, rng).shape == (3,)
        assert sample(meas, rng, size=7).shape == (7, 3)
        with pytest.raises(InvalidInputError):
            sample(meas, rng, size=0)

    def test_support_containment(self):
        rng = np.random.default_rng(1)
        base = stationary_measure(3)
        above = sample(conditioned_above(base, 2.0), rng, size=5000)
        assert np.all(above >= 2.0)
        below = sample(conditioned_below(base, 0.7), rng, size=5000)
        assert np.all(below >= 0.0) and np.all(below <= 0.7)

    def test_untruncated_means_match_rates(self):
        meas = linear_rate_measure(4, 2.0, 1.0)  # rates 3, 4, 5
        rng = np.random.default_rng(2)
        x = sample(meas, rng, size=200_000)
        for j, rate in enumerate(meas.rates):
            se = x[:, j].std(ddof=1) / math.sqrt(x.shape[0])
            assert abs(x[:, j].mean() - 1.0 / rate) <= 5.0 * se

    def test_conditioned_above_is_shifted_exponential(self):
        # memorylessness: samples - z must be exactly Exp(rate) per coordinate
        from atlas_sim import ks_exponential

        base = stationary_measure(3)  # rates 4/3, 2/3
        z = np.array([0.5, 1.5])
        cond = conditioned_above(base, z)
        x = sample(cond, np.random.default_rng(3), size=100_000)
        for j, rate in enumerate(base.rates):
            res = ks_exponential(x[:, j] - z[j], rate, alpha=0.001)
            assert res.passed, f"coord {j}: D={res.statistic:.5f}"

    def test_conditioned_below_matches_truncated_cdf(self):
        base = stationary_measure(3)
        z = np.array([1.5, 0.4])
        cond = conditioned_below(base, z)
        n = 100_000
        x = sample(cond, np.random.default_rng(4), size=n)
        for j, rate in enumerate(base.rates):
            # probability transform by the truncated CDF must be uniform
            u = np.sort(np.expm1(-rate * x[:, j]) / np.expm1(-rate * z[j]))
            grid = (np.arange(1, n + 1) - 0.5) / n
            d = np.abs(u - grid).max() + 0.5 / n
            assert d < 0.01, f"coord {j}: D={d:.5f}"

    def test_conditioned_means_match_closed_forms(self):
        base = stationary_measure(4)
        rng = np.random.default_rng(5)
        za, zb = 1.2, 0.9
        above = sample(conditioned_above(base, za), rng, size=200_000)
        below = sample(conditioned_below(base, zb), rng, size=200_000)
        for j, a in enumerate(base.rates):
            n = above.shape[0]
            se = above[:, j].std(ddof=1) / math.sqrt(n)
            assert abs(above[:, j].mean() - (za + 1.0 / a)) <= 5.0 * se
            mean_below = 1.0 / a - zb * math.exp(-a * zb) / -math.expm1(-a * zb)
            se = below[:, j].std(ddof=1) / math.sqrt(n)
            assert abs(below[:, j].mean() - mean_below) <= 5.0 * se


class TestLogDensity:
    def test_outside_support_is_minus_inf(self):
        base = stationary_measure(3)
        assert log_density(conditioned_above(base, 1.0), [0.5, 2.0]) == -math.inf
        assert log_density(conditioned_below(base, 1.0), [0.5, 2.0]) == -math.inf
        assert log_density(base, [-0.1, 1.0]) == -math.inf

    def test_untruncated_closed_form(self):
        meas = ProductExponentialMeasure(rates=(2.0, 0.5))
        z = np.array([0.3, 1.1])
        expect = (math.log(2.0) - 2.0 * 0.3) + (math.log(0.5) - 0.5 * 1.1)
        assert log_density(meas, z) == pytest.approx(expect, abs=1e-14)

    def test_normalization_by_quadrature(self):
        # two-coordinate truncated product must integrate to 1 over its box
        base = stationary_measure(3)
        cond = conditioned_below(base, [1.7, 0.8])
        val, err = integrate.dblquad(
            lambda y, x: math.exp(log_density(cond, [x, y])),
            0.0, 1.7, 0.0, 0.8)
        assert err < 1e-9
        assert val == pytest.approx(1.0, abs=1e-8)

    def test_box_probability_by_quadrature(self):
        base = stationary_measure(3)
        cond = conditioned_above(base, [0.5, 0.2])
        a = base.rate_array()

        def trunc_prob(j, lo, hi, shift):
            # P(shift + Exp(a_j) in [lo, hi])
            return math.exp(-a[j] * (lo - shift)) - math.exp(-a[j] * (hi - shift))

        val, err = integrate.dblquad(
            lambda y, x: math.exp(log_density(cond, [x, y])),
            0.6, 1.4, 0.3, 2.0)
        expect = trunc_prob(0, 0.6, 1.4, 0.5) * trunc_prob(1, 0.3, 2.0, 0.2)
        assert err < 1e-9
        assert val == pytest.approx(expect, abs=1e-8)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_log_ratio_to_base_is_constant_above(self, seed):
        rng = np.random.default_rng(seed)
        base = stationary_measure(4)
        z = rng.uniform(0.1, 2.0, size=3)
        cond = conditioned_above(base, z)
        ratio_ref = None
        for x in sample(cond, rng, size=8):
            ratio = log_density(cond, x) - log_density(base, x)
            if ratio_ref is None:
                ratio_ref = ratio
            assert ratio == pytest.approx(ratio_ref, abs=1e-10)
        assert ratio_ref == pytest.approx(
            entropy_conditioned_above(4, z), abs=1e-10)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_log_ratio_to_base_is_constant_below(self, seed):
        rng = np.random.default_rng(seed)
        base = stationary_measure(4)
        z = rng.uniform(0.1, 2.0, size=3)
        cond = conditioned_below(base, z)
        for x in sample(cond, rng, size=8):
            ratio = log_density(cond, x) - log_density(base, x)
            assert ratio == pytest.approx(
                entropy_conditioned_below(4, z), abs=1e-10)


class TestEntropies:
    def test_above_closed_values(self):
        assert entropy_conditioned_above(3, [1.0, 1.0]) == pytest.approx(2.0, abs=1e-14)
        assert entropy_conditioned_above(20, np.ones(19)) == pytest.approx(19.0, abs=1e-12)
        # general bound: never exceeds twice the threshold mass
        z = np.array([0.3, 1.0, 0.1])
        assert entropy_conditioned_above(4, z) <= 2.0 * z.sum() + 1e-15

    def test_below_closed_values(self):
        assert entropy_conditioned_below(2, [math.log(2.0)]) == pytest.approx(
            math.log(2.0), abs=1e-12)
        assert entropy_conditioned_below(3, [1.0, 0.0]) == math.inf

    def test_entropy_inputs_validated(self):
        with pytest.raises(InvalidInputError):
            entropy_conditioned_above(3, [1.0])
        with pytest.raises(InvalidInputError):
            entropy_conditioned_above(3, [-1.0, 1.0])
        with pytest.raises(InvalidInputError):
            entropy_conditioned_below(3, [1.0, -0.2])

    def test_kl_closed_value_and_quadrature(self):
        expect = math.log(2.0) - 0.5
        assert kl_product_exp([2.0], [1.0]) == pytest.approx(expect, abs=1e-14)

        val, err = integrate.quad(
            lambda x: 2.0 * math.exp(-2.0 * x)
            * (math.log(2.0 * math.exp(-2.0 * x)) - math.log(math.exp(-x))),
            0.0, 60.0)
        assert err < 1e-6  # quad reports a conservative estimate
        assert kl_product_exp([2.0], [1.0]) == pytest.approx(val, abs=1e-8)

    def test_kl_additivity(self):
        a, b = (2.0, 3.0), (0.7, 1.1)
        total = kl_product_exp(a, b)
        parts = kl_product_exp(a[:1], b[:1]) + kl_product_exp(a[1:], b[1:])
        assert total == pytest.approx(parts, abs=1e-14)

    @given(rate_vectors, rate_vectors)
    @settings(max_examples=200, deadline=None)
    def test_kl_nonnegative_zero_iff_equal(self, a, b):
        if len(a) != len(b):
            b = a
        val = kl_product_exp(a, b)
        assert val >= -1e-12
        assert kl_product_exp(a, a) == 0.0

    def test_kl_validation(self):
        with pytest.raises(InvalidInputError):
            kl_product_exp([1.0, 2.0], [1.0])
        with pytest.raises(InvalidInputError):
            kl_product_exp([], [])
        with pytest.raises(InvalidInputError):
            kl_product_exp([1.0], [0.0])
