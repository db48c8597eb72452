import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

import lvphase as lv
from lvphase.ensembles import derive_seed
from lvphase.errors import ConfigurationError
from lvphase.evt import ks_distance, sample_gaussian_extremes

TABLE_1 = {100: 0.33, 1000: 0.27, 10_000: 0.23, 100_000: 0.21, 1_000_000: 0.19}


class TestGumbelConstants:
    def test_table_reproduction(self):
        for n, expected in TABLE_1.items():
            c = lv.gumbel_constants(n)
            assert round(1.0 / c.alpha_star, 2) == expected

    def test_beta_star_at_100(self):
        assert lv.gumbel_constants(100).beta_star == pytest.approx(2.3662, abs=1e-4)

    def test_beta_below_alpha(self):
        for n in (2, 10, 1000, 10**7):
            c = lv.gumbel_constants(n)
            assert 0.0 < c.beta_star < c.alpha_star

    def test_domain(self):
        with pytest.raises(ConfigurationError):
            lv.gumbel_constants(1)


class TestGumbelCdf:
    def test_at_zero(self):
        assert lv.gumbel_cdf(0.0) == pytest.approx(math.exp(-1.0), rel=1e-15)

    def test_limit(self):
        assert lv.gumbel_cdf(50.0) == pytest.approx(1.0, abs=1e-12)

    def test_median(self):
        assert lv.gumbel_cdf(-math.log(math.log(2.0))) == pytest.approx(0.5, rel=1e-15)

    @given(st.floats(-5.0, 20.0), st.floats(-5.0, 20.0))
    @settings(max_examples=200, deadline=None)
    def test_monotone_and_open_range(self, a, b):
        lo, hi = min(a, b), max(a, b)
        fa, fb = float(lv.gumbel_cdf(lo)), float(lv.gumbel_cdf(hi))
        assert 0.0 < fa < 1.0 and 0.0 < fb < 1.0
        assert fa <= fb


class TestHeuristics:
    def test_h1_value(self):
        # independent scalar re-implementation
        n = 1000
        expected = 1 - math.sqrt(math.e / (4 * math.pi * math.log(n))) + math.e / (
            8 * math.pi * math.log(n)
        )
        assert lv.h1(n) == pytest.approx(expected, rel=1e-12)
        assert lv.h1(n) == pytest.approx(0.83869, abs=1e-4)

    def test_h2_value(self):
        n = 1000
        expected = 1 - (4 * math.pi * math.log(n)) ** -0.5 + (8 * math.pi * math.log(n)) ** -1
        assert lv.h2(n) == pytest.approx(expected, rel=1e-12)
        assert lv.h2(n) == pytest.approx(0.89842, abs=1e-4)

    def test_h1_at_large_scan_edge(self):
        assert 0.85 < lv.h1(14050) < 0.90

    def test_limits(self):
        # approach to 1 is logarithmically slow but monotone
        assert 0.98 < lv.h1(10**300) < 1.0
        assert 0.98 < lv.h2(10**300) < 1.0
        assert lv.h1(10**300) > lv.h1(10**6)
        assert lv.h2(10**300) > lv.h2(10**6)

    def test_h2_above_h1_and_monotone(self):
        grid = np.unique(np.logspace(np.log10(2), 7, 200).astype(int))
        v1 = np.array([lv.h1(int(n)) for n in grid])
        v2 = np.array([lv.h2(int(n)) for n in grid])
        assert np.all(v2 > v1)
        assert np.all(v1 < 1.0) and np.all(v2 < 1.0)
        inc = grid >= 8
        assert np.all(np.diff(v1[inc]) > 0.0)
        assert np.all(np.diff(v2[inc]) > 0.0)

    def test_domain(self):
        with pytest.raises(ConfigurationError):
            lv.h1(1)
        with pytest.raises(ConfigurationError):
            lv.h2(0)


class TestLdpTail:
    def test_boundary(self):
        assert lv.ldp_tail(1.0, 50) == 1.0

    def test_sqrt2_at_100(self):
        assert lv.ldp_tail(math.sqrt(2.0), 100) == pytest.approx(0.01, rel=1e-12)

    def test_domain(self):
        with pytest.raises(ConfigurationError):
            lv.ldp_tail(0.99, 100)
        with pytest.raises(ConfigurationError):
            lv.ldp_tail(1.5, 1)

    def test_monte_carlo_order_of_magnitude(self):
        # P(M_n >= xi beta*) vs the tail rule, factor-3 agreement only
        n, xi, trials = 10_000, 1.1, 100_000
        beta = lv.gumbel_constants(n).beta_star
        maxima = sample_gaussian_extremes(n, trials, seed=101, method="quantile")
        mc = float(np.mean(maxima >= xi * beta))
        est = lv.ldp_tail(xi, n)
        assert est / 3.0 <= mc <= est * 3.0


class TestKsDistance:
    def test_matches_scipy(self):
        rng = np.random.default_rng(0)
        sample = rng.gumbel(size=500)
        mine = ks_distance(sample, lv.gumbel_cdf)
        ref = scipy.stats.kstest(sample, lambda x: lv.gumbel_cdf(x)).statistic
        assert mine == pytest.approx(ref, abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ConfigurationError):
            ks_distance(np.array([]), lv.gumbel_cdf)


class TestExtremeSampling:
    def test_deterministic(self):
        a = sample_gaussian_extremes(100, 50, seed=3)
        b = sample_gaussian_extremes(100, 50, seed=3)
        assert np.array_equal(a, b)

    def test_direct_vs_quantile_same_law(self):
        # two-sample KS between the direct and quantile samplers
        direct = sample_gaussian_extremes(10_000, 1500, seed=5, method="direct")
        quant = sample_gaussian_extremes(10_000, 1500, seed=6, method="quantile")
        stat = scipy.stats.ks_2samp(direct, quant).statistic
        assert stat < 0.07

    def test_min_is_reflected_max_quantile_path(self):
        lo = sample_gaussian_extremes(1000, 200, which="min", seed=7, method="quantile")
        hi = sample_gaussian_extremes(1000, 200, which="max", seed=7, method="quantile")
        assert np.array_equal(lo, -hi)

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            sample_gaussian_extremes(10, 5, which="median")
        with pytest.raises(ConfigurationError):
            sample_gaussian_extremes(10, 5, method="warp")


class TestEmpiricalGumbelCheck:
    def test_ks_small_at_1e4(self):
        assert lv.empirical_gumbel_check(10_000, 500, seed=8) < 0.08

    def test_min_max_same_distribution(self):
        ks_max = lv.empirical_gumbel_check(1000, 800, which="max", seed=9)
        ks_min = lv.empirical_gumbel_check(1000, 800, which="min", seed=10)
        # both normalized samples target the same Gumbel limit
        a = sample_gaussian_extremes(1000, 800, which="max", seed=9, method="direct")
        b = sample_gaussian_extremes(1000, 800, which="min", seed=10, method="direct")
        c = lv.gumbel_constants(1000)
        stat = scipy.stats.ks_2samp(
            c.alpha_star * (a - c.beta_star), -c.alpha_star * (b + c.beta_star)
        ).statistic
        assert stat < 0.07
        assert abs(ks_max - ks_min) < 0.05

    def test_trend_1e2_to_1e6(self):
        # median KS over repetitions decreases from n=100 to n=10^6
        ks2 = np.median(
            [lv.empirical_gumbel_check(100, 1000, seed=derive_seed(20, i)) for i in range(5)]
        )
        ks6 = np.median(
            [
                lv.empirical_gumbel_check(1_000_000, 1000, seed=derive_seed(21, i))
                for i in range(5)
            ]
        )
        assert ks6 < ks2

    def test_trials_floor(self):
        with pytest.raises(ConfigurationError):
            lv.empirical_gumbel_check(100, 99)
