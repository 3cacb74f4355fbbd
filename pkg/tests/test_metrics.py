import math

import numpy as np
import pytest

from feedersim.core import unwrap_angles, wrap_angle
from feedersim.metrics import (Cdf, MetricSeries, NoActiveSamples,
                               baseline_angle, dominance_report,
                               empirical_cdf, freq_std, ifd, quantile_grid,
                               rpadd, rrocof)
from feedersim.pmu import FrameSet
from oracles import ifd_oracle, rpadd_oracle, rrocof_oracle

DT_REPORT = 0.02


def frames_from(f=None, theta=None, n=None, t0=0.0):
    if f is not None:
        n = len(f)
    if theta is not None:
        n = len(theta)
    t = t0 + DT_REPORT * np.arange(n)
    return FrameSet(
        t=t,
        v_mag=np.ones(n),
        theta=np.zeros(n) if theta is None else np.asarray(theta, float),
        f=np.full(n, 50.0) if f is None else np.asarray(f, float),
        valid=np.ones(n, dtype=bool),
    )


def random_streams(seed, n=1000):
    rng = np.random.default_rng(seed)
    f = 50.0 + rng.normal(0.0, 0.05, n)
    th1 = rng.normal(0.014, 0.001, n)
    th2 = rng.normal(0.0, 0.001, n)
    p = rng.uniform(-300e3, 300e3, n)
    return f, th1, th2, p


class TestIfd:
    def test_nominal_is_zero(self):
        assert ifd([frames_from(f=np.full(100, 50.0))]) == 0.0

    def test_hand_sum(self):
        assert ifd([frames_from(f=[50.01, 49.99])]) == pytest.approx(0.02, rel=1e-12)

    def test_matches_oracle(self):
        rng = np.random.default_rng(0)
        streams = [frames_from(f=50.0 + rng.normal(0, 0.03, 1000))
                   for _ in range(3)]
        got = ifd(streams)
        want = ifd_oracle(streams)
        assert got == pytest.approx(want, rel=1e-12)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="equal length"):
            ifd([frames_from(f=np.full(5, 50.0)), frames_from(f=np.full(6, 50.0))])


class TestFreqStd:
    def test_constant(self):
        assert freq_std(frames_from(f=np.full(10, 50.0))) == 0.0

    def test_two_samples(self):
        assert freq_std(frames_from(f=[50.01, 49.99])) == pytest.approx(0.01)

    def test_matches_oracle(self):
        rng = np.random.default_rng(1)
        f = 50.0 + rng.normal(0, 0.02, 1000)
        got = freq_std(frames_from(f=f))
        mean = sum(f) / len(f)
        want = math.sqrt(sum((x - mean) ** 2 for x in f) / len(f))
        assert got == pytest.approx(want, rel=1e-12)

    def test_all_invalid_rejected(self):
        frames = frames_from(f=np.full(10, 50.0))
        frames.valid[:] = False
        with pytest.raises(ValueError):
            freq_std(frames)


class TestRrocof:
    def test_zero_df(self):
        frames = frames_from(f=np.full(100, 50.0))
        p = np.linspace(0.0, 500e3, 100)
        series = rrocof(frames, p, p_threshold=1e3)
        assert np.all(series.values == 0.0)
        assert series.retained_fraction == 1.0

    def test_direct_evaluation(self):
        # 6 mHz over 60 ms against 14.4 kW of power change
        f = np.array([50.0, 50.0, 50.0, 50.006, 50.006, 50.006, 50.012])
        p = np.array([0.0, 0.0, 0.0, 14.4e3, 14.4e3, 14.4e3, 28.8e3])
        series = rrocof(frames_from(f=f), p, window=0.06, p_threshold=1e3)
        assert series.values[0] == pytest.approx((0.006 / 0.06) / 14.4e3, rel=1e-12)
        assert series.values[0] == pytest.approx(6.944e-6, rel=1e-3)

    def test_matches_oracle(self):
        f, _, _, p = random_streams(7)
        frames = frames_from(f=f)
        frames.valid[0] = False
        series = rrocof(frames, p, window=0.06, p_threshold=50e3)
        t, v, rf = rrocof_oracle(frames, p, 0.06, 50e3)
        np.testing.assert_array_equal(series.t, t)
        np.testing.assert_allclose(series.values, v, rtol=1e-12)
        assert series.retained_fraction == pytest.approx(rf, abs=1e-15)

    def test_all_below_threshold(self):
        frames = frames_from(f=np.full(100, 50.0))
        with pytest.raises(NoActiveSamples, match="no active samples"):
            rrocof(frames, np.zeros(100), p_threshold=1e3)

    def test_window_must_align(self):
        frames = frames_from(f=np.full(100, 50.0))
        with pytest.raises(ValueError, match="integer multiple"):
            rrocof(frames, np.ones(100) * 1e4, window=0.05)

    def test_misaligned_power_rejected(self):
        frames = frames_from(f=np.full(100, 50.0))
        with pytest.raises(ValueError, match="aligned"):
            rrocof(frames, np.ones(99))


class TestBaseline:
    def test_identical_streams(self):
        f1 = frames_from(theta=np.zeros(100))
        f2 = frames_from(theta=np.zeros(100))
        d0, std = baseline_angle(f1, f2, (0.0, 2.0))
        assert d0 == 0.0
        assert std == 0.0

    def test_constant_difference(self):
        d = math.radians(0.84)
        f1 = frames_from(theta=np.full(100, d))
        f2 = frames_from(theta=np.zeros(100))
        d0, _ = baseline_angle(f1, f2, (0.0, 2.0))
        assert math.degrees(d0) == pytest.approx(0.84, rel=1e-12)

    def test_noise_averaging(self):
        # std of the mean ~ sigma*sqrt(2)/sqrt(n)
        rng = np.random.default_rng(11)
        sigma = math.radians(0.001)
        n = 500
        estimates = []
        for _ in range(200):
            f1 = frames_from(theta=rng.normal(0.0, sigma, n))
            f2 = frames_from(theta=rng.normal(0.0, sigma, n))
            d0, _ = baseline_angle(f1, f2, (0.0, n * DT_REPORT))
            estimates.append(d0)
        got = float(np.std(estimates))
        expected = sigma * math.sqrt(2.0) / math.sqrt(n)
        assert abs(got - expected) < 0.25 * expected

    def test_too_few_pairs_rejected(self):
        f1 = frames_from(theta=np.zeros(100))
        with pytest.raises(ValueError, match="fewer"):
            baseline_angle(f1, f1, (0.0, 0.1))


class TestRpadd:
    def test_zero_deviation(self):
        f1 = frames_from(theta=np.full(50, 0.01))
        f2 = frames_from(theta=np.zeros(50))
        p = np.full(50, 50e3)
        series = rpadd(f1, f2, p, 0.01)
        assert np.all(series.values == 0.0)

    def test_sensitivity_figure(self):
        # 0.864 deg of deviation against 144 kW is 0.006 deg/kW
        d0 = math.radians(0.84)
        f1 = frames_from(theta=np.full(50, d0 - math.radians(0.864)))
        f2 = frames_from(theta=np.zeros(50))
        series = rpadd(f1, f2, np.full(50, 144e3), d0)
        assert series.values[0] == pytest.approx(0.006, rel=1e-12)

    def test_matches_oracle(self):
        _, th1, th2, p = random_streams(13)
        f1 = frames_from(theta=th1)
        f2 = frames_from(theta=th2)
        d0 = 0.013
        series = rpadd(f1, f2, p, d0, p_threshold=40e3)
        t, v, rf = rpadd_oracle(f1, f2, p, d0, 40e3)
        np.testing.assert_array_equal(series.t, t)
        np.testing.assert_allclose(series.values, v, rtol=1e-12)
        assert series.retained_fraction == pytest.approx(rf, abs=1e-15)

    def test_differenced_denominator(self):
        _, th1, th2, p = random_streams(17, n=300)
        f1 = frames_from(theta=th1)
        f2 = frames_from(theta=th2)
        series = rpadd(f1, f2, p, 0.0, p_threshold=40e3, denominator="differenced")
        d = unwrap_angles(wrap_angle(th1 - th2))
        dp = np.diff(p) / 1e3
        keep = np.abs(dp) >= 40.0
        want = np.degrees(np.abs(d[1:][keep])) / np.abs(dp[keep])
        np.testing.assert_allclose(series.values, want, rtol=1e-12)

    def test_common_mode_rejection(self):
        # a constant added to both angle streams cancels exactly
        _, th1, th2, p = random_streams(19)
        d0 = 0.013
        a = rpadd(frames_from(theta=th1), frames_from(theta=th2), p, d0,
                  p_threshold=40e3)
        b = rpadd(frames_from(theta=th1 + 0.4), frames_from(theta=th2 + 0.4),
                  p, d0, p_threshold=40e3)
        np.testing.assert_allclose(a.values, b.values, atol=1e-12)

    def test_scale_invariance_exact(self):
        # scaling power by c scales every retained value by 1/c; the
        # threshold scales along so the retained set is unchanged
        _, th1, th2, p = random_streams(23)
        f1 = frames_from(theta=th1)
        f2 = frames_from(theta=th2)
        base = rpadd(f1, f2, p, 0.013, p_threshold=40e3)
        for c in (0.1, 10.0):
            scaled = rpadd(f1, f2, c * p, 0.013, p_threshold=c * 40e3)
            assert len(scaled) == len(base)
            np.testing.assert_allclose(scaled.values, base.values / c, rtol=1e-12)

    def test_rrocof_scale_invariance_exact(self):
        f, _, _, p = random_streams(29)
        frames = frames_from(f=f)
        base = rrocof(frames, p, p_threshold=50e3)
        for c in (0.1, 10.0):
            scaled = rrocof(frames, c * p, p_threshold=c * 50e3)
            assert len(scaled) == len(base)
            np.testing.assert_allclose(scaled.values, base.values / c, rtol=1e-12)


class TestCdf:
    def test_single_sample(self):
        cdf = empirical_cdf(np.array([1.0]))
        np.testing.assert_array_equal(cdf.values, [1.0])
        np.testing.assert_array_equal(cdf.probs, [1.0])

    def test_three_samples(self):
        cdf = empirical_cdf(np.array([3.0, 1.0, 2.0]))
        np.testing.assert_array_equal(cdf.values, [1.0, 2.0, 3.0])
        np.testing.assert_allclose(cdf.probs, [1 / 3, 2 / 3, 1.0])

    def test_kolmogorov_bound_uniform(self):
        rng = np.random.default_rng(31)
        cdf = empirical_cdf(rng.uniform(0.0, 1.0, 10_000))
        ks = float(np.max(np.abs(cdf.probs - cdf.values)))
        assert ks < 0.03

    def test_quantile_identity_on_samples(self):
        rng = np.random.default_rng(37)
        x = rng.normal(size=257)
        cdf = empirical_cdf(x)
        n = len(x)
        for k in (1, 57, 128, 256, 257):
            assert cdf.quantile(k / n) == cdf.values[k - 1]

    def test_from_metric_series(self):
        series = MetricSeries(t=np.arange(3.0), values=np.array([3.0, 1.0, 2.0]),
                              retained_fraction=0.5)
        assert empirical_cdf(series).median == 2.0


class TestDominance:
    def test_identical_cdfs(self):
        x = np.linspace(1.0, 2.0, 100)
        report = dominance_report(empirical_cdf(x), empirical_cdf(x))
        assert report["dominance_fraction"] == 0.0
        assert report["median_ratio"] == 1.0

    def test_shifted_cdf_dominates(self):
        x = np.linspace(1.0, 2.0, 100)
        report = dominance_report(empirical_cdf(0.9 * x), empirical_cdf(x))
        assert report["dominance_fraction"] == 1.0
        assert report["median_ratio"] == pytest.approx(0.9, rel=1e-9)

    def test_grid(self):
        grid = quantile_grid(99)
        assert grid[0] == pytest.approx(0.01)
        assert grid[-1] == pytest.approx(0.99)
        assert len(grid) == 99
