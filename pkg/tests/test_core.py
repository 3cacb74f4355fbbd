import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from feedersim.core import Phasor, PerUnitBase, TimeSeries, diff, unwrap_angles, wrap_angle

TWO_PI = 2.0 * math.pi


def unwrap_oracle(raw):
    """Reference unwrap: pick k in {-1, 0, 1} minimizing |raw + 2*pi*k - prev|."""
    out = [raw[0]]
    for a in raw[1:]:
        base = a + TWO_PI * round((out[-1] - a) / TWO_PI)
        best = min((base + TWO_PI * k for k in (-1, 0, 1)),
                   key=lambda c: abs(c - out[-1]))
        out.append(best)
    return np.array(out)


class TestUnwrap:
    def test_already_continuous(self):
        np.testing.assert_allclose(unwrap_angles([0.1, 0.2, 0.3]), [0.1, 0.2, 0.3])

    def test_pi_crossing(self):
        out = unwrap_angles([3.1, -3.1])
        assert out[0] == 3.1
        assert out[1] == pytest.approx(3.1 + (TWO_PI - 6.2), abs=1e-12)
        assert out[1] == pytest.approx(3.183185307179586, abs=1e-12)

    def test_constant_pi(self):
        np.testing.assert_allclose(unwrap_angles([math.pi] * 3), [math.pi] * 3)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            unwrap_angles([])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="index 1"):
            unwrap_angles([0.0, math.nan, 0.2])

    def test_against_oracle_random(self):
        rng = np.random.default_rng(7)
        walk = np.cumsum(rng.normal(0.0, 1.0, 500))
        wrapped = wrap_angle(walk)
        np.testing.assert_allclose(unwrap_angles(wrapped), unwrap_oracle(wrapped),
                                   atol=1e-9)

    @given(st.lists(st.floats(-math.pi + 1e-9, math.pi), min_size=1, max_size=50))
    def test_steps_bounded(self, raw):
        out = unwrap_angles(raw)
        assert out[0] == raw[0]
        steps = np.diff(out)
        assert np.all(steps > -math.pi - 1e-12)
        assert np.all(steps <= math.pi + 1e-12)

    @given(st.lists(st.floats(-50.0, 50.0), min_size=1, max_size=80))
    def test_wrap_back_roundtrip(self, angles):
        wrapped = wrap_angle(np.asarray(angles))
        out = unwrap_angles(wrapped)
        np.testing.assert_allclose(wrap_angle(out), wrapped, atol=1e-12)


class TestWrap:
    def test_interval(self):
        a = np.linspace(-20, 20, 10001)
        w = wrap_angle(a)
        assert np.all(w > -math.pi)
        assert np.all(w <= math.pi)
        np.testing.assert_allclose(np.cos(w), np.cos(a), atol=1e-12)
        np.testing.assert_allclose(np.sin(w), np.sin(a), atol=1e-12)

    def test_boundary(self):
        assert wrap_angle(math.pi) == pytest.approx(math.pi)
        assert wrap_angle(-math.pi) == pytest.approx(math.pi)


class TestDiff:
    def test_constant(self):
        out = diff(TimeSeries(0.0, 1.0, np.array([50.0, 50.0, 50.0])))
        np.testing.assert_array_equal(out.values, [0.0, 0.0])

    def test_simple(self):
        out = diff(TimeSeries(0.0, 1.0, np.array([0.0, 1.0, 3.0])))
        np.testing.assert_array_equal(out.values, [1.0, 2.0])

    def test_ramp_analytic(self):
        a, dt = 2.5, 0.01
        t = dt * np.arange(100)
        out = diff(TimeSeries(0.0, dt, a * t))
        np.testing.assert_allclose(out.values, a * dt, rtol=1e-12)
        assert out.dt == dt
        assert len(out) == 99

    def test_single_sample_rejected(self):
        with pytest.raises(ValueError):
            diff(TimeSeries(0.0, 1.0, np.array([1.0])))

    def test_linearity(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=64)
        y = rng.normal(size=64)
        a, b = 2.0, -0.5
        lhs = diff(TimeSeries(0.0, 0.1, a * x + b * y)).values
        rhs = a * diff(TimeSeries(0.0, 0.1, x)).values + b * diff(TimeSeries(0.0, 0.1, y)).values
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


class TestTypes:
    def test_phasor_invariants(self):
        with pytest.raises(ValueError):
            Phasor(-0.1, 0.0)
        with pytest.raises(ValueError):
            Phasor(1.0, math.inf)
        p = Phasor(2.0, math.pi / 2)
        assert p.complex == pytest.approx(2j)

    def test_per_unit_base(self):
        with pytest.raises(ValueError):
            PerUnitBase(0.0, 400.0)
        b = PerUnitBase(720e3, 21e3)
        assert b.f0 == 50.0

    def test_timeseries(self):
        with pytest.raises(ValueError):
            TimeSeries(0.0, 0.0, np.array([1.0]))
        with pytest.raises(ValueError):
            TimeSeries(0.0, 1.0, np.array([]))
        ts = TimeSeries(1.0, 0.5, np.array([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(ts.t, [1.0, 1.5, 2.0])
        assert ts.t_end == 2.0
        with pytest.raises(ValueError):
            ts.values[0] = 5.0  # immutable
