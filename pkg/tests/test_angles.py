import numpy as np
import pytest
from hypothesis import given, strategies as st

from cvorient.angles import angle_diff, bins_to_degrees, degrees_to_bins, normalize, resolving_power

angles = st.floats(min_value=-1e4, max_value=1e4, allow_nan=False)


class TestAngleDiff:
    def test_reference_pairs(self):
        assert angle_diff(0, 170) == 170
        assert angle_diff(0, 240) == 120

    def test_seam(self):
        assert angle_diff(350, 10) == pytest.approx(20)
        assert angle_diff(359.999, 0.001) == pytest.approx(0.002)

    def test_exact_half_turn(self):
        assert angle_diff(0, 180) == 180.0
        assert angle_diff(90, 270) == 180.0

    def test_negative_inputs_normalized(self):
        assert angle_diff(-10, 10) == pytest.approx(20)
        assert angle_diff(-360, 0) == 0.0

    def test_vectorized(self):
        out = angle_diff(np.array([0.0, 0.0]), np.array([170.0, 240.0]))
        np.testing.assert_allclose(out, [170, 120])

    @given(angles, angles)
    def test_range_and_symmetry(self, a, b):
        d = angle_diff(a, b)
        assert 0.0 <= d <= 180.0
        assert d == angle_diff(b, a)

    @given(angles)
    def test_identity(self, a):
        assert angle_diff(a, a) == 0.0

    @given(angles, angles, st.floats(min_value=-0.01, max_value=0.01))
    def test_continuity(self, a, b, eps):
        assert abs(angle_diff(a, b) - angle_diff(a + eps, b)) <= abs(eps) + 1e-9


class TestNormalize:
    @given(angles)
    def test_range_and_idempotent(self, a):
        n = normalize(a)
        assert 0.0 <= n < 360.0
        assert normalize(n) == n

    def test_tiny_negative_does_not_reach_360(self):
        assert normalize(-1e-20) == 0.0


class TestBinConversion:
    @pytest.mark.parametrize("w,width,deg", [(16, 64, 90.0), (1, 64, 5.625), (1, 640, 0.5625), (64, 64, 0.0)])
    def test_bins_to_degrees(self, w, width, deg):
        assert bins_to_degrees(w, width) == pytest.approx(deg, abs=1e-12)

    @pytest.mark.parametrize("deg,width,w", [(90, 64, 16), (0, 64, 0), (270, 64, 48)])
    def test_degrees_to_bins(self, deg, width, w):
        assert degrees_to_bins(deg, width) == pytest.approx(w, abs=1e-12)

    @pytest.mark.parametrize("fn", [bins_to_degrees, degrees_to_bins])
    def test_zero_width_rejected(self, fn):
        with pytest.raises(ValueError):
            fn(1, 0)

    @given(st.floats(min_value=-500, max_value=500, allow_nan=False))
    def test_round_trip_bins(self, w):
        back = degrees_to_bins(bins_to_degrees(w, 64), 64)
        d = abs(back - w) % 64
        assert min(d, 64 - d) < 1e-9

    @given(st.floats(min_value=0, max_value=359.999, allow_nan=False))
    def test_round_trip_degrees(self, theta):
        back = bins_to_degrees(degrees_to_bins(theta, 64), 64)
        assert angle_diff(back, theta) < 1e-9

    def test_resolving_power(self):
        assert resolving_power(64) == 5.625
        assert resolving_power(64, 10) == pytest.approx(0.5625)
