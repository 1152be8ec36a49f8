import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from oracles import brute_interpolate

from cvorient.features import (
    FeatureFormatError,
    circular_shift,
    extract_features,
    fractional_shift,
    frobenius_norm,
    interpolate_width,
    l2_normalize,
    read_fmap,
    write_fmap,
)


@pytest.fixture(scope="module")
def image():
    rng = np.random.default_rng(11)
    yy, xx = np.mgrid[0:128, 0:512] / 512
    chans = [np.cos(2 * np.pi * (rng.integers(1, 5) * xx + 3 * yy) + rng.uniform(0, 6)) for _ in range(3)]
    return 0.5 + 0.4 * np.stack(chans, axis=-1)


class TestExtractor:
    def test_output_shape(self, image):
        assert extract_features(image).shape == (4, 64, 16)

    def test_grayscale_accepted(self, image):
        assert extract_features(image[:, :, :1]).shape == (4, 64, 16)

    def test_constant_image_constant_along_width(self):
        f = extract_features(np.full((64, 128, 3), 0.3))
        np.testing.assert_array_equal(f, np.broadcast_to(f[:, :1], f.shape))

    @pytest.mark.parametrize("k", [8, 64, 256, 504])
    def test_shift_equivariance(self, image, k):
        shifted = np.roll(image, k, axis=1)
        np.testing.assert_array_equal(
            extract_features(shifted), circular_shift(extract_features(image), -k // 8)
        )

    @pytest.mark.parametrize("shape", [(100, 512, 3), (128, 500, 3), (128, 512, 2)])
    def test_unsupported_sizes(self, shape):
        with pytest.raises(ValueError):
            extract_features(np.zeros(shape))

    def test_finite(self, image):
        assert np.all(np.isfinite(extract_features(image)))


class TestInterpolateWidth:
    def test_identity_scale(self):
        f = np.random.default_rng(0).normal(size=(2, 5, 3))
        np.testing.assert_array_equal(interpolate_width(f, 1), f)

    def test_two_column_example(self):
        f = np.array([0.0, 1.0]).reshape(1, 2, 1)
        np.testing.assert_array_equal(interpolate_width(f, 2).ravel(), [0, 0.5, 1, 0.5])

    @pytest.mark.parametrize("s", [2, 3, 10])
    def test_constant_stays_constant(self, s):
        f = np.full((2, 7, 3), 0.1)
        out = interpolate_width(f, s)
        assert out.shape == (2, 7 * s, 3)
        assert np.all(out == 0.1)

    @pytest.mark.parametrize("s", [0, -1, 1.5])
    def test_bad_scale(self, s):
        with pytest.raises(ValueError):
            interpolate_width(np.zeros((1, 4, 1)), s)

    @pytest.mark.parametrize("circular", [True, False])
    def test_matches_brute_force(self, circular):
        f = np.random.default_rng(1).normal(size=(3, 9, 4))
        np.testing.assert_allclose(
            interpolate_width(f, 5, circular), brute_interpolate(f, 5, circular), atol=1e-14
        )

    @given(
        arrays(np.float64, (2, 6, 3), elements=st.floats(-1e3, 1e3)),
        st.integers(1, 6),
        st.integers(-12, 12),
    )
    def test_exact_at_coarse_positions_and_shift_commutes(self, f, s, k):
        out = interpolate_width(f, s)
        np.testing.assert_array_equal(out[:, ::s], f)
        np.testing.assert_array_equal(
            interpolate_width(circular_shift(f, k), s), circular_shift(out, s * k)
        )

    def test_batched(self):
        f = np.random.default_rng(2).normal(size=(3, 2, 5, 4))
        out = interpolate_width(f, 3)
        for i in range(3):
            np.testing.assert_array_equal(out[i], interpolate_width(f[i], 3))


class TestFractionalShift:
    def test_integer_is_permutation(self):
        f = np.random.default_rng(4).normal(size=(2, 8, 3))
        np.testing.assert_array_equal(fractional_shift(f, 3), f[:, [3, 4, 5, 6, 7, 0, 1, 2]])

    def test_half_bin(self):
        f = np.arange(4.0).reshape(1, 4, 1)
        np.testing.assert_allclose(fractional_shift(f, 0.5).ravel(), [0.5, 1.5, 2.5, 1.5])


class TestNorms:
    def test_ones(self):
        assert frobenius_norm(np.ones((1, 4, 1))) == 2.0

    def test_normalize(self):
        f = np.random.default_rng(5).normal(size=(4, 64, 16))
        assert frobenius_norm(l2_normalize(f)) == pytest.approx(1.0, abs=1e-9)

    def test_zero(self):
        with pytest.raises(ValueError):
            l2_normalize(np.zeros((1, 4, 1)))


class TestFmapFormat:
    @settings(max_examples=30)
    @given(arrays(np.float32, st.tuples(st.integers(1, 4), st.integers(1, 8), st.integers(1, 5)),
                  elements=st.floats(width=32, allow_nan=False, allow_infinity=False)))
    def test_round_trip_bit_exact(self, tmp_path_factory, f):
        path = tmp_path_factory.mktemp("fm") / "x.fmap"
        write_fmap(f, path)
        back = read_fmap(path)
        assert back.shape == f.shape
        assert back.tobytes() == f.tobytes()

    def test_layout(self, tmp_path):
        f = np.arange(4 * 64 * 16, dtype=np.float32).reshape(4, 64, 16)
        write_fmap(f, tmp_path / "a.fmap")
        raw = (tmp_path / "a.fmap").read_bytes()
        assert raw[:5] == b"FMAP1"
        assert struct.unpack("<III", raw[5:17]) == (4, 64, 16)
        assert len(raw) == 17 + 4 * 64 * 16 * 4
        assert struct.unpack("<f", raw[17 + 4:17 + 8])[0] == 1.0  # (h=0, w=0, c=1)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "b.fmap"
        p.write_bytes(b"FMAP2" + struct.pack("<III", 1, 2, 1) + b"\0" * 8)
        with pytest.raises(FeatureFormatError):
            read_fmap(p)

    def test_truncated(self, tmp_path):
        p = tmp_path / "c.fmap"
        p.write_bytes(b"FMAP1" + struct.pack("<III", 1, 2, 1) + b"\0" * 4)
        with pytest.raises(FeatureFormatError):
            read_fmap(p)

    def test_short_header(self, tmp_path):
        p = tmp_path / "d.fmap"
        p.write_bytes(b"FMAP1\0")
        with pytest.raises(FeatureFormatError):
            read_fmap(p)
