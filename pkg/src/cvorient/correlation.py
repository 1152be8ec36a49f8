"""Orientation estimation by circular cross-correlation of feature maps.

The correlation curve over candidate shifts ``w`` is

    curve[w] = sum_m <F_g[m], F_s[(m + w) mod W_s]>

where ``<.,.>`` sums over height and channels.  Its peak is refined below the
bin level either by upsampling both feature maps before correlating (feature
interpolation, ``"fi"``) or by band-limited interpolation of the coarse curve
through spectral zero padding (curve smoothing, ``"cs"``).

Curves are evaluated with real FFTs along the width axis.  Every function
taking a satellite map also accepts a stack ``(N, H, W, C)`` and then returns
one result per stacked map.
"""

from dataclasses import dataclass

import numpy as np

from .angles import bins_to_degrees
from .features import check_fmap, fractional_shift, interpolate_width

METHODS = ("fi", "cs")

# curve values within this fraction of the curve's magnitude count as tied
TIE_RTOL = 1e-10


@dataclass(frozen=True)
class OrientationEstimate:
    w_est: float
    theta_est: float
    peak_score: float
    method: str
    scale: int
    width: int

    def to_dict(self):
        return {
            "w_est": self.w_est,
            "theta_est": self.theta_est,
            "peak_score": self.peak_score,
            "method": self.method,
            "scale": self.scale,
            "width": self.width,
        }


def _check_pair(fg, fs):
    fg = np.asarray(fg, dtype=np.float64)
    fs = np.asarray(fs, dtype=np.float64)
    if fg.ndim != 3 or fs.ndim not in (3, 4):
        raise ValueError(f"bad feature map ranks: {fg.shape} vs {fs.shape}")
    if fg.shape[0] != fs.shape[-3] or fg.shape[2] != fs.shape[-1]:
        raise ValueError(
            f"feature maps disagree in height/channels: {fg.shape} vs {fs.shape[-3:]}"
        )
    if fg.shape[1] > fs.shape[-2]:
        raise ValueError(
            f"street width {fg.shape[1]} exceeds satellite width {fs.shape[-2]}"
        )
    return fg, fs


def _check_scale(scale):
    if isinstance(scale, bool) or int(scale) != scale or scale < 1:
        raise ValueError(f"scaling factor must be an integer >= 1, got {scale!r}")
    return int(scale)


def width_spectrum(fmap, n=None):
    """Real FFT along the width axis, zero-padded to ``n`` columns if given."""
    return np.fft.rfft(fmap, n=n, axis=-2)


def correlation_from_spectra(g_spec, s_spec, width):
    """Correlation curve(s) from precomputed width spectra of both maps."""
    cross = (np.conj(g_spec) * s_spec).sum(axis=(-3, -1))
    return np.fft.irfft(cross, n=width, axis=-1)


def cross_correlate(fg, fs):
    """Circular cross-correlation curve of length ``W_s``.

    ``fg`` may be narrower than ``fs`` (limited field of view); it is then
    slid around the full circle of ``fs``.
    """
    fg, fs = _check_pair(fg, fs)
    width = fs.shape[-2]
    return correlation_from_spectra(width_spectrum(fg, width), width_spectrum(fs), width)


def peak_index(curve):
    """Index of the maximum along the last axis; near-ties go to the lowest index."""
    curve = np.asarray(curve)
    top = curve.max(axis=-1, keepdims=True)
    tol = TIE_RTOL * np.abs(curve).max(axis=-1, keepdims=True)
    return np.argmax(curve >= top - tol, axis=-1)


def spectral_zero_pad(curve, scale):
    """Band-limited upsampling of a circular curve by an integer factor.

    The spectrum is split at the Nyquist frequency and ``(S - 1) * W`` zeros
    are inserted in the middle.  For even ``W`` the Nyquist coefficient is
    halved and placed at both conjugate positions so the result stays real.
    The inverse transform is scaled by ``S``, so ``out[S*k] == curve[k]`` up to
    rounding.
    """
    scale = _check_scale(scale)
    curve = np.asarray(curve, dtype=np.float64)
    width = curve.shape[-1]
    if width < 2:
        raise ValueError("curve needs at least 2 samples")
    if scale == 1:
        return curve.copy()
    spec = np.fft.fft(curve, axis=-1)
    n = width * scale
    padded = np.zeros(curve.shape[:-1] + (n,), dtype=complex)
    half = width // 2
    if width % 2:
        padded[..., : half + 1] = spec[..., : half + 1]
        padded[..., n - half:] = spec[..., half + 1:]
    else:
        padded[..., :half] = spec[..., :half]
        padded[..., n - half + 1:] = spec[..., half + 1:]
        nyquist = spec[..., half] / 2.0
        padded[..., half] = nyquist
        padded[..., n - half] = nyquist
    return np.fft.ifft(padded, axis=-1).real * scale


def fi_curve(fg, fs, scale):
    """Fine correlation curve(s) of the width-interpolated maps, length ``S * W_s``."""
    fg, fs = _check_pair(fg, fs)
    scale = _check_scale(scale)
    full = fg.shape[1] == fs.shape[-2]
    return cross_correlate(
        interpolate_width(fg, scale, circular=full), interpolate_width(fs, scale)
    )


def cs_curve(fg, fs, scale):
    """Smoothed correlation curve(s): coarse curve upsampled by spectral zero padding."""
    return spectral_zero_pad(cross_correlate(fg, fs), scale)


def _estimate(curve, scale, width, method):
    ws = int(peak_index(curve))
    w_est = ws / scale
    return OrientationEstimate(
        w_est=w_est,
        theta_est=bins_to_degrees(w_est, width),
        peak_score=float(curve[ws]),
        method=method,
        scale=scale,
        width=width,
    )


def estimate_fi(fg, fs, scale=10):
    """Sub-bin orientation by feature interpolation."""
    fg = check_fmap(fg)
    fs = check_fmap(fs)
    scale = _check_scale(scale)
    return _estimate(fi_curve(fg, fs, scale), scale, fs.shape[1], "fi")


def estimate_cs(fg, fs, scale=10):
    """Sub-bin orientation by curve smoothing."""
    fg = check_fmap(fg)
    fs = check_fmap(fs)
    scale = _check_scale(scale)
    return _estimate(cs_curve(fg, fs, scale), scale, fs.shape[1], "cs")


def estimate(fg, fs, method="fi", scale=10):
    if method == "fi":
        return estimate_fi(fg, fs, scale)
    if method == "cs":
        return estimate_cs(fg, fs, scale)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def align_and_crop(fs, w_est, fov=360.0):
    """Shift satellite features by ``w_est`` bins and crop to the street FOV.

    After alignment ``out[m]`` corresponds to street column ``m``; the first
    ``round(fov/360 * W_s)`` columns (at least one) are kept.
    """
    if not 0.0 < fov <= 360.0:
        raise ValueError(f"fov must lie in (0, 360], got {fov!r}")
    fs = np.asarray(fs, dtype=np.float64)
    width = fs.shape[-2]
    keep = max(1, int(round(fov / 360.0 * width)))
    return fractional_shift(fs, w_est)[..., :keep, :]


def similarity(fg, fs_aligned):
    """Cosine similarity of two equally shaped feature maps."""
    fg = np.asarray(fg, dtype=np.float64)
    fs_aligned = np.asarray(fs_aligned, dtype=np.float64)
    if fg.shape != fs_aligned.shape:
        raise ValueError(f"shape mismatch: {fg.shape} vs {fs_aligned.shape}")
    ng = np.sqrt(np.sum(fg * fg))
    ns = np.sqrt(np.sum(fs_aligned * fs_aligned))
    if ng == 0.0 or ns == 0.0:
        raise ValueError("cosine similarity of a zero feature map")
    return float(np.sum(fg * fs_aligned) / (ng * ns))
