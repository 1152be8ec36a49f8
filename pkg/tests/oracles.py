"""Slow, independent reference implementations used by the tests.

Nothing here imports the package's correlation or interpolation code.
"""

import numpy as np


def brute_correlate(fg, fs):
    """Direct double loop over shifts and street columns."""
    ws, wg = fs.shape[1], fg.shape[1]
    curve = np.zeros(ws)
    for w in range(ws):
        total = 0.0
        for m in range(wg):
            total += float(np.sum(fg[:, m, :] * fs[:, (m + w) % ws, :]))
        curve[w] = total
    return curve


def brute_interpolate(fmap, scale, circular=True):
    """Linear interpolation evaluated position by position."""
    h, w, c = fmap.shape
    out = np.zeros((h, w * scale, c))
    for j in range(w * scale):
        pos = j / scale
        k = int(np.floor(pos))
        t = pos - k
        nxt = (k + 1) % w if circular else min(k + 1, w - 1)
        out[:, j, :] = (1 - t) * fmap[:, k, :] + t * fmap[:, nxt, :]
    return out


def brute_fi(fg, fs, scale):
    """Exhaustive search over every fine shift of the interpolated maps."""
    full = fg.shape[1] == fs.shape[1]
    curve = brute_correlate(brute_interpolate(fg, scale, full), brute_interpolate(fs, scale))
    return int(np.argmax(curve)) / scale


def harmonic_field(rng, height=4, channels=16, harmonics=8, width=64):
    """Random real band-limited function of the width coordinate.

    Returns ``f(x)`` evaluating the ``(H, len(x), C)`` field at arbitrary
    (fractional) bin positions ``x``; period ``width``.
    """
    k = np.arange(1, harmonics + 1)
    amp = rng.normal(size=(height, channels, harmonics)) / k
    phase = rng.uniform(0, 2 * np.pi, size=(height, channels, harmonics))
    offset = rng.normal(size=(height, channels))

    def f(x):
        x = np.asarray(x, dtype=np.float64)
        arg = 2 * np.pi * k[None, None, :, None] * x[None, None, None, :] / width
        vals = np.sum(amp[..., None] * np.cos(arg + phase[..., None]), axis=2)
        return np.transpose(vals + offset[..., None], (0, 2, 1))

    return f


def band_limited_pair(rng, shift, width=64, **kw):
    """Street/satellite maps with ``street[m] = satellite(m + shift)`` exactly."""
    f = harmonic_field(rng, width=width, **kw)
    m = np.arange(width, dtype=np.float64)
    return f(m + shift), f(m)


def circular_bin_error(a, b, width):
    d = abs(a - b) % width
    return min(d, width - d)
