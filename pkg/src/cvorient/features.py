"""Feature maps with a circular width axis.

A feature map is a float array of shape ``(H, W, C)``; the width axis wraps
around at 360 degrees.  Functions that only touch the width axis also accept
stacks with leading batch dimensions, ``(..., H, W, C)``.
"""

import struct

import numpy as np

from .imaging import as_image

CELL_HEIGHT = 32
CELL_WIDTH = 8
N_ORIENTATION_BINS = 8
N_CHANNELS = 16

FMAP_MAGIC = b"FMAP1"
_HEADER = struct.Struct("<5sIII")


class FeatureFormatError(ValueError):
    """Malformed or truncated FMAP1 file."""


def check_fmap(fmap, min_width=2):
    fmap = np.asarray(fmap)
    if fmap.ndim != 3:
        raise ValueError(f"feature map must be (H, W, C), got shape {fmap.shape}")
    if fmap.shape[1] < min_width or fmap.shape[0] < 1 or fmap.shape[2] < 1:
        raise ValueError(f"degenerate feature map shape {fmap.shape}")
    if not np.all(np.isfinite(fmap)):
        raise ValueError("feature map contains non-finite values")
    return fmap


# -- extractor -----------------------------------------------------------------


def _cell_mean(x, hc, wc):
    """Average over non-overlapping 32x8 cells of an (H, W, K) array."""
    k = x.shape[-1]
    blocks = x.reshape(hc, CELL_HEIGHT, wc, CELL_WIDTH, k)
    return blocks.sum(axis=(1, 3)) / (CELL_HEIGHT * CELL_WIDTH)


def extract_features(img):
    """Deterministic stride-8 feature extractor.

    Produces a ``(H/32, W/8, 16)`` map from per-cell statistics:

    * 3 colour means (centred on 0.5) and 3 colour standard deviations,
    * mean absolute horizontal and vertical luminance gradient,
    * an 8-bin gradient-orientation histogram, magnitude weighted with
      linear vote splitting between neighbouring bins.

    Horizontal gradients wrap around the width axis, so a circular shift of
    the input by a multiple of 8 pixels shifts the output by whole bins.
    Vertical gradients replicate the top and bottom rows.
    """
    img = as_image(img)
    h, w, c = img.shape
    if h % CELL_HEIGHT or w % CELL_WIDTH:
        raise ValueError(
            f"image size {h}x{w} unsupported: height must be divisible by "
            f"{CELL_HEIGHT} and width by {CELL_WIDTH}"
        )
    if c == 1:
        img = np.repeat(img, 3, axis=2)
    elif c != 3:
        raise ValueError(f"expected 1 or 3 channels, got {c}")
    hc, wc = h // CELL_HEIGHT, w // CELL_WIDTH

    means = _cell_mean(img, hc, wc)
    centred = img - np.repeat(np.repeat(means, CELL_HEIGHT, axis=0), CELL_WIDTH, axis=1)
    stds = np.sqrt(_cell_mean(centred * centred, hc, wc))

    lum = img.mean(axis=2)
    gx = np.roll(lum, -1, axis=1) - np.roll(lum, 1, axis=1)
    padded = np.pad(lum, ((1, 1), (0, 0)), mode="edge")
    gy = padded[2:] - padded[:-2]
    mag = np.hypot(gx, gy)

    pos = np.mod(np.arctan2(gy, gx), 2 * np.pi) / (2 * np.pi) * N_ORIENTATION_BINS
    lo = np.floor(pos).astype(np.intp) % N_ORIENTATION_BINS
    hi = (lo + 1) % N_ORIENTATION_BINS
    frac = pos - np.floor(pos)
    votes = np.zeros((h, w, N_ORIENTATION_BINS))
    rows, cols = np.indices((h, w))
    votes[rows, cols, lo] += mag * (1.0 - frac)
    votes[rows, cols, hi] += mag * frac

    grads = np.stack([np.abs(gx), np.abs(gy)], axis=-1)
    return np.concatenate(
        [means - 0.5, stds, _cell_mean(grads, hc, wc), _cell_mean(votes, hc, wc)],
        axis=-1,
    )


# -- width-axis operations ------------------------------------------------------


def circular_shift(fmap, k):
    """Roll the width axis so that ``out[..., m, :] == fmap[..., (m + k) % W, :]``."""
    return np.roll(fmap, -int(k), axis=-2)


def interpolate_width(fmap, scale, circular=True):
    """Linearly upsample the width axis by an integer factor.

    Output column ``S*k + j`` lies a fraction ``j/S`` of the way from input
    column ``k`` to ``k + 1`` (wrapping when ``circular``; otherwise the last
    column is held).  Coarse columns are copied verbatim.
    """
    if isinstance(scale, bool) or int(scale) != scale or scale < 1:
        raise ValueError(f"scaling factor must be an integer >= 1, got {scale!r}")
    scale = int(scale)
    fmap = np.asarray(fmap, dtype=np.float64)
    if scale == 1:
        return fmap.copy()
    nxt = np.roll(fmap, -1, axis=-2)
    if not circular:
        nxt[..., -1, :] = fmap[..., -1, :]
    t = (np.arange(scale) / scale)[:, None]
    # (..., H, W, S, C): a + t*(b - a) keeps constants exact
    fine = fmap[..., :, None, :] + t * (nxt - fmap)[..., :, None, :]
    fine[..., :, 0, :] = fmap
    shape = fmap.shape[:-2] + (fmap.shape[-2] * scale, fmap.shape[-1])
    return fine.reshape(shape)


def fractional_shift(fmap, shift):
    """Circularly sample ``fmap`` at width positions ``m + shift`` (linear interpolation).

    Integer shifts are pure column permutations.
    """
    fmap = np.asarray(fmap, dtype=np.float64)
    width = fmap.shape[-2]
    base = np.floor(shift)
    t = float(shift - base)
    k = int(base) % width
    lo = np.roll(fmap, -k, axis=-2)
    if t == 0.0:
        return lo
    hi = np.roll(lo, -1, axis=-2)
    return lo + t * (hi - lo)


# -- norms ----------------------------------------------------------------------


def frobenius_norm(fmap):
    fmap = np.asarray(fmap, dtype=np.float64)
    if fmap.size == 0:
        raise ValueError("empty feature map")
    return float(np.sqrt(np.sum(fmap * fmap)))


def l2_normalize(fmap):
    norm = frobenius_norm(fmap)
    if norm == 0.0:
        raise ValueError("cannot normalize a zero feature map")
    return np.asarray(fmap, dtype=np.float64) / norm


# -- FMAP1 serialization ---------------------------------------------------------


def write_fmap(fmap, path):
    """Write ``fmap`` as FMAP1: magic, three little-endian u32 dims, f32 payload."""
    fmap = np.asarray(fmap)
    if fmap.ndim != 3:
        raise ValueError(f"feature map must be (H, W, C), got shape {fmap.shape}")
    h, w, c = fmap.shape
    payload = np.ascontiguousarray(fmap, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(FMAP_MAGIC, h, w, c))
        fh.write(payload)


def read_fmap(path):
    """Read an FMAP1 file into a float32 ``(H, W, C)`` array."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise FeatureFormatError(f"{path}: file too short for FMAP1 header")
    magic, h, w, c = _HEADER.unpack_from(data)
    if magic != FMAP_MAGIC:
        raise FeatureFormatError(f"{path}: bad magic {magic!r}")
    if 0 in (h, w, c):
        raise FeatureFormatError(f"{path}: zero dimension in header ({h}, {w}, {c})")
    expected = h * w * c * 4
    payload = data[_HEADER.size:]
    if len(payload) != expected:
        raise FeatureFormatError(
            f"{path}: payload is {len(payload)} bytes, header implies {expected}"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(h, w, c).astype(np.float32)
