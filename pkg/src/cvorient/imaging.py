"""Image-space pre-processing.

Images are float64 arrays of shape ``(H, W, C)`` with samples in ``[0, 1]``.
Overhead images are polar-transformed into panorama-like strips, and street
panoramas are circularly shifted and FOV-cropped to create orientation
misalignment with a known (possibly sub-bin) ground truth.
"""

from dataclasses import dataclass

import numpy as np
from PIL import Image

from .angles import FULL_TURN, bins_to_degrees


def as_image(img):
    """Return ``img`` as a float64 ``(H, W, C)`` array; 2-D input gains a channel axis."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or min(arr.shape) < 1:
        raise ValueError(f"expected an (H, W, C) image, got shape {arr.shape}")
    return arr


def load_png(path):
    """Read an 8-bit grayscale/RGB PNG into ``[0, 1]`` floats."""
    with Image.open(path) as im:
        if im.mode not in ("L", "RGB"):
            im = im.convert("RGB")
        arr = np.asarray(im, dtype=np.float64) / 255.0
    return as_image(arr)


def save_png(path, img):
    img = as_image(img)
    data = np.round(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    if data.shape[2] == 1:
        Image.fromarray(data[:, :, 0], mode="L").save(path)
    elif data.shape[2] == 3:
        Image.fromarray(data, mode="RGB").save(path)
    else:
        raise ValueError(f"PNG output needs 1 or 3 channels, got {data.shape[2]}")


# -- polar transform -----------------------------------------------------------


def polar_source_coords(side, height, width, xg=None, yg=None):
    """Overhead-image sample position for each panorama pixel.

    Returns ``(x_s, y_s)`` (column, row) before clamping.  By default the full
    ``height x width`` panorama grid is evaluated; pass ``xg``/``yg`` to query
    arbitrary panorama coordinates.  Column 0 looks due south of the image
    centre and columns advance clockwise.
    """
    if xg is None or yg is None:
        yg, xg = np.mgrid[0:height, 0:width].astype(np.float64)
    xg = np.asarray(xg, dtype=np.float64)
    yg = np.asarray(yg, dtype=np.float64)
    half = side / 2.0
    radius = half * (height - yg) / height
    phi = 2.0 * np.pi * xg / width
    return half - radius * np.sin(phi), half + radius * np.cos(phi)


def bilinear_sample(img, xs, ys):
    """Bilinear lookup at fractional (column, row) positions, clamped to the image."""
    h, w = img.shape[:2]
    xs = np.clip(xs, 0.0, w - 1.0)
    ys = np.clip(ys, 0.0, h - 1.0)
    x0 = np.minimum(np.floor(xs).astype(np.intp), w - 2) if w > 1 else np.zeros(xs.shape, np.intp)
    y0 = np.minimum(np.floor(ys).astype(np.intp), h - 2) if h > 1 else np.zeros(ys.shape, np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    tx = (xs - x0)[..., None]
    ty = (ys - y0)[..., None]
    top = img[y0, x0] + tx * (img[y0, x1] - img[y0, x0])
    bottom = img[y1, x0] + tx * (img[y1, x1] - img[y1, x0])
    return top + ty * (bottom - top)


def polar_transform(sat, height, width):
    """Warp a square overhead image into a ``height x width`` panorama-like strip."""
    sat = as_image(sat)
    side = sat.shape[0]
    if sat.shape[1] != side:
        raise ValueError(f"overhead image must be square, got {sat.shape[:2]}")
    if height < 1 or width < 1:
        raise ValueError("output height and width must be >= 1")
    xs, ys = polar_source_coords(side, height, width)
    return bilinear_sample(sat, xs, ys)


# -- shift and crop -------------------------------------------------------------


@dataclass
class ShiftResult:
    image: np.ndarray
    x_shift: int
    w_gt: float
    theta_gt: float
    feature_width: int


def crop_width(width, fov):
    """Pixel (or bin) width kept by a horizontal field of view ``fov`` degrees."""
    if not 0.0 < fov <= FULL_TURN:
        raise ValueError(f"fov must lie in (0, 360], got {fov!r}")
    exact = fov / FULL_TURN * width
    kept = int(round(exact))
    if abs(exact - kept) > 1e-9 * max(1.0, exact) or kept < 1:
        raise ValueError(f"fov {fov} of a {width}-wide image is not a whole pixel count ({exact})")
    return kept


def shift_and_crop(street, x_shift, fov, feature_width):
    """Rotate a panorama clockwise by ``x_shift`` pixels and crop to ``fov``.

    The last ``x_shift`` columns move to the front, then the first
    ``fov/360 * W`` columns are kept.  The returned ground truth is the shift
    in feature-map bins, ``((W - x_shift) / W * feature_width) mod feature_width``.
    """
    street = as_image(street)
    w = street.shape[1]
    if isinstance(x_shift, (bool, np.bool_)) or int(x_shift) != x_shift:
        raise ValueError(f"x_shift must be an integer, got {x_shift!r}")
    x_shift = int(x_shift)
    if not 0 <= x_shift < w:
        raise ValueError(f"x_shift must lie in [0, {w}), got {x_shift}")
    keep = crop_width(w, fov)
    shifted = np.concatenate([street[:, w - x_shift:], street[:, : w - x_shift]], axis=1)
    w_gt = float(np.mod((w - x_shift) / w * feature_width, feature_width))
    return ShiftResult(
        image=shifted[:, :keep],
        x_shift=x_shift,
        w_gt=w_gt,
        theta_gt=bins_to_degrees(w_gt, feature_width),
        feature_width=feature_width,
    )


def draw_shift(rng, width):
    """Uniform integer shift in ``{0, ..., width-1}``."""
    return int(rng.integers(0, width))


def random_shift(street, seed, fov, feature_width):
    """:func:`shift_and_crop` with a shift drawn from a seeded generator.

    ``seed`` may be an int or an existing ``numpy.random.Generator``.
    """
    street = as_image(street)
    rng = np.random.default_rng(seed)
    return shift_and_crop(street, draw_shift(rng, street.shape[1]), fov, feature_width)
