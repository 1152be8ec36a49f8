"""Orientation coordinates.

Orientations are clockwise shifts in degrees measured from a south-aligned
first image column, kept in ``[0, 360)``.  Errors between two orientations
live on the absolute (shorter-arc) coordinate ``[0, 180]``.

All functions accept scalars or numpy arrays.
"""

import numpy as np

FULL_TURN = 360.0
HALF_TURN = 180.0


def normalize(degrees):
    """Map any angle into ``[0, 360)`` with floored modulo."""
    out = np.mod(np.asarray(degrees, dtype=np.float64), FULL_TURN)
    # np.mod(-tiny, 360) rounds up to exactly 360.0
    out = np.where(out >= FULL_TURN, 0.0, out)
    return out if out.ndim else float(out)


def angle_diff(a, b):
    """Absolute angle error between two south-aligned orientations.

    ``180 - ||a - b| - 180|`` evaluated on normalized inputs, so the result is
    symmetric, continuous across the 0/360 seam and lies in ``[0, 180]``.
    """
    d = np.abs(np.asarray(normalize(a)) - np.asarray(normalize(b)))
    out = HALF_TURN - np.abs(d - HALF_TURN)
    return out if out.ndim else float(out)


def _check_width(width):
    if not width > 0:
        raise ValueError(f"feature width must be positive, got {width!r}")


def bins_to_degrees(w, width):
    """Convert a (fractional) feature-bin shift to degrees in ``[0, 360)``."""
    _check_width(width)
    return normalize(np.asarray(w, dtype=np.float64) / width * FULL_TURN)


def degrees_to_bins(theta, width):
    """Inverse of :func:`bins_to_degrees`; result lies in ``[0, width)``."""
    _check_width(width)
    out = np.asarray(normalize(theta)) / FULL_TURN * width
    return out if out.ndim else float(out)


def resolving_power(width, scale=1):
    """Smallest orientation step, in degrees, for a feature width and upsampling factor."""
    _check_width(width)
    return FULL_TURN / (width * scale)
