"""Procedural cross-view scenes with exactly known orientation.

Each scene is a smooth random overhead texture (a sum of low-frequency 2-D
sinusoids per colour channel), the panorama obtained from it by the polar
transform, and a street view made by shifting and cropping that panorama.
"""

from dataclasses import dataclass

import numpy as np

from .features import CELL_WIDTH
from .imaging import polar_transform, random_shift

N_WAVES = 40
MAX_CYCLES = 6.0


@dataclass
class SyntheticScene:
    scene_id: int
    seed: int
    overhead: np.ndarray
    panorama: np.ndarray
    street: np.ndarray
    x_shift: int
    w_gt: float
    theta_gt: float
    fov: float
    feature_width: int


def overhead_texture(rng, side, n_waves=N_WAVES, max_cycles=MAX_CYCLES):
    """Band-limited random RGB field on a ``side x side`` grid, scaled into [0, 1]."""
    coord = np.arange(side) / side
    out = np.empty((side, side, 3))
    for ch in range(3):
        freq = rng.uniform(-max_cycles, max_cycles, size=(n_waves, 2))
        phase = rng.uniform(0.0, 2 * np.pi, size=n_waves)
        amp = rng.normal(size=n_waves) / (1.0 + np.hypot(freq[:, 0], freq[:, 1]))
        # cos(u + v) = cos u cos v - sin u sin v, separable in x and y
        u = 2 * np.pi * np.outer(freq[:, 0], coord) + phase[:, None]
        v = 2 * np.pi * np.outer(freq[:, 1], coord)
        field = (np.cos(v).T * amp) @ np.cos(u) - (np.sin(v).T * amp) @ np.sin(u)
        lo, hi = field.min(), field.max()
        out[:, :, ch] = 0.05 + 0.9 * (field - lo) / (hi - lo)
    return out


def generate_scenes(seed, n, side=512, height=128, width=512, fov=360.0, feature_width=None):
    """Deterministically generate ``n`` scenes from ``seed``.

    ``feature_width`` defaults to the extractor's output width, ``width / 8``.
    """
    if n < 1:
        raise ValueError("need at least one scene")
    if side < 2 or height < 1 or width < 1:
        raise ValueError(f"invalid dimensions side={side}, height={height}, width={width}")
    if feature_width is None:
        feature_width = width // CELL_WIDTH
    children = np.random.SeedSequence(seed).spawn(n)
    scenes = []
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        overhead = overhead_texture(rng, side)
        panorama = polar_transform(overhead, height, width)
        shift_seed = int(rng.integers(2**63))
        shifted = random_shift(panorama, shift_seed, fov, feature_width)
        scenes.append(
            SyntheticScene(
                scene_id=i,
                seed=shift_seed,
                overhead=overhead,
                panorama=panorama,
                street=shifted.image,
                x_shift=shifted.x_shift,
                w_gt=shifted.w_gt,
                theta_gt=shifted.theta_gt,
                fov=fov,
                feature_width=feature_width,
            )
        )
    return scenes
