"""Fine-grained orientation estimation for cross-view image matching.

Street-view panoramas are matched against polar-transformed overhead images
by circular cross-correlation of width-circular feature maps, with sub-bin
refinement by feature interpolation or spectral curve smoothing.
"""

__version__ = "0.1.0"

from .angles import angle_diff, bins_to_degrees, degrees_to_bins, normalize
from .correlation import (
    OrientationEstimate,
    align_and_crop,
    cross_correlate,
    estimate,
    estimate_cs,
    estimate_fi,
    similarity,
    spectral_zero_pad,
)
from .features import extract_features, interpolate_width, read_fmap, write_fmap
from .imaging import polar_transform, random_shift, shift_and_crop
