# %% [markdown]
# # From an overhead image to a street panorama
#
# The polar transform unrolls the overhead image around its centre so that its
# columns line up with panorama azimuth. Shifting a panorama by x columns and
# cropping it to a field of view gives a street query with known orientation.

# %%
import numpy as np

from cvorient.imaging import polar_transform, shift_and_crop
from cvorient.synth import overhead_texture

rng = np.random.default_rng(1)
overhead = overhead_texture(rng, 256)
pano = polar_transform(overhead, 64, 256)
print("overhead", overhead.shape, "-> panorama", pano.shape)

# %% The bottom row traces a tiny circle around the centre, so it varies little.
print("spread of bottom row:", np.ptp(pano[-1], axis=0))

# %% Shift by a quarter turn and crop to 180 degrees.
res = shift_and_crop(pano, x_shift=64, fov=180, feature_width=32)
print("street", res.image.shape, "w_gt", res.w_gt, "theta_gt", res.theta_gt)
assert np.array_equal(res.image[:, 64:], pano[:, :64])
