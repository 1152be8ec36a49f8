# %% [markdown]
# # Width-circular feature maps
#
# The extractor pools 32 x 8 pixel cells into 16 channels. Horizontal gradients
# wrap around the panorama seam, so rolling the image by a multiple of 8 pixels
# rolls the feature map by exactly one column per 8 pixels.

# %%
import tempfile
from pathlib import Path

import numpy as np

from cvorient.features import circular_shift, extract_features, read_fmap, write_fmap

img = np.random.default_rng(0).uniform(size=(128, 512, 3))
f = extract_features(img)
print("feature map", f.shape)

# %%
rolled = extract_features(np.roll(img, -24, axis=1))
print("equivariant:", np.allclose(rolled, circular_shift(f, 3)))

# %% FMAP1 files hold float32 maps.
with tempfile.TemporaryDirectory() as d:
    path = Path(d) / "pano.fmap"
    write_fmap(f, path)
    back = read_fmap(path)
    print(path.stat().st_size, "bytes, max round-trip error", np.abs(back - f).max())
