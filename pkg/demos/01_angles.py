# %% [markdown]
# # Orientation conventions
#
# Orientations live on a circle of 360 degrees, measured from south. A feature map
# of width W splits that circle into W bins, so bin w corresponds to w / W * 360.

# %%
import numpy as np

from cvorient.angles import angle_diff, bins_to_degrees, degrees_to_bins, normalize

# %% The circular difference never exceeds a half turn.
for a, b in [(0, 170), (0, 240), (359.5, 0.5), (90, 90)]:
    print(f"angle_diff({a}, {b}) = {angle_diff(a, b):g}")

# %% It broadcasts like any numpy ufunc.
grid = np.arange(0, 360, 45.0)
print(angle_diff(grid[:, None], grid[None, :]))

# %% Bins and degrees. A 64-wide map has a resolving power of 5.625 degrees per bin.
print(bins_to_degrees(1, 64), degrees_to_bins(90, 64), normalize(-30), normalize(360))
