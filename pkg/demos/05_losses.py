# %% [markdown]
# # Losses and a tiny optimizer
#
# The triplet loss pushes cosine distance to the true match below distance to any
# other candidate. A two-parameter-per-channel affine map is trained with it on a
# synthetic batch, using analytic gradients checked against finite differences.

# %%
import math

import numpy as np

from cvorient.losses import gradcheck, make_toy_pairs, n_triplets, toy_fit, triplet_loss

print("equal distances give ln 2:", triplet_loss(*np.ones((3, 1, 4, 2)), alpha=10) == math.log(2))
print("triplets in a batch of 32:", n_triplets(32))
print("gradcheck:", gradcheck(trials=20))

# %%
street, sat, w_gt = make_toy_pairs(0, b=8)
fit = toy_fit(street, sat, w_gt, steps=200, init="random", seed=0)
for step in (0, 50, 100, 199):
    print(f"step {step:3d}  combined {fit.combined_trace[step]:.4f}  angle {fit.angle_trace[step]:.4f}")
