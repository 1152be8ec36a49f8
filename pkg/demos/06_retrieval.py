# %% [markdown]
# # Retrieval on synthetic scenes
#
# Every scene is a query (its street view) and a candidate (its overhead image).
# Orientation is estimated against each candidate, the candidate map is aligned
# and cropped, and cosine similarity ranks the pool.

# %%
from cvorient.config import RetrievalConfig
from cvorient.evaluation import build_report
from cvorient.retrieval import run_retrieval
from cvorient.synth import generate_scenes

scenes = generate_scenes(seed=0, n=12, side=256, height=64, width=256)

# %%
for fov in (360, 180, 90):
    for method in ("fi", "cs"):
        records = run_retrieval(scenes, RetrievalConfig(method=method, fov=fov, jobs=2))
        m = build_report(records)["metrics"]
        print(f"fov {fov:3d} {method}: r@1 {m['r@1']:.2f}  r@2deg {m['r@2deg']:.2f}  mean {m['mean_error']:.3f} deg")
