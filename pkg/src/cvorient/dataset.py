"""Scene directories: paired PNGs plus a CSV of ground-truth shifts.

Layout::

    scenes.csv          scene_id,overhead,street,x_shift,w_gt,theta_gt,fov,tag
    overhead/0000.png   square overhead image
    street/0000.png     shifted (and possibly FOV-cropped) street panorama

The same layout works for real datasets: one row per street/overhead pair,
``w_gt`` in feature bins (width 64 for a 512-pixel panorama).
"""

import csv
import os

from .imaging import load_png, save_png
from .retrieval import Candidate, Query

INDEX_NAME = "scenes.csv"
COLUMNS = ("scene_id", "overhead", "street", "x_shift", "w_gt", "theta_gt", "fov", "tag")


def save_scenes(scenes, directory, tag="synthetic"):
    os.makedirs(os.path.join(directory, "overhead"), exist_ok=True)
    os.makedirs(os.path.join(directory, "street"), exist_ok=True)
    with open(os.path.join(directory, INDEX_NAME), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        for s in scenes:
            name = f"{s.scene_id:04d}.png"
            overhead = os.path.join("overhead", name)
            street = os.path.join("street", name)
            save_png(os.path.join(directory, overhead), s.overhead)
            save_png(os.path.join(directory, street), s.street)
            writer.writerow([s.scene_id, overhead, street, s.x_shift, repr(s.w_gt),
                             repr(s.theta_gt), repr(s.fov), tag])


def load_scene_dir(directory):
    """Queries and candidates described by ``directory/scenes.csv``.

    Each row yields one query (the street image) whose true match is the
    candidate built from the same row's overhead image.
    """
    path = os.path.join(directory, INDEX_NAME)
    queries, candidates = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            sid = int(row["scene_id"])
            tag = row.get("tag") or "default"
            queries.append(Query(
                query_id=sid,
                street=load_png(os.path.join(directory, row["street"])),
                w_gt=float(row["w_gt"]),
                theta_gt=float(row["theta_gt"]),
                match_id=sid,
                tag=tag,
                fov=float(row["fov"]),
            ))
            candidates.append(Candidate(sid, load_png(os.path.join(directory, row["overhead"])), tag))
    if not queries:
        raise ValueError(f"{path} lists no scenes")
    return queries, candidates
