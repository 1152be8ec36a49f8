"""Batch retrieval: rank every overhead candidate for every street query.

The candidate pool is featurized once and treated as immutable; queries are
independent work items and may run on several threads.  Results are always
returned in query order, so the output does not depend on ``jobs``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .angles import bins_to_degrees
from .correlation import (
    align_and_crop,
    correlation_from_spectra,
    peak_index,
    similarity,
    spectral_zero_pad,
    width_spectrum,
)
from .evaluation import EvaluationRecord
from .features import extract_features, interpolate_width
from .imaging import as_image, crop_width, polar_transform


@dataclass
class Query:
    query_id: int
    street: np.ndarray
    w_gt: float
    theta_gt: float
    match_id: int
    tag: str = "default"
    fov: float = 360.0


@dataclass
class Candidate:
    candidate_id: int
    overhead: np.ndarray
    tag: str = "default"


class CandidatePool:
    """Featurized overhead candidates plus the width spectra the estimator needs."""

    def __init__(self, features, ids, tags, method, scale):
        self.features = np.asarray(features, dtype=np.float64)
        self.ids = np.asarray(ids)
        self.tags = list(tags)
        self.method = method
        self.scale = int(scale)
        self.width = self.features.shape[2]
        if method == "fi":
            self.spectra = width_spectrum(interpolate_width(self.features, self.scale))
        else:
            self.spectra = width_spectrum(self.features)
        self._index = {int(c): n for n, c in enumerate(self.ids)}

    @classmethod
    def from_candidates(cls, candidates, height, width, method, scale):
        feats = [extract_features(polar_transform(c.overhead, height, width)) for c in candidates]
        return cls(
            np.stack(feats),
            [c.candidate_id for c in candidates],
            [c.tag for c in candidates],
            method,
            scale,
        )

    def __len__(self):
        return len(self.ids)

    def position(self, candidate_id):
        return self._index[int(candidate_id)]

    def estimate_all(self, fg):
        """Fractional-bin orientation of query features ``fg`` against every candidate."""
        ws = self.width
        if self.method == "fi":
            n = ws * self.scale
            g = interpolate_width(fg, self.scale, circular=fg.shape[1] == ws)
            curves = correlation_from_spectra(width_spectrum(g, n), self.spectra, n)
        else:
            coarse = correlation_from_spectra(width_spectrum(fg, ws), self.spectra, ws)
            curves = spectral_zero_pad(coarse, self.scale)
        return peak_index(curves) / self.scale


def rank_candidates(sims, ids):
    """Candidate positions by descending similarity, ties broken by candidate id."""
    return np.lexsort((ids, -np.asarray(sims)))


def process_query(query, pool, config):
    fg = extract_features(query.street)
    if config.orientation == "known":
        w_est = np.full(len(pool), query.w_gt)
    else:
        w_est = pool.estimate_all(fg)
    fov = 360.0 * fg.shape[1] / pool.width
    sims = np.array([
        similarity(fg, align_and_crop(pool.features[n], w_est[n], fov))
        for n in range(len(pool))
    ])
    order = rank_candidates(sims, pool.ids)
    true_pos = pool.position(query.match_id)
    rank = int(np.nonzero(order == true_pos)[0][0]) + 1
    top = order[0]
    return EvaluationRecord(
        query_id=query.query_id,
        theta_gt=query.theta_gt,
        theta_est=bins_to_degrees(w_est[true_pos], pool.width),
        rank=rank,
        query_tag=query.tag,
        top1_tag=pool.tags[top],
        theta_est_top1=bins_to_degrees(w_est[top], pool.width),
    )


def retrieve(queries, candidates, config, pano_height=None, pano_width=None):
    """Rank ``candidates`` for each query and return one record per query.

    Candidates are polar-transformed to ``pano_height x pano_width``.  Both
    default to the full panorama implied by the first query: its height, and
    its width scaled up by ``360 / fov``.  The crop applied to aligned
    candidate features follows each query's own width.
    """
    if not queries:
        raise ValueError("no queries to retrieve")
    first = as_image(queries[0].street)
    if pano_height is None:
        pano_height = first.shape[0]
    if pano_width is None:
        pano_width = round(first.shape[1] * 360.0 / queries[0].fov)
    pool = CandidatePool.from_candidates(
        candidates, pano_height, pano_width, config.method, config.scale
    )

    def work(q):
        try:
            return process_query(q, pool, config)
        except Exception as exc:
            raise RuntimeError(f"query {q.query_id}: {exc}") from exc

    if config.jobs == 1:
        return [work(q) for q in queries]
    with ThreadPoolExecutor(max_workers=config.jobs) as ex:
        return list(ex.map(work, queries))


def narrow_query(query, fov):
    """``query`` with its street view cropped down to ``fov`` degrees."""
    if fov > query.fov:
        raise ValueError(f"query {query.query_id} was cropped to {query.fov} deg, cannot widen to {fov}")
    if fov == query.fov:
        return query
    street = as_image(query.street)
    full = round(street.shape[1] * 360.0 / query.fov)
    return replace(query, street=street[:, : crop_width(full, fov)], fov=fov)


def scenes_to_inputs(scenes, fov=360.0):
    """Queries and candidates from synthetic scenes, cropping streets down to ``fov``."""
    queries, candidates = [], []
    for s in scenes:
        q = Query(s.scene_id, as_image(s.street), s.w_gt, s.theta_gt, s.scene_id, fov=s.fov)
        queries.append(narrow_query(q, fov))
        candidates.append(Candidate(s.scene_id, s.overhead))
    return queries, candidates


def run_retrieval(scenes, config):
    """End-to-end retrieval over synthetic scenes; every scene is both query and candidate."""
    scenes = list(scenes)
    if not scenes:
        raise ValueError("no scenes")
    if config.pool_size is not None:
        scenes = scenes[: config.pool_size]
    queries, candidates = scenes_to_inputs(scenes, config.fov)
    height, width = scenes[0].panorama.shape[:2]
    return retrieve(queries, candidates, config, height, width)
