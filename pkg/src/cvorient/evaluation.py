"""Orientation and geo-localization metrics.

Orientation errors are absolute angle errors in degrees.  The 1-degree
histogram has 180 bins; bin ``i`` (1-based) counts errors in ``[i-1, i)``,
and an error of exactly 180 falls into bin 180.
"""

import csv
import io
import json
import math
import re
from dataclasses import asdict, dataclass

import numpy as np

from .angles import angle_diff

N_BINS = 180
MODES = ("all", "matched", "matched_to_all")
REPORT_VERSION = 1


@dataclass
class EvaluationRecord:
    query_id: int
    theta_gt: float
    theta_est: float
    rank: int
    query_tag: str = "default"
    top1_tag: str = "default"
    theta_est_top1: float = None

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"rank must be >= 1, got {self.rank}")

    @property
    def error(self):
        return angle_diff(self.theta_gt, self.theta_est)

    @property
    def matched(self):
        return self.rank == 1

    def to_dict(self):
        return asdict(self)


def records_from_dicts(items):
    return [EvaluationRecord(**item) for item in items]


def errors_of(records):
    return np.array([r.error for r in records], dtype=np.float64)


def histogram_from_errors(errors):
    errors = np.asarray(errors, dtype=np.float64)
    idx = np.clip(np.floor(errors).astype(np.intp), 0, N_BINS - 1)
    return np.bincount(idx, minlength=N_BINS).astype(np.int64)


def error_histogram(records):
    """180 counts of absolute orientation errors at 1-degree granularity."""
    return histogram_from_errors(errors_of(records))


def mean_angle_error(records):
    errs = errors_of(records)
    if errs.size == 0:
        raise ValueError("mean angle error of an empty record set")
    return math.fsum(errs) / errs.size


def median_angle_error(records):
    errs = errors_of(records)
    if errs.size == 0:
        raise ValueError("median angle error of an empty record set")
    return float(np.median(errs))


def rate_below(hist, x):
    """Fraction of errors in the first ``x`` one-degree bins."""
    if isinstance(x, bool) or int(x) != x or not 1 <= x <= N_BINS:
        raise ValueError(f"threshold must be an integer in [1, {N_BINS}], got {x!r}")
    hist = np.asarray(hist)
    total = hist.sum()
    if total == 0:
        raise ValueError("rate below threshold of an empty histogram")
    return float(hist[: int(x)].sum() / total)


def recall_at_k(records, k):
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not records:
        raise ValueError("recall of an empty record set")
    return sum(r.rank <= k for r in records) / len(records)


def hit_rate(records, tags=None):
    """Per query tag, the fraction of queries whose top-1 candidate carries the same tag."""
    if tags is not None:
        tags = set(tags)
        for r in records:
            for t in (r.query_tag, r.top1_tag):
                if t not in tags:
                    raise ValueError(f"record {r.query_id} has undeclared tag {t!r}")
    hits, totals = {}, {}
    for r in records:
        totals[r.query_tag] = totals.get(r.query_tag, 0) + 1
        hits[r.query_tag] = hits.get(r.query_tag, 0) + (r.top1_tag == r.query_tag)
    return {t: hits[t] / totals[t] for t in sorted(totals)}


# -- evaluation modes -----------------------------------------------------------

_RATE = re.compile(r"^r@(\d+)deg$")
_RECALL = re.compile(r"^recall@(\d+)$")


def _metric_parts(records, metric):
    """Numerator and denominator of a metric over ``records``."""
    if metric == "mean_error":
        return math.fsum(errors_of(records)), len(records)
    m = _RATE.match(metric)
    if m:
        hist = error_histogram(records)
        return int(hist[: int(m.group(1))].sum()), len(records)
    m = _RECALL.match(metric)
    if m:
        return sum(r.rank <= int(m.group(1)) for r in records), len(records)
    raise ValueError(f"unknown metric {metric!r} (use mean_error, r@<x>deg, recall@<k>)")


def evaluate_mode(records, mode, metric):
    """Evaluate ``metric`` over all records, matched (rank 1) records, or
    matched records normalized by the full record count.

    Metrics: ``"mean_error"``, ``"r@<x>deg"`` and ``"recall@<k>"``.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    records = list(records)
    if mode == "all":
        num, den = _metric_parts(records, metric)
    else:
        matched = [r for r in records if r.matched]
        if not matched:
            raise ValueError(f"mode {mode!r} has no matched records")
        num, den = _metric_parts(matched, metric)
        if mode == "matched_to_all":
            den = len(records)
    if den == 0:
        raise ValueError("metric over an empty record set")
    return num / den


# -- report ---------------------------------------------------------------------

REPORT_METRICS = ("mean_error", "recall@1", "r@2deg", "r@5deg")


def build_report(records, config=None, seed=None):
    records = list(records)
    hist = error_histogram(records)
    metrics = {}
    if records:
        metrics = {
            "mean_error": mean_angle_error(records),
            "median_error": median_angle_error(records),
            "r@1": recall_at_k(records, 1),
            "r@5": recall_at_k(records, 5),
            "r@2deg": rate_below(hist, 2),
            "r@5deg": rate_below(hist, 5),
        }
    modes = {}
    for mode in MODES:
        modes[mode] = {}
        for metric in REPORT_METRICS:
            try:
                modes[mode][metric] = evaluate_mode(records, mode, metric)
            except ValueError:
                modes[mode][metric] = None
    return {
        "version": REPORT_VERSION,
        "config": config or {},
        "seed": seed,
        "n_records": len(records),
        "n_matched": sum(r.matched for r in records),
        "metrics": metrics,
        "modes": modes,
        "hit_rates": hit_rate(records),
    }


def histogram_csv(hist):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["bin_upper_degree", "count"])
    for i, count in enumerate(hist, start=1):
        writer.writerow([i, int(count)])
    return buf.getvalue()


def emit_report(records, report_path, histogram_path, config=None, seed=None):
    """Write the JSON report and the 180-row histogram CSV; returns the report dict."""
    report = build_report(records, config, seed)
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(histogram_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(histogram_csv(error_histogram(records)))
    return report
