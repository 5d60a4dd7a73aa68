"""Brute-force offline ground truth.

Everything here rescans the full dataset, so it only makes sense at desk
scale; it exists to verify what the streaming sketch claims.  All comparisons
are plain 64-bit float ``>=`` against thresholds built with the same
association order the sketch uses, so a sketch output re-checked here never
fails on arithmetic noise under infinite tau.
"""

from __future__ import annotations

import math

import numpy as np

from . import metric as metrics
from .data import Dataset, Point
from .errors import ContractViolation
from .sketch import HacConfig, Output


def _point_distances(data: Dataset, p: Point, metric: metrics.MetricSpec) -> np.ndarray:
    return metrics.distances(metric, data.features, p.x, data.positions, p.pos)


def is_dense(
    data: Dataset,
    p: Point,
    r: float,
    f: float,
    metric: metrics.MetricSpec,
    tau: float = math.inf,
    at_time: float | None = None,
) -> bool:
    """True iff at least a fraction f of the dataset's weight lies within r of p."""
    if len(data) == 0:
        raise ContractViolation("dataset is empty")
    if r < 0:
        raise ContractViolation("radius must be non-negative")
    if not (0.0 < f <= 1.0):
        raise ContractViolation("frequency must be in (0, 1]")
    d = _point_distances(data, p, metric)
    w = data.weights(tau, at_time)
    return float(w[d <= r].sum()) >= f * float(w.sum())


def r_f(
    data: Dataset,
    p: Point,
    f: float,
    metric: metrics.MetricSpec,
    tau: float = math.inf,
    at_time: float | None = None,
) -> float:
    """Smallest r making p (r, f)-dense: the weighted f-quantile of distances
    from p, with the closed `>=` threshold convention."""
    if len(data) == 0:
        raise ContractViolation("dataset is empty")
    if not (0.0 < f <= 1.0):
        raise ContractViolation("frequency must be in (0, 1]")
    d = _point_distances(data, p, metric)
    w = data.weights(tau, at_time)
    order = np.argsort(d, kind="stable")
    cum = np.cumsum(w[order])
    target = f * float(cum[-1])
    idx = int(np.searchsorted(cum, target, side="left"))
    if idx >= len(data):  # guards float overshoot when f == 1
        idx = len(data) - 1
    return float(d[order][idx])


def verify_output(
    data: Dataset,
    out: Output,
    config: HacConfig,
    f: float,
    query_time: float | None = None,
) -> bool:
    """Deterministic admissibility: the output's ball must genuinely hold at
    least (1 - epsilon) * f of the prefix weight it was emitted from."""
    if query_time is None:
        query_time = out.query_time
    return is_dense(
        data,
        out.point,
        out.radius,
        (1.0 - config.epsilon) * f,
        config.metric,
        config.tau,
        query_time,
    )


def euclidean_self_distances(feats: np.ndarray) -> np.ndarray:
    """All-pairs euclidean distances via the inner-product identity.

    Orders of magnitude faster than row-wise scans, at the cost of a little
    cancellation noise near zero; use it for bulk statistics, not for the
    exact admissibility checks."""
    sq = (feats * feats).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (feats @ feats.T)
    np.maximum(d2, 0.0, out=d2)
    return np.sqrt(d2, out=d2)


def min_distance_to_outputs(
    data: Dataset, outputs: list[Output], metric: metrics.MetricSpec
) -> np.ndarray:
    """Per dataset point, distance to the nearest output (inf when none)."""
    best = np.full(len(data), np.inf)
    for o in outputs:
        d = _point_distances(data, o.point, metric)
        np.minimum(best, d, out=best)
    return best


def coverage_stats(
    data: Dataset,
    outputs: list[Output],
    f: float,
    r: float,
    epsilon: float,
    metric: metrics.MetricSpec,
    tau: float = math.inf,
    at_time: float | None = None,
) -> tuple[float, float]:
    """(dense_covered, sparse_near) fractions for a completed run.

    dense_covered: share of (r, f)-dense dataset points with an output within r.
    sparse_near:   share of (r, (1-epsilon)f)-sparse dataset points with an
                   output within r (lower is better).
    Empty classes count as perfectly covered / never near.
    """
    if len(data) == 0:
        raise ContractViolation("dataset is empty")
    w = data.weights(tau, at_time)
    total = float(w.sum())
    near_weight = np.empty(len(data))
    feats = data.features
    poss = data.positions
    for i, p in enumerate(data):
        d = metrics.distances(metric, feats, p.x, poss, p.pos)
        near_weight[i] = float(w[d <= r].sum())
    dense = near_weight >= f * total
    sparse = near_weight < ((1.0 - epsilon) * f) * total
    dmin = min_distance_to_outputs(data, outputs, metric)
    covered = dmin <= r
    dense_covered = float(covered[dense].mean()) if dense.any() else 1.0
    sparse_near = float(covered[sparse].mean()) if sparse.any() else 0.0
    return dense_covered, sparse_near
