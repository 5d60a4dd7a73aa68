"""Comparison methods and the top-n entity scoring harness."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import metric as metrics
from .data import Dataset, Point
from .datagen import NOISE_LABEL
from .errors import ContractViolation
from .sketch import Output


def random_sample(data: Dataset, k: int, seed: int) -> list[Point]:
    """Uniform sample of k points without replacement."""
    if k < 0:
        raise ContractViolation("k must be non-negative")
    if k > len(data):
        raise ContractViolation(f"cannot sample {k} points from {len(data)}")
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(data), size=k, replace=False)
    return [data[int(i)] for i in idx]


def maximal_independent_set(
    data: Dataset,
    r: float,
    seed: int,
    metric: metrics.MetricSpec | None = None,
) -> list[Point]:
    """Random-order greedy selection keeping points pairwise at least r apart.

    The result is maximal: every remaining point is within r of a kept one.
    """
    if not r > 0:
        raise ContractViolation("r must be positive")
    if len(data) == 0:
        return []
    metric = metric if metric is not None else metrics.Euclidean()
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(data))
    feats = data.features
    poss = data.positions
    kept_feat = np.empty((len(data), feats.shape[1]))
    kept_pos = np.empty((len(data), poss.shape[1])) if poss is not None else None
    kept: list[Point] = []
    for i in order:
        p = data[int(i)]
        if kept:
            kf = kept_feat[: len(kept)]
            kp = kept_pos[: len(kept)] if kept_pos is not None else None
            d = metrics.distances(metric, kf, p.x, kp, p.pos)
            if float(d.min()) < r:
                continue
        kept_feat[len(kept)] = p.x
        if kept_pos is not None:
            kept_pos[len(kept)] = p.pos
        kept.append(p)
    return kept


@dataclass(frozen=True)
class EvalReport:
    """How n requested outputs scored against the top-n ground-truth entities.

    found + wrong + duplicate + missing == n always.
    """

    n: int
    found: int
    wrong: int
    duplicate: int
    missing: int

    @property
    def found_fraction(self) -> float:
        return self.found / self.n if self.n else 0.0

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "found": self.found,
            "wrong": self.wrong,
            "duplicate": self.duplicate,
            "missing": self.missing,
        }


def top_entities(data: Dataset, n: int) -> list[str]:
    """The n most frequent non-noise labels."""
    counts: dict[str, int] = {}
    for label in data.labels:
        if label is not None and label != NOISE_LABEL:
            counts[label] = counts.get(label, 0) + 1
    return sorted(counts, key=lambda e: (-counts[e], e))[:n]


def eval_top_n(
    outputs: Sequence[Output | Point],
    data: Dataset,
    n: int,
    entity_match_threshold: float,
    metric: metrics.MetricSpec | None = None,
) -> EvalReport:
    """Score outputs against the top-n entities of a labeled dataset.

    Each output adopts the entity of its nearest labeled point, provided it
    is within the threshold; noise matches and far outputs are wrong, repeats
    of an already-found entity are duplicates, and a shortfall of outputs is
    missing.
    """
    if n < 1:
        raise ContractViolation("n must be positive")
    metric = metric if metric is not None else metrics.Euclidean()
    points = [o.point if isinstance(o, Output) else o for o in outputs][:n]
    wanted = set(top_entities(data, n))
    feats = data.features
    poss = data.positions
    labels = data.labels
    found: set[str] = set()
    wrong = duplicate = 0
    for p in points:
        d = metrics.distances(metric, feats, p.x, poss, p.pos)
        i = int(d.argmin())
        entity = labels[i]
        if float(d[i]) > entity_match_threshold or entity is None or entity == NOISE_LABEL:
            wrong += 1
        elif entity not in wanted:
            wrong += 1
        elif entity in found:
            duplicate += 1
        else:
            found.add(entity)
    return EvalReport(
        n=n,
        found=len(found),
        wrong=wrong,
        duplicate=duplicate,
        missing=n - len(points),
    )
