"""Two-timescale appear/disappear tracking with human attribution.

The object detection stream feeds two sketches sharing one composite metric:
a short-timescale one whose dense regions track what is *currently* present,
and a long-timescale one that identifies stable furniture-like regions.
Every ``step`` seconds the short sketch is queried; regions that appear or
disappear between consecutive snapshots (and are not long-timescale dense)
are attributed to the distinct faces seen on the same camera during the
window [t - 2*tau_s, t - tau_s], splitting one unit of credit equally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import metric as metrics
from .data import Dataset, Point
from .errors import ContractViolation, FormatError
from .postprocess import dedup_threshold
from .sketch import HacConfig, Output, Sketch, _freq_order


@dataclass
class TrackerConfig:
    tau_s: float = 10.0
    tau_l: float = math.inf
    f: float = 0.025
    step: float = 10.0
    match_radius: float = 1.0
    metric: metrics.MetricSpec = field(
        default_factory=lambda: metrics.ChebyshevComposite(feature_scale=0.5, position_scale=1.0)
    )
    feature_threshold: float = 0.5
    face_threshold: float = 0.5
    epsilon: float = 0.5
    delta: float = 0.5
    suppress_stable: bool = True
    extra_steps: int = 2
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.tau_s < self.tau_l):
            raise ContractViolation("need 0 < tau_s < tau_l")
        if not self.step > 0:
            raise ContractViolation("step must be positive")
        if not (0.0 < self.f <= 1.0):
            raise ContractViolation("f must lie in (0, 1]")

    def to_dict(self) -> dict:
        return {
            "tau_s": self.tau_s,
            "tau_l": "inf" if math.isinf(self.tau_l) else self.tau_l,
            "f": self.f,
            "step": self.step,
            "match_radius": self.match_radius,
            "metric": metrics.metric_to_dict(self.metric),
            "feature_threshold": self.feature_threshold,
            "face_threshold": self.face_threshold,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "suppress_stable": self.suppress_stable,
            "extra_steps": self.extra_steps,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrackerConfig":
        allowed = {
            "tau_s", "tau_l", "f", "step", "match_radius", "metric",
            "feature_threshold", "face_threshold", "epsilon", "delta",
            "suppress_stable", "extra_steps", "seed",
        }
        unknown = set(d) - allowed
        if unknown:
            raise FormatError(f"unknown tracker fields: {sorted(unknown)}")
        kwargs = dict(d)
        tau_l = kwargs.get("tau_l", "inf")
        kwargs["tau_l"] = math.inf if tau_l in ("inf", None) else float(tau_l)
        if "metric" in kwargs:
            kwargs["metric"] = metrics.metric_from_dict(kwargs["metric"])
        return cls(**kwargs)


@dataclass(frozen=True)
class InteractionRecord:
    """One (object, human) pairing produced by an appear/disappear event.

    score is 1 / (number of distinct faces present in the attribution
    window), so each attributed event distributes exactly one unit of credit.
    """

    object_feature: np.ndarray
    human_feature: np.ndarray
    score: float
    time: float
    position: np.ndarray | None
    kind: str  # "appeared" or "disappeared"

    def to_dict(self) -> dict:
        return {
            "t": self.time,
            "object_feature": self.object_feature.tolist(),
            "human_feature": self.human_feature.tolist(),
            "score": self.score,
            "position": None if self.position is None else self.position.tolist(),
            "kind": self.kind,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InteractionRecord":
        return cls(
            object_feature=np.asarray(d["object_feature"], dtype=np.float64),
            human_feature=np.asarray(d["human_feature"], dtype=np.float64),
            score=float(d["score"]),
            time=float(d["t"]),
            position=None if d.get("position") is None else np.asarray(d["position"]),
            kind=d.get("kind", "appeared"),
        )


def snapshot_diff(
    prev: Sequence[Output],
    cur: Sequence[Output],
    match_radius: float,
    metric: metrics.MetricSpec,
) -> tuple[list[Output], list[Output]]:
    """(appeared, disappeared) between two consecutive query snapshots.

    An output counts as matched when some output of the other snapshot lies
    within match_radius of it.
    """

    def unmatched(xs, ys):
        return [
            x
            for x in xs
            if all(metrics.distance(metric, x.point, y.point) > match_radius for y in ys)
        ]

    return unmatched(cur, prev), unmatched(prev, cur)


def _euclid(a: np.ndarray, b: np.ndarray) -> float:
    d = a - b
    return float(np.sqrt((d * d).sum()))


def attribute(
    event: Output,
    faces: Dataset,
    window: tuple[float, float],
    face_threshold: float,
    kind: str = "appeared",
) -> list[InteractionRecord]:
    """Split one unit of credit among the distinct faces present in the
    window on the event's camera (first position coordinate).

    Face identity is a greedy distance threshold, no clustering: a detection
    farther than face_threshold from every representative seen so far in the
    window opens a new identity.
    """
    lo, hi = window
    camera = None if event.point.pos is None else float(event.point.pos[0])
    reps: list[Point] = []
    if len(faces):
        times = faces.times
        for i in range(int(np.searchsorted(times, lo, "left")), int(np.searchsorted(times, hi, "right"))):
            p = faces[i]
            if camera is not None and (p.pos is None or float(p.pos[0]) != camera):
                continue
            if all(_euclid(p.x, r.x) > face_threshold for r in reps):
                reps.append(p)
    if not reps:
        return []
    score = 1.0 / len(reps)
    return [
        InteractionRecord(
            object_feature=event.point.x.copy(),
            human_feature=r.x.copy(),
            score=score,
            time=event.query_time,
            position=None if event.point.pos is None else event.point.pos.copy(),
            kind=kind,
        )
        for r in reps
    ]


def run_tracker(objects: Dataset, faces: Dataset, cfg: TrackerConfig) -> list[InteractionRecord]:
    """Feed the object stream through both sketches, diff snapshots every
    cfg.step, and attribute surviving events to co-present faces."""
    if len(objects) == 0:
        return []

    def sketch_for(tau: float, seed: int) -> Sketch:
        return Sketch(
            HacConfig(
                f0=cfg.f,
                epsilon=cfg.epsilon,
                delta=cfg.delta,
                r0=cfg.match_radius,
                gamma=2.0,
                c=0,
                tau=tau,
                metric=cfg.metric,
                seed=seed,
            )
        )

    short = sketch_for(cfg.tau_s, cfg.seed)
    long_ = sketch_for(cfg.tau_l, cfg.seed + 1)
    records: list[InteractionRecord] = []
    prev_snap: list[Output] = []
    next_q = (math.floor(objects[0].t / cfg.step) + 1) * cfg.step
    last_t = objects[-1].t

    def do_query(q: float) -> None:
        nonlocal prev_snap
        raw = short.query_dense(cfg.f, q)
        raw.sort(key=_freq_order)
        snap = dedup_threshold(raw, cfg.match_radius, cfg.metric)
        appeared, disappeared = snapshot_diff(prev_snap, snap, cfg.match_radius, cfg.metric)
        events = [("appeared", o) for o in appeared] + [("disappeared", o) for o in disappeared]
        if events and cfg.suppress_stable:
            stable = long_.query_dense(cfg.f, q)
            events = [
                (kind, o)
                for kind, o in events
                if all(
                    metrics.distance(cfg.metric, o.point, s.point) > cfg.match_radius
                    for s in stable
                )
            ]
        for kind, o in events:
            records.extend(
                attribute(o, faces, (q - 2.0 * cfg.tau_s, q - cfg.tau_s), cfg.face_threshold, kind)
            )
        prev_snap = snap

    for p in objects:
        while p.t > next_q:
            do_query(next_q)
            next_q += cfg.step
        short.process(p)
        long_.process(p)
    for _ in range(cfg.extra_steps + 1):
        do_query(next_q)
        next_q += cfg.step
    return records


def query_top_human(
    records: Sequence[InteractionRecord],
    object_query_feature: np.ndarray,
    human_prototypes: Mapping[str, np.ndarray],
    feature_threshold: float,
    face_threshold: float,
) -> list[tuple[str, float]]:
    """Rank humans by accumulated interaction score with the queried object.

    A record contributes its score to every prototype whose face distance is
    within face_threshold, provided the record's object feature is within
    feature_threshold of the query.  Ties rank the earlier first interaction
    higher.
    """
    q = np.asarray(object_query_feature, dtype=np.float64)
    scores: dict[str, float] = {}
    first_time: dict[str, float] = {}
    for rec in records:
        if _euclid(rec.object_feature, q) > feature_threshold:
            continue
        for name, proto in human_prototypes.items():
            if _euclid(rec.human_feature, np.asarray(proto, dtype=np.float64)) <= face_threshold:
                scores[name] = scores.get(name, 0.0) + rec.score
                first_time.setdefault(name, rec.time)
    return sorted(
        scores.items(), key=lambda kv: (-kv[1], first_time[kv[0]], kv[0])
    )
