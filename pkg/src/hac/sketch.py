"""The hop-and-count sketch.

A sketch keeps ``m`` independent sample slots.  When a point arrives, every
slot independently "hops" to it with probability ``1 / W`` (``W`` being the
decayed total stream weight, which is just the point count when ``tau`` is
infinite), resetting its counters; then the slot counts the point in the
radius bucket covering the distance from its held sample.  Querying returns,
per slot, the smallest radius at which the accumulated count clears the
acceptance threshold ``(1 - epsilon) * f * W``.

Memory is ``m * (c + 1)`` counter cells plus ``m`` held points, independent of
stream length.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import metric as metrics
from .data import Point
from .errors import ContractViolation, FormatError

SNAPSHOT_MAGIC = "hac-snapshot"
SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class HacConfig:
    """All sketch parameters.

    f0       smallest queryable frequency; the slot count is sized for it
    epsilon  acceptance-threshold slack, in (0, 1]
    delta    failure probability knob, in (0, 1)
    r0       smallest radius bucket
    gamma    radius growth factor (> 1)
    c        number of extra buckets, so r_max = r0 * gamma**c
    tau      decay timescale in timestamp units; math.inf disables decay
    metric   distance spec (see hac.metric)
    seed     RNG seed; every run with the same seed and stream is identical
    """

    f0: float
    epsilon: float = 0.5
    delta: float = 0.5
    r0: float = 1.0
    gamma: float = 2.0
    c: int = 0
    tau: float = math.inf
    metric: metrics.MetricSpec = field(default_factory=metrics.Euclidean)
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.f0 <= 1.0):
            raise ContractViolation("config field f0 must be in (0, 1]")
        if not (0.0 < self.epsilon <= 1.0):
            raise ContractViolation("config field epsilon must be in (0, 1]")
        if not (0.0 < self.delta < 1.0):
            raise ContractViolation("config field delta must be in (0, 1)")
        if not self.r0 > 0.0:
            raise ContractViolation("config field r0 must be positive")
        if not self.gamma > 1.0:
            raise ContractViolation("config field gamma must be > 1")
        if not (isinstance(self.c, int) and self.c >= 0):
            raise ContractViolation("config field c must be a non-negative integer")
        if not (self.tau > 0.0):
            raise ContractViolation("config field tau must be positive or math.inf")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise ContractViolation("config field seed must be a 64-bit unsigned integer")

    @property
    def m(self) -> int:
        """Slot count: ceil(ln(1/(f0*delta)) / (f0*epsilon)), at least 1."""
        return max(1, math.ceil(math.log(1.0 / (self.f0 * self.delta)) / (self.f0 * self.epsilon)))

    @property
    def radii(self) -> np.ndarray:
        """Bucket radii r0 * gamma**k for k in 0..c."""
        return self.r0 * self.gamma ** np.arange(self.c + 1)

    @property
    def r_max(self) -> float:
        return float(self.radii[-1])

    def to_dict(self) -> dict:
        return {
            "f0": self.f0,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "r0": self.r0,
            "gamma": self.gamma,
            "c": self.c,
            "tau": "inf" if math.isinf(self.tau) else self.tau,
            "metric": metrics.metric_to_dict(self.metric),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HacConfig":
        allowed = {"f0", "epsilon", "delta", "r0", "gamma", "c", "tau", "metric", "seed"}
        unknown = set(d) - allowed
        if unknown:
            raise FormatError(f"unknown config fields: {sorted(unknown)}")
        if "f0" not in d:
            raise FormatError("config needs an 'f0' field")
        tau = d.get("tau", "inf")
        if tau in ("inf", None):
            tau = math.inf
        return cls(
            f0=float(d["f0"]),
            epsilon=float(d.get("epsilon", 0.5)),
            delta=float(d.get("delta", 0.5)),
            r0=float(d.get("r0", 1.0)),
            gamma=float(d.get("gamma", 2.0)),
            c=int(d.get("c", 0)),
            tau=float(tau),
            metric=metrics.metric_from_dict(d.get("metric", {"kind": "euclidean"})),
            seed=int(d.get("seed", 0)),
        )


def bucket_index(config: HacConfig, d: float) -> int | None:
    """Smallest k with d <= r0 * gamma**k, i.e. max(0, ceil(log_gamma(d/r0))).

    Returns None when the distance falls outside the largest bucket.
    """
    if d < 0:
        raise ContractViolation("distances are non-negative")
    k = int(np.searchsorted(config.radii, d, side="left"))
    return k if k <= config.c else None


@dataclass(frozen=True)
class Output:
    """One emitted dense-region representative."""

    point: Point
    radius_index: int
    radius: float
    freq_estimate: float
    slot_id: int
    query_time: float

    def to_dict(self) -> dict:
        d = {"t": self.point.t, "x": self.point.x.tolist()}
        if self.point.pos is not None:
            d["pos"] = self.point.pos.tolist()
        d.update(
            radius_index=self.radius_index,
            radius=self.radius,
            freq=self.freq_estimate,
            slot=self.slot_id,
            query_time=self.query_time,
        )
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Output":
        return cls(
            point=Point(t=d["t"], x=d["x"], pos=d.get("pos")),
            radius_index=int(d["radius_index"]),
            radius=float(d["radius"]),
            freq_estimate=float(d["freq"]),
            slot_id=int(d["slot"]),
            query_time=float(d["query_time"]),
        )


class Sketch:
    """Streaming state: m sample slots with radius-bucketed decayed counters.

    Exactly one logical writer may advance the stream via process(); queries
    are pure and expect a quiescent sketch (no in-flight process call).  Slots
    are fully independent, so queries may be partitioned across workers with
    the ``slots`` argument and recombined with merge_outputs().
    """

    def __init__(self, config: HacConfig):
        self.config = config
        self.m = config.m
        self.t_count = 0
        self.total_weight = 0.0
        self.last_arrival: float | None = None
        self._radii = config.radii
        self._radii_list = self._radii.tolist()
        self._finite_tau = not math.isinf(config.tau)
        self._needs_pos = metrics.requires_position(config.metric)
        self._rng = np.random.default_rng(config.seed)
        self._feat: np.ndarray | None = None
        self._pos: np.ndarray | None = None
        self._hop_time = np.zeros(self.m)
        self._last_decay = np.zeros(self.m)
        self._counters = np.zeros((self.m, config.c + 1))
        self._force_vectorized = False  # test seam for the m == 1 fast path

    # -- processing ---------------------------------------------------------

    def process(self, point: Point, arrival_time: float | None = None) -> None:
        """Feed one point; timestamps must be non-decreasing."""
        t = point.t if arrival_time is None else float(arrival_time)
        if self.last_arrival is not None and t < self.last_arrival:
            raise ContractViolation(
                f"arrival time {t} is before the last arrival {self.last_arrival}"
            )
        if self._needs_pos and point.pos is None:
            raise ContractViolation("composite metric requires a position block on every point")
        x = point.x
        if self._feat is None:
            self._feat = np.zeros((self.m, x.shape[0]))
            if point.pos is not None:
                self._pos = np.zeros((self.m, point.pos.shape[0]))
        elif x.shape[0] != self._feat.shape[1]:
            raise ContractViolation(
                f"feature dimension mismatch: {x.shape[0]} vs {self._feat.shape[1]}"
            )
        if self._pos is not None:
            if point.pos is None:
                raise ContractViolation("stream mixes points with and without position blocks")
            if point.pos.shape[0] != self._pos.shape[1]:
                raise ContractViolation(
                    f"position dimension mismatch: {point.pos.shape[0]} vs {self._pos.shape[1]}"
                )
        if self.t_count and self._finite_tau:
            dt = t - self.last_arrival
            if dt:
                self.total_weight *= math.exp(-dt / self.config.tau)
        self.total_weight += 1.0
        self.t_count += 1
        self.last_arrival = t
        p_hop = 1.0 / self.total_weight

        if self.m == 1 and not self._force_vectorized:
            self._process_single(point, x, t, p_hop)
            return

        u = self._rng.random(self.m)
        hop = u < p_hop
        if hop.any():
            self._feat[hop] = x
            if self._pos is not None:
                self._pos[hop] = point.pos
            self._hop_time[hop] = t
            self._counters[hop] = 0.0
            self._last_decay[hop] = t
        d = metrics.distances(self.config.metric, self._feat, x, self._pos, point.pos)
        k = np.searchsorted(self._radii, d, side="left")
        inside = k <= self.config.c
        rows = np.flatnonzero(inside)
        if rows.size:
            if self._finite_tau:
                fac = np.exp(-(t - self._last_decay[rows]) / self.config.tau)
                self._counters[rows] *= fac[:, None]
                self._last_decay[rows] = t
            self._counters[rows, k[rows]] += 1.0

    def _process_single(self, point: Point, x: np.ndarray, t: float, p_hop: float) -> None:
        # Same semantics as the vectorized path (identical RNG consumption and
        # float arithmetic), specialized for m == 1 where per-call numpy
        # overhead dominates.
        if self._rng.random() < p_hop:
            self._feat[0] = x
            if self._pos is not None:
                self._pos[0] = point.pos
            self._hop_time[0] = t
            self._counters[0] = 0.0
            self._last_decay[0] = t
        d = float(metrics.distances(self.config.metric, self._feat, x, self._pos, point.pos)[0])
        k = bisect_left(self._radii_list, d)
        if k <= self.config.c:
            if self._finite_tau:
                dt = t - self._last_decay[0]
                if dt:
                    self._counters[0] *= np.exp(-dt / self.config.tau)
                self._last_decay[0] = t
            self._counters[0, k] += 1.0

    # -- query helpers ------------------------------------------------------

    def weight_at(self, query_time: float | None = None) -> float:
        """Decayed total stream weight W at the given time."""
        q = self._resolve_query_time(query_time)
        if self.t_count == 0:
            return 0.0
        if not self._finite_tau:
            return self.total_weight
        return self.total_weight * math.exp(-(q - self.last_arrival) / self.config.tau)

    def _resolve_query_time(self, query_time: float | None) -> float:
        if query_time is None:
            return self.last_arrival if self.last_arrival is not None else 0.0
        q = float(query_time)
        if self.last_arrival is not None and q < self.last_arrival:
            raise ContractViolation(
                f"query time {q} is before the last arrival {self.last_arrival}"
            )
        return q

    def _cumulative_at(self, q: float, rows: np.ndarray) -> np.ndarray:
        """Per-slot cumulative decayed counts across buckets, at time q."""
        cum = np.cumsum(self._counters[rows], axis=1)
        if self._finite_tau:
            fac = np.exp(-(q - self._last_decay[rows]) / self.config.tau)
            cum = cum * fac[:, None]
        return cum

    def _slot_rows(self, slots: Sequence[int] | None) -> np.ndarray:
        if slots is None:
            return np.arange(self.m)
        rows = np.asarray(sorted(set(int(s) for s in slots)), dtype=np.int64)
        if rows.size and (rows[0] < 0 or rows[-1] >= self.m):
            raise ContractViolation(f"slot ids must lie in [0, {self.m})")
        return rows

    def _held_point(self, slot: int) -> Point:
        pos = self._pos[slot].copy() if self._pos is not None else None
        return Point(t=float(self._hop_time[slot]), x=self._feat[slot].copy(), pos=pos)

    # -- queries ------------------------------------------------------------

    def query_dense(
        self,
        f: float,
        query_time: float | None = None,
        slots: Sequence[int] | None = None,
    ) -> list[Output]:
        """All slots dense at frequency f: one output per qualifying slot,
        carrying the smallest bucket whose cumulative count clears the
        acceptance threshold."""
        if f < self.config.f0:
            raise ContractViolation(
                f"query frequency {f} is below f0={self.config.f0}; "
                "guarantees only hold down to f0"
            )
        if f > 1.0:
            raise ContractViolation("query frequency must be at most 1")
        q = self._resolve_query_time(query_time)
        if self.t_count == 0 or self.t_count * f < 1.0:
            return []
        rows = self._slot_rows(slots)
        if not rows.size:
            return []
        w = self.weight_at(q)
        threshold = ((1.0 - self.config.epsilon) * f) * w
        cum = self._cumulative_at(q, rows)
        dense = cum >= threshold
        hit = dense.any(axis=1)
        first = dense.argmax(axis=1)
        outputs = []
        for i in np.flatnonzero(hit):
            slot = int(rows[i])
            k = int(first[i])
            outputs.append(
                Output(
                    point=self._held_point(slot),
                    radius_index=k,
                    radius=float(self._radii[k]),
                    freq_estimate=float(cum[i, k] / w),
                    slot_id=slot,
                    query_time=q,
                )
            )
        return outputs

    def query_top_k_by_frequency(
        self,
        radius_index: int,
        k: int | None,
        query_time: float | None = None,
        slots: Sequence[int] | None = None,
        dedup: Callable[[list[Output]], list[Output]] | None = None,
    ) -> list[Output]:
        """One candidate per slot at a fixed radius, ranked by estimated
        frequency (ties: earlier hop, then slot id).  ``k=None`` keeps all
        candidates; an optional dedup filter runs before truncation."""
        if not (0 <= radius_index <= self.config.c):
            raise ContractViolation(f"radius_index must lie in [0, {self.config.c}]")
        if k is not None and k < 1:
            raise ContractViolation("k must be a positive integer")
        q = self._resolve_query_time(query_time)
        if self.t_count == 0:
            return []
        rows = self._slot_rows(slots)
        if not rows.size:
            return []
        w = self.weight_at(q)
        cum = self._cumulative_at(q, rows)[:, radius_index]
        candidates = [
            Output(
                point=self._held_point(int(slot)),
                radius_index=radius_index,
                radius=float(self._radii[radius_index]),
                freq_estimate=float(cum[i] / w),
                slot_id=int(slot),
                query_time=q,
            )
            for i, slot in enumerate(rows)
        ]
        candidates.sort(key=_freq_order)
        if dedup is not None:
            candidates = dedup(candidates)
        return candidates if k is None else candidates[:k]

    def query_top_k_by_radius(
        self,
        f: float,
        k: int | None,
        query_time: float | None = None,
        slots: Sequence[int] | None = None,
        dedup: Callable[[list[Output]], list[Output]] | None = None,
    ) -> list[Output]:
        """Dense-at-f outputs sorted from tightest to widest radius
        (ties: higher frequency first)."""
        if k is not None and k < 1:
            raise ContractViolation("k must be a positive integer")
        outputs = self.query_dense(f, query_time, slots)
        outputs.sort(key=_radius_order)
        if dedup is not None:
            outputs = dedup(outputs)
        return outputs if k is None else outputs[:k]

    # -- introspection ------------------------------------------------------

    @property
    def memory_cells(self) -> int:
        return self.m * (self.config.c + 1)

    def slot_state(self, slot: int) -> dict:
        """Debug/test view of one slot."""
        return {
            "held": self._held_point(slot) if self._feat is not None else None,
            "hop_time": float(self._hop_time[slot]),
            "counters": self._counters[slot].copy(),
            "last_decay": float(self._last_decay[slot]),
        }


def _freq_order(o: Output):
    return (-o.freq_estimate, o.point.t, o.slot_id)


def _radius_order(o: Output):
    return (o.radius_index, -o.freq_estimate, o.slot_id)


_MERGE_ORDERS = {
    "dense": lambda o: o.slot_id,
    "topk-freq": _freq_order,
    "topk-radius": _radius_order,
}


def hop_probability(sketch: Sketch, arrival_time: float) -> float:
    """Probability that a slot hops to a point arriving at the given time."""
    if sketch.last_arrival is not None and arrival_time < sketch.last_arrival:
        raise ContractViolation(
            f"arrival time {arrival_time} is before the last arrival {sketch.last_arrival}"
        )
    w = sketch.total_weight
    if sketch.t_count and not math.isinf(sketch.config.tau):
        w *= math.exp(-(arrival_time - sketch.last_arrival) / sketch.config.tau)
    return 1.0 / (w + 1.0)


def merge_outputs(
    parts: Sequence[Sequence[Output]],
    mode: str = "dense",
    k: int | None = None,
) -> list[Output]:
    """Merge query results from disjoint slot partitions of one sketch.

    All parts must come from the same query time; the concatenation is
    re-sorted in the originating query's order, so the result is identical to
    the unpartitioned query.
    """
    if mode not in _MERGE_ORDERS:
        raise ContractViolation(f"unknown merge mode {mode!r}; choose from {sorted(_MERGE_ORDERS)}")
    merged = [o for part in parts for o in part]
    if merged:
        q0 = merged[0].query_time
        if any(o.query_time != q0 for o in merged):
            raise ContractViolation("cannot merge outputs from different query times")
        seen = set()
        for o in merged:
            if o.slot_id in seen:
                raise ContractViolation("slot partitions overlap: duplicate slot id in parts")
            seen.add(o.slot_id)
    merged.sort(key=_MERGE_ORDERS[mode])
    return merged if k is None else merged[:k]


# -- snapshots ---------------------------------------------------------------


def to_snapshot_dict(sketch: Sketch) -> dict:
    """Versioned, bit-exact JSON-safe dump of the full sketch state."""
    return {
        "magic": SNAPSHOT_MAGIC,
        "version": SNAPSHOT_VERSION,
        "config": sketch.config.to_dict(),
        "t_count": sketch.t_count,
        "total_weight": sketch.total_weight,
        "last_arrival": sketch.last_arrival,
        "feat": None if sketch._feat is None else sketch._feat.tolist(),
        "pos": None if sketch._pos is None else sketch._pos.tolist(),
        "hop_time": sketch._hop_time.tolist(),
        "last_decay": sketch._last_decay.tolist(),
        "counters": sketch._counters.tolist(),
        "rng_state": sketch._rng.bit_generator.state,
    }


def from_snapshot_dict(d: dict) -> Sketch:
    if not isinstance(d, dict) or d.get("magic") != SNAPSHOT_MAGIC:
        raise FormatError("not a sketch snapshot (bad magic)")
    if d.get("version") != SNAPSHOT_VERSION:
        raise FormatError(
            f"snapshot version {d.get('version')!r} is not supported "
            f"(expected {SNAPSHOT_VERSION})"
        )
    sketch = Sketch(HacConfig.from_dict(d["config"]))
    sketch.t_count = int(d["t_count"])
    sketch.total_weight = float(d["total_weight"])
    sketch.last_arrival = None if d["last_arrival"] is None else float(d["last_arrival"])
    if d["feat"] is not None:
        sketch._feat = np.array(d["feat"], dtype=np.float64)
    if d["pos"] is not None:
        sketch._pos = np.array(d["pos"], dtype=np.float64)
    sketch._hop_time = np.array(d["hop_time"], dtype=np.float64)
    sketch._last_decay = np.array(d["last_decay"], dtype=np.float64)
    sketch._counters = np.array(d["counters"], dtype=np.float64)
    if sketch._counters.shape != (sketch.m, sketch.config.c + 1):
        raise FormatError("snapshot counter shape does not match its config")
    sketch._rng.bit_generator.state = d["rng_state"]
    return sketch


def save_snapshot(sketch: Sketch, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(to_snapshot_dict(sketch), fp)
        fp.write("\n")


def load_snapshot(path: str) -> Sketch:
    with open(path, "r", encoding="utf-8") as fp:
        try:
            d = json.load(fp)
        except json.JSONDecodeError as exc:
            raise FormatError(f"snapshot is not valid JSON: {exc.msg}") from exc
    return from_snapshot_dict(d)
