"""Seeded synthetic stream generators.

Two families:

* Gaussian mixtures plus uniform box noise, the workhorse for density and
  recovery experiments.  Cluster means default to a regular simplex sized so
  the typical between-cluster point distance is ``separation_ratio`` times the
  typical within-cluster distance.
* A scripted household: objects sitting at tabletop locations, humans moving
  them according to a schedule, plus face detections and spurious noise.  The
  feature geometry is an idealization of embedding spaces; real embeddings are
  messier.

Everything is deterministic per seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import Dataset, Point
from .errors import ContractViolation

# -- gaussian mixtures --------------------------------------------------------

NOISE_LABEL = "noise"


@dataclass
class MixtureSpec:
    k: int
    dims: int
    n: int
    weights: Sequence[float]
    sigma: float | Sequence[float] = 1.0
    noise_fraction: float = 0.0
    means: np.ndarray | None = None
    separation_ratio: float = 1.3
    noise_inflation: float = 3.0
    dt: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.dims < 1 or self.n < 1:
            raise ContractViolation("k, dims and n must all be at least 1")
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (self.k,) or np.any(w <= 0):
            raise ContractViolation("weights must be k strictly positive frequencies")
        if not (0.0 <= self.noise_fraction < 1.0):
            raise ContractViolation("noise_fraction must lie in [0, 1)")
        if abs(float(w.sum()) + self.noise_fraction - 1.0) > 1e-6:
            raise ContractViolation("weights plus noise_fraction must sum to 1")
        sig = np.broadcast_to(np.asarray(self.sigma, dtype=np.float64), (self.k,)).copy()
        if np.any(sig < 0):
            raise ContractViolation("sigma must be non-negative")
        self.sigma = sig
        self.weights = w
        if self.means is not None:
            self.means = np.asarray(self.means, dtype=np.float64)
            if self.means.shape != (self.k, self.dims):
                raise ContractViolation("means must have shape (k, dims)")
        elif self.k > self.dims:
            raise ContractViolation("auto-placed means need dims >= k")
        if self.means is None and not self.separation_ratio > 1.0:
            raise ContractViolation("separation_ratio must exceed 1")


def simplex_means(k: int, dims: int, pairwise_distance: float) -> np.ndarray:
    """k cluster means, all pairs exactly pairwise_distance apart."""
    if k > dims:
        raise ContractViolation("simplex placement needs dims >= k")
    means = np.zeros((k, dims))
    scale = pairwise_distance / math.sqrt(2.0)
    means[np.arange(k), np.arange(k)] = scale
    return means


def _auto_means(spec: MixtureSpec) -> np.ndarray:
    # Typical within-cluster point distance is sigma * sqrt(2 d); a mean
    # separation of sigma * sqrt(2 d (rho^2 - 1)) makes the between-cluster
    # point distance rho times that.
    sigma = float(np.mean(spec.sigma))
    if sigma == 0.0:
        sigma = 1.0
    delta = sigma * math.sqrt(2.0 * spec.dims * (spec.separation_ratio**2 - 1.0))
    return simplex_means(spec.k, spec.dims, delta)


def gaussian_mixture_stream(spec: MixtureSpec) -> Dataset:
    """n labeled points in random arrival order, timestamps dt apart."""
    rng = np.random.default_rng(spec.seed)
    means = spec.means if spec.means is not None else _auto_means(spec)
    probs = np.append(np.asarray(spec.weights, dtype=np.float64), spec.noise_fraction)
    probs = probs / probs.sum()
    comp = rng.choice(spec.k + 1, size=spec.n, p=probs)
    means_ext = np.vstack([means, np.zeros(spec.dims)])
    sigma_ext = np.append(spec.sigma, 0.0)
    x = means_ext[comp] + rng.standard_normal((spec.n, spec.dims)) * sigma_ext[comp, None]
    noise_rows = np.flatnonzero(comp == spec.k)
    if noise_rows.size:
        pad = spec.noise_inflation * float(spec.sigma.max(initial=0.0))
        lo = means.min(axis=0) - pad
        hi = means.max(axis=0) + pad
        x[noise_rows] = rng.uniform(lo, hi, (noise_rows.size, spec.dims))
    points = [
        Point(
            t=i * spec.dt,
            x=x[i],
            label=NOISE_LABEL if comp[i] == spec.k else f"c{comp[i]}",
        )
        for i in range(spec.n)
    ]
    return Dataset(points)


def characters_profile(
    seed: int = 0,
    n: int = 5000,
    dims: int = 128,
    intra_distance: float = 0.30,
    inter_distance: float = 0.80,
) -> MixtureSpec:
    """A high-dimensional stream shaped like a TV season's face embeddings:
    one dominant entity, four mid-frequency ones, three minor ones, and a
    large share of scattered noise.

    The raw shares (0.27, 4x0.06, 3x0.04, noise 0.47) describe overlapping
    screen-time tallies and sum to 1.10; they are normalized here so the
    relative shape survives while the mixture stays a probability vector.
    """
    raw = np.array([0.27, 0.06, 0.06, 0.06, 0.06, 0.04, 0.04, 0.04])
    raw_noise = 0.47
    total = raw.sum() + raw_noise
    sigma = intra_distance / math.sqrt(2.0 * dims)
    if inter_distance <= intra_distance:
        raise ContractViolation("inter_distance must exceed intra_distance")
    delta = math.sqrt(inter_distance**2 - intra_distance**2)
    return MixtureSpec(
        k=8,
        dims=dims,
        n=n,
        weights=(raw / total).tolist(),
        sigma=sigma,
        noise_fraction=raw_noise / total,
        means=simplex_means(8, dims, delta),
        seed=seed,
    )


# -- household streams --------------------------------------------------------


@dataclass(frozen=True)
class MoveEvent:
    """One scripted pick-and-place: the object leaves from_location at `time`
    and is at to_location from then on."""

    time: float
    human: int
    obj: int
    from_location: int
    to_location: int


@dataclass
class HouseholdSpec:
    schedule: list[MoveEvent]
    num_objects: int = 10
    num_locations: int = 20
    num_humans: int = 8
    num_tables: int = 4
    noise_rate: float = 100.0  # spurious detections per step
    step_seconds: float = 20.0
    feature_noise_sigma: float = 0.05
    feature_dim: int = 16
    face_dim: int = 16
    face_miss_rate: float = 0.5
    loiter_prob: float = 0.3
    frames_per_phase: int = 10
    camera_spacing: float = 50.0
    location_spacing: float = 2.0
    tail_steps: int = 2
    twin_pair: tuple[int, int] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.num_locations < self.num_objects:
            raise ContractViolation("need at least one location per object")
        if not (0.0 <= self.face_miss_rate < 1.0):
            raise ContractViolation("face_miss_rate must lie in [0, 1)")
        times = [e.time for e in self.schedule]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ContractViolation("schedule times must be non-decreasing")


def make_household_schedule(
    num_objects: int = 10,
    num_humans: int = 8,
    num_locations: int = 20,
    num_action_steps: int = 28,
    step_seconds: float = 20.0,
    untouched: Sequence[int] = (9,),
    moves_low: int = 4,
    moves_high: int = 7,
    primary_share: float = 0.7,
    seed: int = 0,
) -> list[MoveEvent]:
    """A random but consistent script: each touched object gets a primary
    human doing most of its moves, moves stay spread over the action steps,
    and an object is always picked up from wherever it was last placed."""
    rng = np.random.default_rng(seed)
    touched = [o for o in range(num_objects) if o not in set(untouched)]
    tokens: list[tuple[int, int]] = []
    for obj in touched:
        primary = obj % num_humans
        n_moves = int(rng.integers(moves_low, moves_high + 1))
        n_primary = math.ceil(primary_share * n_moves)
        others = [h for h in range(num_humans) if h != primary]
        actors = [primary] * n_primary + [
            int(rng.choice(others)) for _ in range(n_moves - n_primary)
        ]
        tokens.extend((obj, h) for h in actors)
    order = rng.permutation(len(tokens))
    tokens = [tokens[i] for i in order]

    current = {obj: obj for obj in range(num_objects)}
    occupied = set(current.values())
    last_step_of_obj: dict[int, int] = {}
    events: list[MoveEvent] = []
    for i, (obj, human) in enumerate(tokens):
        step = 1 + (i * num_action_steps) // max(1, len(tokens))
        step = max(step, last_step_of_obj.get(obj, 0) + 1)
        last_step_of_obj[obj] = step
        free = sorted(set(range(num_locations)) - occupied)
        to = int(rng.choice(free))
        frm = current[obj]
        occupied.discard(frm)
        occupied.add(to)
        current[obj] = to
        events.append(
            MoveEvent(
                time=step * step_seconds + step_seconds / 4.0,
                human=human,
                obj=obj,
                from_location=frm,
                to_location=to,
            )
        )
    events.sort(key=lambda e: e.time)
    return events


def default_household_spec(seed: int = 0, **overrides) -> HouseholdSpec:
    """The stock 8-human / 10-object scenario (object 9 untouched)."""
    schedule = make_household_schedule(seed=seed)
    return HouseholdSpec(schedule=schedule, seed=seed, **overrides)


def _unit_rows(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    v = rng.standard_normal((n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def household_prototypes(spec: HouseholdSpec) -> tuple[np.ndarray, np.ndarray]:
    """The clean per-object and per-human feature vectors the stream is
    built from; use these as query representatives."""
    rng = np.random.default_rng([spec.seed, 0])
    obj = _unit_rows(rng, spec.num_objects, spec.feature_dim)
    face = _unit_rows(rng, spec.num_humans, spec.face_dim)
    if spec.twin_pair is not None:
        i, j = spec.twin_pair
        bump = rng.standard_normal(spec.face_dim) * 0.02
        face[j] = face[i] + bump
        face[j] /= np.linalg.norm(face[j])
    return obj, face


def _table_of_location(spec: HouseholdSpec, loc: int) -> int:
    return loc * spec.num_tables // spec.num_locations


def _location_position(spec: HouseholdSpec, loc: int) -> np.ndarray:
    table = _table_of_location(spec, loc)
    first = math.ceil(table * spec.num_locations / spec.num_tables)
    return np.array(
        [table * spec.camera_spacing, (loc - first) * spec.location_spacing, 0.0]
    )


def _camera_position(spec: HouseholdSpec, table: int) -> np.ndarray:
    return np.array([table * spec.camera_spacing, -spec.location_spacing, 0.0])


def household_stream(spec: HouseholdSpec) -> tuple[Dataset, Dataset, list[dict]]:
    """Render the script into detection streams.

    Returns (object detections, face detections, ground-truth action log).
    Each step splits into an action phase (humans visible at the tables they
    act on, objects moving) and a quiet phase (every at-rest object detected
    once per frame).  Spurious detections arrive at ``noise_rate`` per step.
    """
    obj_protos, face_protos = household_prototypes(spec)
    rng = np.random.default_rng([spec.seed, 1])
    step = spec.step_seconds
    half = step / 2.0
    frame_dt = half / spec.frames_per_phase

    current = {obj: obj for obj in range(spec.num_objects)}
    occupied = set(current.values())
    truth: list[dict] = []
    events_by_step: dict[int, list[MoveEvent]] = {}
    for ev in spec.schedule:
        if not (0 <= ev.obj < spec.num_objects and 0 <= ev.human < spec.num_humans):
            raise ContractViolation(f"schedule event at t={ev.time} names an unknown actor")
        events_by_step.setdefault(int(ev.time // step), []).append(ev)
    n_steps = (max(events_by_step) + 1 if events_by_step else 0) + spec.tail_steps + 1

    object_points: list[Point] = []
    face_points: list[Point] = []
    sigma = spec.feature_noise_sigma

    for s in range(n_steps):
        t0 = s * step
        # who is visible where, as [frame_lo, frame_hi) over the whole step
        # (frames 0..frames_per_phase are the action phase, the rest quiet);
        # actors walk from the source table to the destination and stay there
        presence: list[tuple[int, int, int, int]] = []  # human, table, frame_lo, frame_hi
        acting: set[int] = set()
        for ev in events_by_step.get(s, []):
            if current[ev.obj] != ev.from_location:
                raise ContractViolation(
                    f"inconsistent schedule: at t={ev.time} object o{ev.obj} is at "
                    f"location {current[ev.obj]}, not {ev.from_location}"
                )
            if ev.to_location in occupied and ev.to_location != ev.from_location:
                raise ContractViolation(
                    f"inconsistent schedule: at t={ev.time} location "
                    f"{ev.to_location} is already occupied"
                )
            occupied.discard(ev.from_location)
            occupied.add(ev.to_location)
            current[ev.obj] = ev.to_location
            acting.add(ev.human)
            mid = spec.frames_per_phase // 2
            presence.append((ev.human, _table_of_location(spec, ev.from_location), 0, mid))
            presence.append(
                (ev.human, _table_of_location(spec, ev.to_location), mid, 2 * spec.frames_per_phase)
            )
            truth.append({"t": ev.time, "human": f"h{ev.human}", "object": f"o{ev.obj}", "action": "pick"})
            truth.append({"t": ev.time, "human": f"h{ev.human}", "object": f"o{ev.obj}", "action": "place"})
        for h in range(spec.num_humans):
            if h not in acting and rng.random() < spec.loiter_prob:
                table = int(rng.integers(spec.num_tables))
                presence.append((h, table, 0, spec.frames_per_phase))
        for human, table, lo, hi in presence:
            cam = _camera_position(spec, table)
            for j in range(lo, hi):
                if rng.random() >= spec.face_miss_rate:
                    face_points.append(
                        Point(
                            t=t0 + j * frame_dt,
                            x=face_protos[human] + sigma * rng.standard_normal(spec.face_dim),
                            pos=cam.copy(),
                            label=f"h{human}",
                        )
                    )
        # quiet phase: every at-rest object is seen once per frame
        for j in range(spec.frames_per_phase):
            t = t0 + half + j * frame_dt
            for obj in range(spec.num_objects):
                object_points.append(
                    Point(
                        t=t,
                        x=obj_protos[obj] + sigma * rng.standard_normal(spec.feature_dim),
                        pos=_location_position(spec, current[obj]),
                        label=f"o{obj}",
                    )
                )
        # spurious detections anywhere, any time within the step
        for _ in range(int(rng.poisson(spec.noise_rate))):
            table = int(rng.integers(spec.num_tables))
            pos = np.array(
                [
                    table * spec.camera_spacing,
                    rng.uniform(-2.0, spec.num_locations * spec.location_spacing / spec.num_tables),
                    rng.uniform(-1.0, 1.0),
                ]
            )
            object_points.append(
                Point(
                    t=t0 + rng.uniform(0.0, step),
                    x=rng.uniform(-1.0, 1.0, spec.feature_dim),
                    pos=pos,
                    label=NOISE_LABEL,
                )
            )

    object_points.sort(key=lambda p: p.t)
    face_points.sort(key=lambda p: p.t)
    return Dataset(object_points), Dataset(face_points), truth


def true_top_humans(truth: list[dict]) -> dict[str, str]:
    """Ground truth: per object, the human with the most pick/place actions."""
    counts: dict[str, dict[str, int]] = {}
    first: dict[tuple[str, str], float] = {}
    for rec in truth:
        per = counts.setdefault(rec["object"], {})
        per[rec["human"]] = per.get(rec["human"], 0) + 1
        first.setdefault((rec["object"], rec["human"]), rec["t"])
    return {
        obj: max(per, key=lambda h: (per[h], -first[(obj, h)]))
        for obj, per in counts.items()
    }
