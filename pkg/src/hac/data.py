"""Point and dataset containers plus the canonical JSONL wire format.

One point per line: ``{"t": 3.0, "x": [...], "pos": [...], "label": "c0"}``.
``pos`` and ``label`` are optional; ``label`` is evaluation-only metadata and
is never read by the sketch.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

from .errors import ContractViolation, FormatError


@dataclass
class Point:
    """A timestamped feature vector with an optional position block."""

    t: float
    x: np.ndarray
    pos: np.ndarray | None = None
    label: str | None = None

    def __post_init__(self):
        self.t = float(self.t)
        self.x = np.asarray(self.x, dtype=np.float64)
        if self.x.ndim != 1 or self.x.size == 0:
            raise ContractViolation("point feature block must be a non-empty 1-d vector")
        if self.pos is not None:
            self.pos = np.asarray(self.pos, dtype=np.float64)
            if self.pos.ndim != 1 or self.pos.size == 0:
                raise ContractViolation("point position block must be a non-empty 1-d vector")

    def to_dict(self) -> dict:
        d: dict = {"t": self.t, "x": self.x.tolist()}
        if self.pos is not None:
            d["pos"] = self.pos.tolist()
        if self.label is not None:
            d["label"] = self.label
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Point":
        unknown = set(d) - {"t", "x", "pos", "label"}
        if unknown:
            raise FormatError(f"unknown point fields: {sorted(unknown)}")
        if "t" not in d or "x" not in d:
            raise FormatError("point record needs 't' and 'x' fields")
        return cls(t=d["t"], x=d["x"], pos=d.get("pos"), label=d.get("label"))


class Dataset:
    """An ordered stream of points with non-decreasing timestamps.

    Caches stacked feature/position matrices so oracle-style scans stay
    vectorized.
    """

    def __init__(self, points: Sequence[Point]):
        self.points = list(points)
        times = [p.t for p in self.points]
        for a, b in zip(times, times[1:]):
            if b < a:
                raise ContractViolation("dataset timestamps must be non-decreasing")
        self._features: np.ndarray | None = None
        self._positions: np.ndarray | None = None
        self._times: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[Point]:
        return iter(self.points)

    def __getitem__(self, i: int) -> Point:
        return self.points[i]

    @property
    def features(self) -> np.ndarray:
        if self._features is None:
            if not self.points:
                raise ContractViolation("dataset is empty")
            self._features = np.stack([p.x for p in self.points])
        return self._features

    @property
    def positions(self) -> np.ndarray | None:
        if self._positions is None and self.points and self.points[0].pos is not None:
            self._positions = np.stack([p.pos for p in self.points])
        return self._positions

    @property
    def times(self) -> np.ndarray:
        if self._times is None:
            self._times = np.array([p.t for p in self.points], dtype=np.float64)
        return self._times

    @property
    def labels(self) -> list[str | None]:
        return [p.label for p in self.points]

    def weights(self, tau: float = math.inf, at_time: float | None = None) -> np.ndarray:
        """Per-point exponential-decay weights e^{-(at_time - t_i)/tau}."""
        if not self.points:
            raise ContractViolation("dataset is empty")
        if at_time is None:
            at_time = self.points[-1].t
        if math.isinf(tau):
            return np.ones(len(self.points))
        if tau <= 0:
            raise ContractViolation("tau must be positive or infinite")
        return np.exp(-(at_time - self.times) / tau)

    def prefix(self, n: int) -> "Dataset":
        return Dataset(self.points[:n])


def iter_jsonl_points(fp: IO[str]) -> Iterator[tuple[int, Point]]:
    """Yield (line_number, Point) pairs, raising FormatError with the
    offending line number on malformed input."""
    for lineno, line in enumerate(fp, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
        try:
            yield lineno, Point.from_dict(record)
        except (FormatError, ContractViolation) as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc


def load_points(path: str) -> Dataset:
    with open(path, "r", encoding="utf-8") as fp:
        points = [p for _, p in iter_jsonl_points(fp)]
    return Dataset(points)


def save_points(points: Iterable[Point], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        for p in points:
            fp.write(json.dumps(p.to_dict()) + "\n")
