"""Duplicate removal over raw sketch outputs.

Two variants:

* theorem -- walk outputs from tightest to widest radius and keep one only if
  its ball is disjoint from every kept ball; kept balls never overlap, which
  caps the output count at 1/((1-epsilon)f).
* threshold -- walk outputs in decreasing frequency and keep one only if it is
  farther than r_d from everything kept so far.

The two are deliberately kept separate: they make different guarantees.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from . import metric as metrics
from .errors import ContractViolation, FormatError
from .sketch import Output


@dataclass(frozen=True)
class DedupPolicy:
    variant: str  # "theorem" or "threshold"
    r_d: float | None = None

    def __post_init__(self):
        if self.variant not in ("theorem", "threshold"):
            raise ContractViolation("dedup variant must be 'theorem' or 'threshold'")
        if self.variant == "threshold":
            if self.r_d is None or not self.r_d >= 0.0:
                raise ContractViolation("threshold dedup requires r_d >= 0")

    def to_dict(self) -> dict:
        d: dict = {"variant": self.variant}
        if self.r_d is not None:
            d["r_d"] = self.r_d
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DedupPolicy":
        unknown = set(d) - {"variant", "r_d"}
        if unknown:
            raise FormatError(f"unknown dedup fields: {sorted(unknown)}")
        return cls(variant=d.get("variant", "threshold"), r_d=d.get("r_d"))


def dedup_theorem(outputs: Sequence[Output], metric: metrics.MetricSpec) -> list[Output]:
    """Keep an output only if its ball misses every previously kept ball.

    Outputs are visited in increasing radius (ties: higher frequency, then
    slot id); ``o`` survives iff no kept ``p`` has
    ``d(o, p) <= radius(o) + radius(p)``.
    """
    order = sorted(outputs, key=lambda o: (o.radius, -o.freq_estimate, o.slot_id))
    kept: list[Output] = []
    for o in order:
        if all(
            metrics.distance(metric, o.point, p.point) > o.radius + p.radius for p in kept
        ):
            kept.append(o)
    return kept


def dedup_threshold(
    outputs: Sequence[Output], r_d: float, metric: metrics.MetricSpec
) -> list[Output]:
    """Greedy keep-if-far filter at a fixed radius r_d.

    The input must already be sorted by decreasing frequency estimate; order
    is preserved in the result.
    """
    freqs = [o.freq_estimate for o in outputs]
    if any(a < b for a, b in zip(freqs, freqs[1:])):
        raise ContractViolation(
            "threshold dedup expects outputs sorted by decreasing freq_estimate"
        )
    kept: list[Output] = []
    for o in outputs:
        if all(metrics.distance(metric, o.point, p.point) > r_d for p in kept):
            kept.append(o)
    return kept


def dedup_filter(
    policy: DedupPolicy | None, metric: metrics.MetricSpec
) -> Callable[[list[Output]], list[Output]] | None:
    """Adapt a policy into the filter callable the query methods accept."""
    if policy is None:
        return None
    if policy.variant == "theorem":
        return lambda outs: dedup_theorem(outs, metric)
    return lambda outs: dedup_threshold(outs, policy.r_d, metric)
