"""Distance functions used by the sketch, the oracle and the tracker.

Three kinds are supported:

* ``Euclidean`` -- plain l2.
* ``CosineAngular`` -- arccos(cosine similarity) / pi, which satisfies the
  triangle inequality.  The raw ``1 - cos`` variant is available behind an
  explicit flag but is documented as a non-metric.
* ``ChebyshevComposite`` -- the maximum of a scaled feature-space distance and
  a scaled position-space distance, for points carrying both blocks.

All distance evaluations funnel through :func:`distances`, the single batch
code path, so that a distance computed while streaming and the same distance
recomputed by the offline oracle agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .data import Point
from .errors import ContractViolation, FormatError


@dataclass(frozen=True)
class Euclidean:
    pass


@dataclass(frozen=True)
class CosineAngular:
    # raw=True gives 1 - cos similarity, which violates the triangle
    # inequality; only angular distance is safe for the sketch guarantees.
    raw: bool = False


@dataclass(frozen=True)
class ChebyshevComposite:
    feature_scale: float = 1.0
    position_scale: float = 1.0
    feature_metric: Union[Euclidean, CosineAngular] = field(default_factory=Euclidean)
    position_metric: Union[Euclidean, CosineAngular] = field(default_factory=Euclidean)

    def __post_init__(self):
        if not self.feature_scale > 0:
            raise ContractViolation("feature_scale must be strictly positive")
        if not self.position_scale > 0:
            raise ContractViolation("position_scale must be strictly positive")
        for inner in (self.feature_metric, self.position_metric):
            if isinstance(inner, ChebyshevComposite):
                raise ContractViolation("composite metrics cannot be nested")


MetricSpec = Union[Euclidean, CosineAngular, ChebyshevComposite]


def requires_position(spec: MetricSpec) -> bool:
    return isinstance(spec, ChebyshevComposite)


def _check_dims(block: np.ndarray, q: np.ndarray, what: str) -> None:
    if block.shape[-1] != q.shape[-1]:
        raise ContractViolation(
            f"{what} dimension mismatch: {block.shape[-1]} vs {q.shape[-1]}"
        )


def _euclidean_many(block: np.ndarray, q: np.ndarray) -> np.ndarray:
    diff = block - q
    return np.sqrt((diff * diff).sum(axis=-1))


def _cosine_many(block: np.ndarray, q: np.ndarray, raw: bool) -> np.ndarray:
    # numerator and norms share one reduction so cos(a, a) == 1.0 exactly
    sq = (block * block).sum(axis=-1)
    qsq = (q * q).sum()
    if qsq == 0.0 or np.any(sq == 0.0):
        raise ContractViolation("cosine distance is undefined for zero-norm vectors")
    cos = np.clip((block * q).sum(axis=-1) / np.sqrt(sq * qsq), -1.0, 1.0)
    if raw:
        return 1.0 - cos
    return np.arccos(cos) / np.pi


def distances(
    spec: MetricSpec,
    feats: np.ndarray,
    q_feat: np.ndarray,
    poss: np.ndarray | None = None,
    q_pos: np.ndarray | None = None,
) -> np.ndarray:
    """Distance from every row of ``feats`` (and ``poss``) to one query point."""
    if isinstance(spec, Euclidean):
        _check_dims(feats, q_feat, "feature")
        return _euclidean_many(feats, q_feat)
    if isinstance(spec, CosineAngular):
        _check_dims(feats, q_feat, "feature")
        return _cosine_many(feats, q_feat, spec.raw)
    if isinstance(spec, ChebyshevComposite):
        if poss is None or q_pos is None:
            raise ContractViolation("composite metric requires a position block on every point")
        _check_dims(poss, q_pos, "position")
        df = distances(spec.feature_metric, feats, q_feat) / spec.feature_scale
        dp = distances(spec.position_metric, poss, q_pos) / spec.position_scale
        return np.maximum(dp, df)
    raise ContractViolation(f"unknown metric spec: {spec!r}")


def distance(spec: MetricSpec, a: Point, b: Point) -> float:
    """Scalar distance between two points (delegates to the batch path)."""
    a_pos = a.pos[None, :] if a.pos is not None else None
    return float(distances(spec, a.x[None, :], b.x, a_pos, b.pos)[0])


def composite_max_distance(
    a: Point,
    b: Point,
    feature_spec: MetricSpec,
    position_spec: MetricSpec,
    feature_scale: float,
    position_scale: float,
) -> float:
    """max(position distance / position_scale, feature distance / feature_scale)."""
    spec = ChebyshevComposite(
        feature_scale=feature_scale,
        position_scale=position_scale,
        feature_metric=feature_spec,
        position_metric=position_spec,
    )
    if a.pos is None or b.pos is None:
        raise ContractViolation("composite metric requires a position block on every point")
    return distance(spec, a, b)


def metric_to_dict(spec: MetricSpec) -> dict:
    if isinstance(spec, Euclidean):
        return {"kind": "euclidean"}
    if isinstance(spec, CosineAngular):
        d = {"kind": "cosine-angular"}
        if spec.raw:
            d["raw"] = True
        return d
    if isinstance(spec, ChebyshevComposite):
        return {
            "kind": "chebyshev-composite",
            "feature_scale": spec.feature_scale,
            "position_scale": spec.position_scale,
            "feature_metric": metric_to_dict(spec.feature_metric),
            "position_metric": metric_to_dict(spec.position_metric),
        }
    raise ContractViolation(f"unknown metric spec: {spec!r}")


def metric_from_dict(d: dict) -> MetricSpec:
    if not isinstance(d, dict) or "kind" not in d:
        raise FormatError("metric spec must be an object with a 'kind' field")
    kind = d["kind"]
    if kind == "euclidean":
        _reject_unknown(d, {"kind"})
        return Euclidean()
    if kind == "cosine-angular":
        _reject_unknown(d, {"kind", "raw"})
        return CosineAngular(raw=bool(d.get("raw", False)))
    if kind == "chebyshev-composite":
        _reject_unknown(
            d, {"kind", "feature_scale", "position_scale", "feature_metric", "position_metric"}
        )
        return ChebyshevComposite(
            feature_scale=float(d.get("feature_scale", 1.0)),
            position_scale=float(d.get("position_scale", 1.0)),
            feature_metric=metric_from_dict(d.get("feature_metric", {"kind": "euclidean"})),
            position_metric=metric_from_dict(d.get("position_metric", {"kind": "euclidean"})),
        )
    raise FormatError(f"unknown metric kind: {kind!r}")


def _reject_unknown(d: dict, allowed: set) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise FormatError(f"unknown metric spec fields: {sorted(unknown)}")
