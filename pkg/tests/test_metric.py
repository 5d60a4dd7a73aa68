import math

import numpy as np
import pytest

from hac import (
    ChebyshevComposite,
    ContractViolation,
    CosineAngular,
    Euclidean,
    Point,
    composite_max_distance,
    distance,
    distances,
)
from hac.metric import metric_from_dict, metric_to_dict


def pt(*xs, pos=None):
    return Point(t=0.0, x=list(xs), pos=pos)


def test_euclidean_pythagorean():
    assert distance(Euclidean(), pt(0.0, 0.0), pt(3.0, 4.0)) == 5.0


def test_identity_all_specs():
    p = pt(1.0, 2.0, pos=[0.5, 0.5])
    specs = [Euclidean(), CosineAngular(), ChebyshevComposite()]
    for spec in specs:
        assert distance(spec, p, p) == 0.0


def test_cosine_angular_orthogonal():
    # arccos(0) / pi
    d = distance(CosineAngular(), pt(1.0, 0.0), pt(0.0, 1.0))
    assert d == pytest.approx(0.5, abs=1e-12)


def test_cosine_raw_flag():
    d = distance(CosineAngular(raw=True), pt(1.0, 0.0), pt(0.0, 1.0))
    assert d == pytest.approx(1.0, abs=1e-12)


def test_cosine_zero_norm_errors():
    with pytest.raises(ContractViolation):
        distance(CosineAngular(), pt(0.0, 0.0), pt(1.0, 0.0))


def test_dimension_mismatch_errors():
    with pytest.raises(ContractViolation):
        distance(Euclidean(), pt(1.0, 2.0), pt(1.0, 2.0, 3.0))


def test_composite_takes_the_max():
    # feature distance 0.2, position distance 0.7, unit scales
    a = pt(0.0, pos=[0.0])
    b = pt(0.2, pos=[0.7])
    assert composite_max_distance(a, b, Euclidean(), Euclidean(), 1.0, 1.0) == pytest.approx(0.7)


def test_composite_scaling():
    # feature 0.6 / scale 2 -> 0.3; position 0.5 / scale 1 -> 0.5
    a = pt(0.0, pos=[0.0])
    b = pt(0.6, pos=[0.5])
    assert composite_max_distance(a, b, Euclidean(), Euclidean(), 2.0, 1.0) == pytest.approx(0.5)


def test_composite_identical_points():
    a = pt(1.0, 2.0, pos=[3.0, 4.0])
    assert composite_max_distance(a, a, Euclidean(), Euclidean(), 1.0, 1.0) == 0.0


def test_composite_requires_position():
    spec = ChebyshevComposite()
    with pytest.raises(ContractViolation):
        distance(spec, pt(1.0), pt(2.0))


def test_composite_rejects_nonpositive_scales():
    with pytest.raises(ContractViolation):
        ChebyshevComposite(feature_scale=0.0)
    with pytest.raises(ContractViolation):
        ChebyshevComposite(position_scale=-1.0)


def test_triangle_inequality_bulk():
    # 10^4 random triples for euclidean and the composite; exact up to 1e-9
    rng = np.random.default_rng(0)
    n = 10_000
    for spec, with_pos in [(Euclidean(), False),
                           (ChebyshevComposite(feature_scale=0.7, position_scale=1.3), True)]:
        xs = rng.standard_normal((n, 3, 4))
        ps = rng.standard_normal((n, 3, 2)) if with_pos else None
        for i in range(0, n, 1):
            a, b, c = (
                Point(0.0, xs[i, j], pos=ps[i, j] if with_pos else None) for j in range(3)
            )
            dab = distance(spec, a, b)
            dbc = distance(spec, b, c)
            dac = distance(spec, a, c)
            assert dac <= dab + dbc + 1e-9


def test_angular_triangle_inequality_sampled():
    rng = np.random.default_rng(1)
    for _ in range(2000):
        a, b, c = (Point(0.0, v) for v in rng.standard_normal((3, 5)))
        dab = distance(CosineAngular(), a, b)
        dbc = distance(CosineAngular(), b, c)
        dac = distance(CosineAngular(), a, c)
        assert dac <= dab + dbc + 1e-9


def test_symmetry_random_pairs():
    rng = np.random.default_rng(2)
    specs = [Euclidean(), CosineAngular(), ChebyshevComposite(feature_scale=2.0)]
    for _ in range(500):
        a = Point(0.0, rng.standard_normal(6), pos=rng.standard_normal(2))
        b = Point(0.0, rng.standard_normal(6), pos=rng.standard_normal(2))
        for spec in specs:
            assert distance(spec, a, b) == distance(spec, b, a)


def test_composite_monotone_in_each_part():
    a = pt(0.0, pos=[0.0])
    base = composite_max_distance(a, pt(0.5, pos=[0.4]), Euclidean(), Euclidean(), 1.0, 1.0)
    wider_feat = composite_max_distance(a, pt(0.9, pos=[0.4]), Euclidean(), Euclidean(), 1.0, 1.0)
    wider_pos = composite_max_distance(a, pt(0.5, pos=[0.9]), Euclidean(), Euclidean(), 1.0, 1.0)
    assert wider_feat >= base
    assert wider_pos >= base


def test_batch_matches_scalar():
    rng = np.random.default_rng(3)
    feats = rng.standard_normal((40, 5))
    poss = rng.standard_normal((40, 2))
    q = Point(0.0, rng.standard_normal(5), pos=rng.standard_normal(2))
    spec = ChebyshevComposite(feature_scale=0.5, position_scale=2.0)
    batch = distances(spec, feats, q.x, poss, q.pos)
    for i in range(40):
        p = Point(0.0, feats[i], pos=poss[i])
        assert distance(spec, p, q) == batch[i]


def test_spec_serialization_round_trip():
    specs = [
        Euclidean(),
        CosineAngular(raw=True),
        ChebyshevComposite(
            feature_scale=0.5,
            position_scale=2.0,
            feature_metric=CosineAngular(),
            position_metric=Euclidean(),
        ),
    ]
    for spec in specs:
        assert metric_from_dict(metric_to_dict(spec)) == spec


def test_nested_composite_rejected():
    inner = ChebyshevComposite()
    with pytest.raises(ContractViolation):
        ChebyshevComposite(feature_metric=inner)
