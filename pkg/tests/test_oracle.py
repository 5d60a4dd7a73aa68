import math

import numpy as np
import pytest

from hac import (
    ContractViolation,
    Dataset,
    Euclidean,
    HacConfig,
    Point,
    Sketch,
    coverage_stats,
    is_dense,
    r_f,
    verify_output,
)
from hac.sketch import Output

EUC = Euclidean()


def line_dataset(values=range(10)):
    return Dataset([Point(t=i, x=[float(v)]) for i, v in enumerate(values)])


def test_is_dense_line_example():
    data = line_dataset()
    p = Point(t=0, x=[0.0])
    assert is_dense(data, p, 2.5, 0.3, EUC)       # 3 of 10 points within 2.5
    assert not is_dense(data, p, 2.5, 0.31, EUC)  # 3 < 3.1


def test_is_dense_single_point_self():
    data = Dataset([Point(t=0, x=[4.0])])
    assert is_dense(data, data[0], 0.0, 1.0, EUC)


def test_is_dense_empty_dataset_errors():
    with pytest.raises(ContractViolation):
        is_dense(Dataset([]), Point(t=0, x=[0.0]), 1.0, 0.5, EUC)


def test_r_f_line_example():
    data = line_dataset()
    assert r_f(data, Point(t=0, x=[0.0]), 0.3, EUC) == 2.0


def test_r_f_full_fraction_is_farthest():
    data = line_dataset()
    assert r_f(data, Point(t=0, x=[0.0]), 1.0, EUC) == 9.0


def test_r_f_one_over_n_is_zero_for_members():
    data = line_dataset()
    assert r_f(data, data[3], 1.0 / len(data), EUC) == 0.0


def test_r_f_is_dense_adjointness():
    rng = np.random.default_rng(0)
    data = Dataset([Point(t=i, x=rng.standard_normal(3)) for i in range(80)])
    for f in (0.1, 0.33, 0.5, 1.0):
        for i in range(0, 80, 7):
            p = data[i]
            r = r_f(data, p, f, EUC)
            assert is_dense(data, p, r, f, EUC)
            if r > 0:
                assert not is_dense(data, p, r - 1e-7, f, EUC)


def test_is_dense_monotone():
    rng = np.random.default_rng(1)
    data = Dataset([Point(t=i, x=rng.standard_normal(2)) for i in range(60)])
    p = data[0]
    for r_small, r_big in [(0.1, 0.5), (0.5, 2.0)]:
        if is_dense(data, p, r_small, 0.2, EUC):
            assert is_dense(data, p, r_big, 0.2, EUC)
    for f_small, f_big in [(0.05, 0.2), (0.2, 0.9)]:
        if is_dense(data, p, 0.5, f_big, EUC):
            assert is_dense(data, p, 0.5, f_small, EUC)


def _recount_is_dense(points, times, p, r, f, tau, at_time):
    """Second, independently written O(n^2) recount (pure python)."""
    total = 0.0
    near = 0.0
    for x, t in zip(points, times):
        w = 1.0 if math.isinf(tau) else math.exp(-(at_time - t) / tau)
        total += w
        dist = math.sqrt(sum((a - b) ** 2 for a, b in zip(x, p)))
        if dist <= r:
            near += w
    return near >= f * total


def test_double_entry_recount_agrees():
    rng = np.random.default_rng(2)
    n = 200
    xs = rng.standard_normal((n, 3))
    data = Dataset([Point(t=float(i) * 0.1, x=xs[i]) for i in range(n)])
    at = float(data[-1].t)
    disagreements = 0
    for tau in (math.inf, 4.0):
        for trial in range(60):
            p = Point(t=0, x=rng.standard_normal(3) * 0.8)
            r = float(rng.uniform(0.2, 3.0))
            f = float(rng.uniform(0.05, 0.9))
            mine = is_dense(data, p, r, f, EUC, tau, at)
            theirs = _recount_is_dense(xs.tolist(), data.times.tolist(), p.x.tolist(), r, f, tau, at)
            disagreements += mine != theirs
    assert disagreements == 0


def test_verify_output_on_real_runs():
    for seed in range(5):
        rng = np.random.default_rng(seed)
        centers = np.array([[0.0, 0.0, 0.0], [4.0, 4.0, 4.0]])
        pts = [
            Point(t=i, x=centers[rng.integers(2)] + 0.3 * rng.standard_normal(3))
            for i in range(600)
        ]
        data = Dataset(pts)
        cfg = HacConfig(f0=0.1, epsilon=0.5, delta=0.5, r0=0.25, gamma=2.0, c=4, seed=seed)
        sk = Sketch(cfg)
        for p in pts:
            sk.process(p)
        outs = sk.query_dense(0.1)
        assert outs
        assert all(verify_output(data, o, cfg, 0.1) for o in outs)


def test_verify_output_rejects_forged_output():
    data = line_dataset()
    cfg = HacConfig(f0=0.3, epsilon=0.5, r0=0.5, c=0)
    forged = Output(
        point=Point(t=0, x=[100.0]),
        radius_index=0,
        radius=0.5,
        freq_estimate=0.9,
        slot_id=0,
        query_time=9.0,
    )
    assert not verify_output(data, forged, cfg, 0.3)


def test_verify_output_at_r_max_with_planted_cluster():
    rng = np.random.default_rng(7)
    wide = [Point(t=i, x=rng.uniform(-4.0, 4.0, 2)) for i in range(400)]
    data = Dataset(wide)
    cfg = HacConfig(f0=0.5, epsilon=0.5, delta=0.5, r0=1.0, gamma=2.0, c=2, seed=1)
    sk = Sketch(cfg)
    for p in wide:
        sk.process(p)
    outs = sk.query_dense(0.5)
    big = [o for o in outs if o.radius_index == cfg.c]
    assert big, "expected at least one output at the largest bucket"
    assert all(verify_output(data, o, cfg, 0.5) for o in big)


def _mixed_density_data():
    # a tight 4-point cluster (dense at f=0.5) plus two isolated points (sparse)
    return line_dataset([0.0, 0.1, 0.2, 0.3, 100.0, 200.0])


def test_coverage_stats_everything_covered():
    data = _mixed_density_data()
    outs = [
        Output(point=p, radius_index=0, radius=1.0, freq_estimate=1.0, slot_id=i, query_time=9.0)
        for i, p in enumerate(data)
    ]
    assert coverage_stats(data, outs, 0.5, 1.0, 0.5, EUC) == (1.0, 1.0)


def test_coverage_stats_no_outputs():
    data = _mixed_density_data()
    assert coverage_stats(data, [], 0.5, 1.0, 0.5, EUC) == (0.0, 0.0)
