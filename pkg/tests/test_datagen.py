import math

import numpy as np
import pytest

from hac import ContractViolation
from hac.datagen import (
    HouseholdSpec,
    MixtureSpec,
    MoveEvent,
    characters_profile,
    default_household_spec,
    gaussian_mixture_stream,
    household_prototypes,
    household_stream,
    make_household_schedule,
    simplex_means,
    true_top_humans,
)

# -- mixtures -----------------------------------------------------------------


def test_degenerate_single_cluster():
    spec = MixtureSpec(k=1, dims=3, n=50, weights=[1.0], sigma=0.0,
                       means=np.array([[1.0, 2.0, 3.0]]), seed=0)
    data = gaussian_mixture_stream(spec)
    assert len(data) == 50
    assert all((p.x == [1.0, 2.0, 3.0]).all() for p in data)
    assert all(p.label == "c0" for p in data)


def test_weights_must_sum_to_one():
    with pytest.raises(ContractViolation, match="sum"):
        MixtureSpec(k=2, dims=2, n=10, weights=[0.5, 0.4], noise_fraction=0.2)


def test_simplex_means_pairwise_distance():
    means = simplex_means(5, 8, 2.5)
    for i in range(5):
        for j in range(i + 1, 5):
            assert np.linalg.norm(means[i] - means[j]) == pytest.approx(2.5)


def test_characters_profile_label_histogram():
    # generated label shares match the normalized profile within 3 sigma
    spec = characters_profile(seed=5, n=5000)
    data = gaussian_mixture_stream(spec)
    labels = data.labels
    n = len(data)
    expected = list(spec.weights) + [spec.noise_fraction]
    names = [f"c{i}" for i in range(8)] + ["noise"]
    for name, q in zip(names, expected):
        count = sum(1 for  l in labels if l == name)
        sigma = math.sqrt(q * (1 - q) * n)
        assert abs(count - q * n) <= 3 * sigma, name


def test_high_dim_unit_sigma_shell():
    # most points of a unit-variance gaussian lie in the sqrt(d-1) +- 3 shell
    d = 128
    spec = MixtureSpec(k=2, dims=d, n=4000, weights=[0.5, 0.5], sigma=1.0,
                       separation_ratio=1.3, seed=3)
    data = gaussian_mixture_stream(spec)
    means = {f"c{i}": spec.means for i in range(2)}
    from hac.datagen import _auto_means

    centers = _auto_means(spec)
    for ci in range(2):
        pts = np.stack([p.x for p in data if p.label == f"c{ci}"])
        radial = np.linalg.norm(pts - centers[ci], axis=1)
        inside = (radial >= math.sqrt(d - 1) - 3) & (radial <= math.sqrt(d - 1) + 3)
        assert inside.mean() >= 0.95


def test_mixture_determinism_and_seed_independence():
    spec_a = MixtureSpec(k=2, dims=4, n=200, weights=[0.6, 0.3], noise_fraction=0.1, seed=9)
    spec_b = MixtureSpec(k=2, dims=4, n=200, weights=[0.6, 0.3], noise_fraction=0.1, seed=9)
    da, db = gaussian_mixture_stream(spec_a), gaussian_mixture_stream(spec_b)
    assert all((a.x == b.x).all() and a.label == b.label for a, b in zip(da, db))
    other = gaussian_mixture_stream(
        MixtureSpec(k=2, dims=4, n=200, weights=[0.6, 0.3], noise_fraction=0.1, seed=10)
    )
    assert any((a.x != b.x).any() for a, b in zip(da, other))


def test_empirical_frequencies_converge():
    spec = MixtureSpec(k=3, dims=4, n=100_000, weights=[0.5, 0.3, 0.1],
                       noise_fraction=0.1, seed=1)
    data = gaussian_mixture_stream(spec)
    for i, w in enumerate([0.5, 0.3, 0.1]):
        share = sum(1 for l in data.labels if l == f"c{i}") / len(data)
        assert abs(share - w) <= 0.01


# -- household ------------------------------------------------------------------


def test_empty_schedule_only_stable_objects_and_noise():
    spec = HouseholdSpec(schedule=[], noise_rate=5.0, seed=0)
    objects, faces, truth = household_stream(spec)
    assert truth == []
    labels = set(p.label for p in objects)
    assert "noise" in labels
    # every object is detected somewhere, and never moves
    for obj in range(spec.num_objects):
        pts = [p for p in objects if p.label == f"o{obj}"]
        assert pts
        assert len({tuple(p.pos) for p in pts}) == 1


def test_pick_moves_detections():
    move = MoveEvent(time=105.0, human=0, obj=0, from_location=0, to_location=12)
    spec = HouseholdSpec(schedule=[move], noise_rate=0.0, seed=1)
    objects, _, truth = household_stream(spec)
    pts = [p for p in objects if p.label == "o0"]
    before = [p for p in pts if p.t < 100.0]
    after = [p for p in pts if p.t >= 100.0]
    assert before and after
    old_pos = tuple(before[0].pos)
    assert all(tuple(p.pos) == old_pos for p in before)
    assert all(tuple(p.pos) != old_pos for p in after)
    assert {r["action"] for r in truth} == {"pick", "place"}


def test_default_scenario_action_count():
    # eight humans averaging a dozen pick/place actions each
    schedule = make_household_schedule(seed=4)
    actions = 2 * len(schedule)
    assert 80 <= actions <= 112


def test_objects_have_single_location_between_actions():
    spec = default_household_spec(seed=2)
    objects, _, truth = household_stream(spec)
    action_times = sorted({r["t"] for r in truth})
    boundaries = [-math.inf] + action_times + [math.inf]
    for obj in range(spec.num_objects):
        pts = [p for p in objects if p.label == f"o{obj}"]
        for lo, hi in zip(boundaries, boundaries[1:]):
            window = {tuple(p.pos) for p in pts if lo < p.t < hi}
            assert len(window) <= 1


def test_inconsistent_schedule_names_event():
    bad = [MoveEvent(time=25.0, human=0, obj=0, from_location=5, to_location=12)]
    spec = HouseholdSpec(schedule=bad, seed=0)
    with pytest.raises(ContractViolation, match="t=25.0"):
        household_stream(spec)


def test_untouched_object_stays_put():
    spec = default_household_spec(seed=0)
    objects, _, truth = household_stream(spec)
    assert all(r["object"] != "o9" for r in truth)
    pts = [p for p in objects if p.label == "o9"]
    assert len({tuple(p.pos) for p in pts}) == 1


def test_true_top_humans_unique_and_majority():
    schedule = make_household_schedule(seed=7)
    spec = HouseholdSpec(schedule=schedule, seed=7)
    _, _, truth = household_stream(spec)
    tops = true_top_humans(truth)
    assert len(tops) == 9  # all touched objects
    for obj, top in tops.items():
        per = {}
        for r in truth:
            if r["object"] == obj:
                per[r["human"]] = per.get(r["human"], 0) + 1
        counts = sorted(per.values(), reverse=True)
        assert per[top] == counts[0]
        if len(counts) > 1:
            assert counts[0] > counts[1]


def test_prototypes_are_deterministic_and_unit_norm():
    spec = default_household_spec(seed=11)
    o1, f1 = household_prototypes(spec)
    o2, f2 = household_prototypes(spec)
    assert np.array_equal(o1, o2) and np.array_equal(f1, f2)
    assert np.allclose(np.linalg.norm(o1, axis=1), 1.0)
    assert np.allclose(np.linalg.norm(f1, axis=1), 1.0)


def test_face_stream_carries_camera_coordinate():
    spec = default_household_spec(seed=3)
    _, faces, _ = household_stream(spec)
    cams = {float(p.pos[0]) for p in faces}
    allowed = {t * spec.camera_spacing for t in range(spec.num_tables)}
    assert cams <= allowed and len(cams) > 1
