import math

import numpy as np
import pytest

from morevis.dataset import MovingObject, MovingRegionDataset, RegionObservation
from morevis.geometry import box_polygon
from morevis.layout import (
    Layout,
    LayoutConfig,
    PairRecord,
    RibbonRect,
    TimeSliceSolution,
    compute_layout,
)
from morevis.metrics import (
    compute_metrics,
    crossing_metric,
    intersection_area_ratio_error,
    jump_distance,
    spurious_intersection_error,
    stress,
)
from morevis.synth import generate_synthetic_orbits


def tiny_squares_dataset(xs, size=0.01, timesteps=1):
    objects = []
    for i, x in enumerate(xs):
        obs = {
            t: RegionObservation(box_polygon(x - size / 2, -size / 2, x + size / 2, size / 2))
            for t in range(timesteps)
        }
        objects.append(MovingObject(f"o{i}", f"o{i}", obs))
    return MovingRegionDataset(objects, list(range(timesteps)))


def slice_of(t, pairs=(), groups=()):
    return TimeSliceSolution(
        timestep=t,
        groups=tuple(tuple(g) for g in groups),
        pairs=tuple(pairs),
        f1=None,
        f2=None,
        f3=0.0,
        f1_group_mean=None,
        f2_group_mean=None,
        status="optimal",
        runtime_s=0.0,
    )


def manual_layout(rect_spec, timesteps, slices=None, config=None):
    rects = tuple(RibbonRect(oid, t, y, h, y) for (oid, t), (y, h) in rect_spec.items())
    return Layout(
        rects=rects,
        links=(),
        slices=tuple(slices or [slice_of(t) for t in timesteps]),
        timesteps=tuple(timesteps),
        area_scale=1.0,
        config=config or LayoutConfig(),
    )


# --- stress -----------------------------------------------------------------------


def test_stress_single_observation_is_zero():
    ds = tiny_squares_dataset([0.0])
    layout = manual_layout({("o0", 0): (0.5, 0.1)}, [0])
    assert stress(ds, layout) == 0.0


def test_stress_collapsed_layout_is_one():
    ds = tiny_squares_dataset([0.0, 1.0, 10.0])
    layout = manual_layout(
        {("o0", 0): (0.5, 0.0), ("o1", 0): (0.5, 0.0), ("o2", 0): (0.5, 0.0)}, [0]
    )
    assert stress(ds, layout) == pytest.approx(1.0)


def test_stress_proportional_layout_small():
    # hand-computed 3x3 distance matrices for squares at x = 0, 1, 10
    size = 0.01
    d = np.array([1.0 - size, 10.0 - size, 9.0 - size])  # (0,1), (0,2), (1,2)
    dn = d / d.max()
    y = [0.0, dn[0], 1.0]
    h = 1e-3
    d_hat = np.array([y[1] - y[0] - h, y[2] - y[0] - h, y[2] - y[1] - h])
    dh = d_hat / d_hat.max()
    expected = math.sqrt(((dn - dh) ** 2).sum() / (dn**2).sum())
    assert expected < 0.05

    ds = tiny_squares_dataset([0.0, 1.0, 10.0], size=size)
    layout = manual_layout(
        {("o0", 0): (y[0], h), ("o1", 0): (y[1], h), ("o2", 0): (y[2], h)}, [0]
    )
    got = stress(ds, layout)
    assert got == pytest.approx(expected, abs=1e-9)
    assert got < 0.05


def test_stress_subsampling_deterministic():
    ds = generate_synthetic_orbits(4, 12, seed=0)
    layout = compute_layout(ds)
    a = stress(ds, layout, sample_budget=200, seed=7)
    b = stress(ds, layout, sample_budget=200, seed=7)
    assert a == b
    full = stress(ds, layout)
    assert abs(a - full) < 0.2  # sampled estimate stays in the neighbourhood


# --- crossings / jumps ------------------------------------------------------------


def test_crossing_monotone_layout_zero():
    layout = manual_layout(
        {("a", 0): (0.1, 0.01), ("a", 1): (0.2, 0.01), ("b", 0): (0.5, 0.01), ("b", 1): (0.6, 0.01)},
        [0, 1],
    )
    assert crossing_metric(layout) == 0.0
    assert jump_distance(layout) == 0.0


def test_crossing_single_swap():
    layout = manual_layout(
        {("a", 0): (0.1, 0.01), ("a", 1): (0.6, 0.01), ("b", 0): (0.5, 0.01), ("b", 1): (0.2, 0.01)},
        [0, 1],
    )
    assert crossing_metric(layout) == 1.0
    assert jump_distance(layout) == 2.0


def test_three_object_reversal():
    layout = manual_layout(
        {
            ("a", 0): (0.1, 0.01), ("a", 1): (0.9, 0.01),
            ("b", 0): (0.5, 0.01), ("b", 1): (0.5, 0.01),
            ("c", 0): (0.9, 0.01), ("c", 1): (0.1, 0.01),
        },
        [0, 1],
    )
    assert crossing_metric(layout) == 3.0  # C(3,2) pairs all swap
    assert jump_distance(layout) == 4.0  # |1-3| + |2-2| + |3-1|


def test_rank_metrics_invariant_under_monotone_transform():
    ds = generate_synthetic_orbits(4, 8, seed=3)
    layout = compute_layout(ds)
    warped = manual_layout(
        {(r.object_id, r.timestep): (math.exp(2 * r.y_center), r.height) for r in layout.rects},
        list(layout.timesteps),
        config=layout.config,
    )
    assert crossing_metric(warped) == crossing_metric(layout)
    assert jump_distance(warped) == jump_distance(layout)


def test_crossing_skips_absent_objects():
    layout = manual_layout(
        {("a", 0): (0.1, 0.01), ("a", 1): (0.2, 0.01), ("b", 0): (0.5, 0.01)},
        [0, 1],
    )
    assert crossing_metric(layout) == 0.0


# --- intersection ratio / spurious --------------------------------------------------


def test_ratio_error_exact_is_one():
    pairs = [PairRecord("a", "b", "A", 0.2, 0.2, k=1.0)]
    layout = manual_layout({}, [0], slices=[slice_of(0, pairs)])
    assert intersection_area_ratio_error(layout) == pytest.approx(1.0)


def test_ratio_error_single_pair():
    pairs = [PairRecord("a", "b", "A", 0.1, 0.12, k=1.2)]
    layout = manual_layout({}, [0], slices=[slice_of(0, pairs)])
    assert intersection_area_ratio_error(layout) == pytest.approx(1.2)


def test_ratio_error_absent_without_a_pairs():
    layout = manual_layout({}, [0], slices=[slice_of(0)])
    assert intersection_area_ratio_error(layout) is None


def test_spurious_error_zero_when_no_c():
    pairs = [PairRecord("a", "b", "A", 0.2, 0.2, k=1.0)]
    layout = manual_layout({}, [0], slices=[slice_of(0, pairs)])
    assert spurious_intersection_error(layout) == 0.0


def test_spurious_error_fraction():
    pairs = [PairRecord(f"a{i}", f"b{i}", "A", 0.1, 0.1, k=1.0) for i in range(19)]
    pairs.append(PairRecord("x", "y", "B", 0.0, 0.05, c=1))
    layout = manual_layout({}, [0], slices=[slice_of(0, pairs)])
    assert spurious_intersection_error(layout) == pytest.approx(0.05)


def test_spurious_error_matches_slice_counts():
    y_prime = {"a": 0.1, "b": 0.5, "c": 0.9}
    heights = {"a": 0.5, "b": 0.5, "c": 0.5}
    from morevis.layout import optimize_timestep

    slc, _ = optimize_timestep(
        0, ["a", "b", "c"], y_prime, heights,
        {("a", "b"): 0.45, ("b", "c"): 0.45}, LayoutConfig(),
    )
    layout = manual_layout({}, [0], slices=[slc])
    overlaps = sum(1 for p in slc.pairs if p.intersection > 1e-6)
    assert spurious_intersection_error(layout) == pytest.approx(
        slc.spurious_count() / overlaps
    )


# --- aggregate report ------------------------------------------------------------------


def test_compute_metrics_on_synthetic():
    ds = generate_synthetic_orbits(4, 15, seed=0)
    layout = compute_layout(ds)
    report = compute_metrics(ds, layout)
    assert report.spurious_intersection_error == 0.0
    assert report.intersection_area_ratio_error >= 1.0
    assert 0.0 <= report.stress <= 1.0
    assert len(report.per_timestep_runtimes) == 15
    d = report.to_dict()
    assert set(d) == {
        "stress", "crossing_metric", "jump_distance",
        "intersection_area_ratio_error", "spurious_intersection_error",
        "per_timestep_runtimes",
    }
