"""Layout-quality metrics: stress, crossings, jump distance, intersection
area ratio error, spurious intersection error, and runtime accounting.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import MovingRegionDataset
from .geometry import pairwise_min_distance
from .layout import Layout

DEFAULT_SAMPLE_BUDGET = 2_000_000


@dataclass(frozen=True)
class MetricsReport:
    stress: float
    crossing_metric: float
    jump_distance: float
    intersection_area_ratio_error: float | None  # None when no A-pair exists
    spurious_intersection_error: float | None  # None when nothing overlaps
    per_timestep_runtimes: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "stress": self.stress,
            "crossing_metric": self.crossing_metric,
            "jump_distance": self.jump_distance,
            "intersection_area_ratio_error": self.intersection_area_ratio_error,
            "spurious_intersection_error": self.spurious_intersection_error,
            "per_timestep_runtimes": list(self.per_timestep_runtimes),
        }


def stress(
    dataset: MovingRegionDataset,
    layout: Layout,
    sample_budget: int = DEFAULT_SAMPLE_BUDGET,
    seed: int = 0,
) -> float:
    """sqrt(||D - D_hat||_F^2 / ||D||_F^2) over observation pairs.

    D holds region-to-region minimum distances, D_hat the distances between
    the corresponding plot rectangles (time axis in timestep units, x-extent
    column_fill wide); both are divided by their own maximum.  Pairs are
    subsampled uniformly once their count exceeds the budget.
    """
    units = [(obj.id, t, obs.polygon) for obj, t, obs in dataset.iter_observations()]
    m = len(units)
    if m < 2:
        return 0.0
    iu, ju = np.triu_indices(m, 1)
    if len(iu) > sample_budget:
        rng = np.random.default_rng(seed)
        sel = rng.choice(len(iu), size=sample_budget, replace=False)
        iu, ju = iu[sel], ju[sel]

    d = pairwise_min_distance([p for _, _, p in units], iu, ju)

    rects = layout.rect_map()
    half_w = layout.config.column_fill / 2.0
    tx = np.array([float(t) for _, t, _ in units])
    ylo = np.empty(m)
    yhi = np.empty(m)
    for idx, (oid, t, _) in enumerate(units):
        r = rects[(oid, t)]
        ylo[idx] = r.y_center - r.height / 2.0
        yhi[idx] = r.y_center + r.height / 2.0
    dx = np.maximum(0.0, np.abs(tx[iu] - tx[ju]) - 2 * half_w)
    dy = np.maximum(0.0, np.maximum(ylo[iu] - yhi[ju], ylo[ju] - yhi[iu]))
    d_hat = np.hypot(dx, dy)

    dmax = float(d.max(initial=0.0))
    hmax = float(d_hat.max(initial=0.0))
    if dmax > 0:
        d = d / dmax
    if hmax > 0:
        d_hat = d_hat / hmax
    denom = float((d**2).sum())
    if denom == 0.0:
        return 0.0
    return float(np.sqrt(((d - d_hat) ** 2).sum() / denom))


def _columns(layout: Layout) -> list[dict[str, float]]:
    cols: dict[int, dict[str, float]] = {t: {} for t in layout.timesteps}
    for r in layout.rects:
        cols[r.timestep][r.object_id] = r.y_center
    return [cols[t] for t in layout.timesteps]


def crossing_metric(layout: Layout) -> float:
    """Average per consecutive column pair of order swaps among shared objects."""
    cols = _columns(layout)
    if len(cols) < 2:
        return 0.0
    total = 0
    for a, b in zip(cols, cols[1:]):
        shared = sorted(set(a) & set(b))
        for x in range(len(shared)):
            for y in range(x + 1, len(shared)):
                i, j = shared[x], shared[y]
                if (a[i] < a[j] and b[i] > b[j]) or (a[j] < a[i] and b[j] > b[i]):
                    total += 1
    return total / (len(cols) - 1)


def _ranks(col: dict[str, float], members: list[str]) -> dict[str, int]:
    order = sorted(members, key=lambda oid: (col[oid], oid))
    return {oid: rank + 1 for rank, oid in enumerate(order)}


def jump_distance(layout: Layout) -> float:
    """Average per consecutive column pair of total rank displacement."""
    cols = _columns(layout)
    if len(cols) < 2:
        return 0.0
    total = 0.0
    for a, b in zip(cols, cols[1:]):
        shared = sorted(set(a) & set(b))
        ra = _ranks(a, shared)
        rb = _ranks(b, shared)
        total += sum(abs(ra[oid] - rb[oid]) for oid in shared)
    return total / (len(cols) - 1)


def intersection_area_ratio_error(layout: Layout) -> float | None:
    """Mean I/w over every A-pair of every timestep; >= 1 by the overlap floor."""
    ratios = [p.intersection / p.w for s in layout.slices for p in s.pairs if p.kind == "A"]
    if not ratios:
        return None
    return float(np.mean(ratios))


def spurious_intersection_error(layout: Layout, tol: float = 1e-6) -> float | None:
    """Share of represented (overlapping) pairs that do not intersect in 2D."""
    overlapping = 0
    spurious = 0
    for s in layout.slices:
        for p in s.pairs:
            if p.intersection > tol:
                overlapping += 1
                if p.kind == "B":
                    spurious += 1
    if overlapping == 0:
        return None
    return spurious / overlapping


def compute_metrics(
    dataset: MovingRegionDataset,
    layout: Layout,
    sample_budget: int = DEFAULT_SAMPLE_BUDGET,
    seed: int = 0,
) -> MetricsReport:
    return MetricsReport(
        stress=stress(dataset, layout, sample_budget, seed),
        crossing_metric=crossing_metric(layout),
        jump_distance=jump_distance(layout),
        intersection_area_ratio_error=intersection_area_ratio_error(layout),
        spurious_intersection_error=spurious_intersection_error(layout),
        per_timestep_runtimes=[s.runtime_s for s in layout.slices],
    )
