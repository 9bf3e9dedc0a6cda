"""Initial 1D coordinates for every (object, timestep) observation.

One global transformation is fitted over all observations with time ignored;
per-timestep refits are deliberately avoided because the number of observed
objects varies over time.  Outputs are min-max normalized to [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import MoReVisError
from .dataset import MovingRegionDataset
from .geometry import centroid, pairwise_min_distance

METHODS = ("pca-centroids", "force-directed", "hilbert", "morton")
DISTANCE_MODES = ("centroid", "region")


@dataclass(frozen=True)
class ProjectionConfig:
    method: str = "pca-centroids"
    distance_mode: str = "centroid"  # force-directed only
    curve_order: int = 10  # space-filling only: grid is 2^order x 2^order
    iterations: int = 500  # force-directed only
    learning_rate: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise MoReVisError(f"unknown projection method {self.method!r}")
        if self.distance_mode not in DISTANCE_MODES:
            raise MoReVisError(f"unknown distance mode {self.distance_mode!r}")
        if not 4 <= self.curve_order <= 16:
            raise MoReVisError("curve_order must be in [4, 16]")
        if self.iterations <= 0 or self.learning_rate <= 0:
            raise MoReVisError("iterations and learning_rate must be positive")


@dataclass(frozen=True)
class ProjectionResult:
    y_prime: dict[tuple[str, int], float]
    diagnostics: dict[str, float] = field(default_factory=dict)


def normalize(values) -> list[float]:
    """Affine min-max map onto [0, 1]; constant input maps to all 0.5."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise MoReVisError("cannot normalize an empty sequence")
    lo, hi = float(arr.min()), float(arr.max())
    if hi - lo <= 1e-12 * max(1.0, abs(hi), abs(lo)):
        return [0.5] * arr.size
    return ((arr - lo) / (hi - lo)).tolist()


def project(dataset: MovingRegionDataset, config: ProjectionConfig) -> ProjectionResult:
    units = [(obj.id, t, obs.polygon) for obj, t, obs in dataset.iter_observations()]
    if not units:
        raise MoReVisError("dataset has no observations")
    centroids = np.array([centroid(p) for _, _, p in units])
    diagnostics: dict[str, float] = {}

    spread = centroids.max(axis=0) - centroids.min(axis=0)
    if float(spread.max(initial=0.0)) <= 1e-12:
        diagnostics["degenerate"] = 1.0
        values = np.full(len(units), 0.5)
        return _result(units, values, diagnostics)

    if config.method == "pca-centroids":
        values = _pca_scores(centroids, diagnostics)
    elif config.method == "force-directed":
        values = _force_directed(units, centroids, config, diagnostics)
    else:
        values = _curve_indices(centroids, config, diagnostics)

    return _result(units, np.asarray(normalize(values)), diagnostics)


def _result(units, values, diagnostics) -> ProjectionResult:
    y_prime = {(oid, t): float(v) for (oid, t, _), v in zip(units, values)}
    return ProjectionResult(y_prime, diagnostics)


def _pca_scores(centroids: np.ndarray, diagnostics: dict) -> np.ndarray:
    centered = centroids - centroids.mean(axis=0)
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    axis = vt[0]
    scores = centered @ axis
    # sign ambiguity: require non-negative correlation with x, then y
    cx = float(scores @ centered[:, 0])
    cy = float(scores @ centered[:, 1])
    if cx < -1e-12 or (abs(cx) <= 1e-12 and cy < 0):
        scores = -scores
    total = float((svals**2).sum())
    diagnostics["explained_variance_ratio"] = float(svals[0] ** 2 / total) if total else 1.0
    return scores


def _force_directed(units, centroids, config: ProjectionConfig, diagnostics: dict) -> np.ndarray:
    m = len(units)
    if m == 1:
        return np.zeros(1)
    iu, ju = np.triu_indices(m, 1)
    if config.distance_mode == "region":
        cond = pairwise_min_distance([p for _, _, p in units], iu, ju)
    else:
        cond = np.linalg.norm(centroids[iu] - centroids[ju], axis=1)
    dmat = np.zeros((m, m))
    dmat[iu, ju] = cond
    dmat += dmat.T
    dmax = float(dmat.max())
    if dmax > 0:
        dmat /= dmax  # scale-free; the result is normalized afterwards anyway

    rng = np.random.default_rng(config.seed)
    y = rng.normal(0.0, 0.3, size=m)
    lr = config.learning_rate
    for _ in range(config.iterations):
        diff = y[:, None] - y[None, :]
        absd = np.abs(diff)
        grad = 2.0 * ((absd - dmat) * np.sign(diff)).sum(axis=1)
        y = y - lr * grad / m
    resid = np.abs(y[:, None] - y[None, :]) - dmat
    diagnostics["stress_raw"] = float((resid[iu, ju] ** 2).sum())
    return y


def _curve_indices(centroids: np.ndarray, config: ProjectionConfig, diagnostics: dict) -> np.ndarray:
    side = 1 << config.curve_order
    lo = centroids.min(axis=0)
    span = centroids.max(axis=0) - lo
    span[span <= 0] = 1.0
    cells = np.minimum((centroids - lo) / span * side, side - 1).astype(np.int64)
    if config.method == "morton":
        idx = [_morton_index(int(cx), int(cy), config.curve_order) for cx, cy in cells]
    else:
        idx = [_hilbert_index(int(cx), int(cy), config.curve_order) for cx, cy in cells]
    diagnostics["curve_cells"] = float(side)
    return np.asarray(idx, dtype=float)


def _morton_index(x: int, y: int, order: int) -> int:
    out = 0
    for bit in range(order):
        out |= ((x >> bit) & 1) << (2 * bit)
        out |= ((y >> bit) & 1) << (2 * bit + 1)
    return out


def _hilbert_index(x: int, y: int, order: int) -> int:
    # standard xy -> d walk with quadrant rotation
    d = 0
    s = 1 << (order - 1)
    while s > 0:
        rx = 1 if (x & s) > 0 else 0
        ry = 1 if (y & s) > 0 else 0
        d += s * s * ((3 * rx) ^ ry)
        if ry == 0:
            if rx == 1:
                x = s - 1 - x
                y = s - 1 - y
            x, y = y, x
        s //= 2
    return d
