import numpy as np
import pytest

from morevis.dataset import MovingObject, MovingRegionDataset, RegionObservation
from morevis.geometry import GeometryError, convex_hull


def random_polygon(rng, center, scale):
    for _ in range(10):
        pts = center + rng.uniform(-scale, scale, size=(int(rng.integers(3, 9)), 2))
        try:
            return convex_hull(pts)
        except GeometryError:
            continue
    raise AssertionError("could not draw a convex polygon")


def random_dataset(rng, max_objects=8, max_timesteps=20) -> MovingRegionDataset:
    """Random moving regions in a shared box, with random missing observations."""
    n_obj = int(rng.integers(1, max_objects + 1))
    n_t = int(rng.integers(2, max_timesteps + 1))
    objects = []
    for i in range(n_obj):
        center = rng.uniform(0, 10, size=2)
        drift = rng.uniform(-0.6, 0.6, size=2)
        scale = float(rng.uniform(0.3, 1.6))
        observations = {}
        for t in range(n_t):
            if rng.uniform() < 0.15 and n_t > 2:
                continue  # unobserved at this timestep
            pos = center + drift * t + rng.uniform(-0.3, 0.3, size=2)
            observations[t] = RegionObservation(random_polygon(rng, pos, scale))
        if not observations:
            observations[0] = RegionObservation(random_polygon(rng, center, scale))
        objects.append(MovingObject(f"obj{i}", f"object {i}", observations))
    return MovingRegionDataset(objects, list(range(n_t)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)
