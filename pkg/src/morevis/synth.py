"""Synthetic orbit dataset: circular regions moving on orbits of different radii.

The four default orbits give one small-orbit object with constant area, two
co-moving objects whose radii grow linearly until they almost fully overlap in
the second half of the period, and one counter-rotating object with shrinking
radius.  Circles are discretized as regular 32-gons.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import MovingObject, MovingRegionDataset, RegionObservation
from .geometry import regular_polygon

CIRCLE_SEGMENTS = 32


@dataclass(frozen=True)
class OrbitSpec:
    """One object's trajectory: angle(t) = phase + sweep * t/(T-1)."""

    orbit_radius: float
    phase: float
    sweep: float
    radius_start: float
    radius_end: float
    label: str = ""


# chord between the two co-moving orbits shrinks from ~2.97 to ~0.6 while the
# region radii grow 0.5 -> 1.8, so their overlap starts near mid-period and is
# almost total at the end; no other pair ever intersects.
DEFAULT_ORBITS = (
    OrbitSpec(2.0, 0.6, 4.2, 0.8, 0.8, "small orbit, constant size"),
    OrbitSpec(6.0, 0.0, 4.2, 0.5, 1.8, "growing pair a"),
    OrbitSpec(6.0, 0.5, 3.8, 0.5, 1.8, "growing pair b"),
    OrbitSpec(9.0, 1.2, -4.2, 2.2, 0.7, "counter-rotating, shrinking"),
)


def generate_synthetic_orbits(
    num_objects: int,
    num_timesteps: int,
    seed: int = 0,
    orbits: tuple[OrbitSpec, ...] | None = None,
) -> MovingRegionDataset:
    """Deterministic orbit dataset; extra objects are jittered template copies."""
    if num_objects < 1:
        raise ValueError("num_objects must be >= 1")
    if num_timesteps < 2:
        raise ValueError("num_timesteps must be >= 2")
    templates = list(orbits if orbits is not None else DEFAULT_ORBITS)
    rng = np.random.default_rng(seed)
    specs: list[OrbitSpec] = []
    for i in range(num_objects):
        base = templates[i % len(templates)]
        if i < len(templates):
            specs.append(base)
        else:
            specs.append(
                OrbitSpec(
                    orbit_radius=base.orbit_radius * float(rng.uniform(1.2, 1.8)),
                    phase=float(rng.uniform(0, 2 * np.pi)),
                    sweep=base.sweep * float(rng.uniform(0.8, 1.2)),
                    radius_start=base.radius_start * float(rng.uniform(0.7, 1.3)),
                    radius_end=base.radius_end * float(rng.uniform(0.7, 1.3)),
                    label=f"jittered {base.label}",
                )
            )

    objects = []
    for i, spec in enumerate(specs):
        direction = "cw" if spec.sweep < 0 else "ccw"
        observations = {}
        for t in range(num_timesteps):
            frac = t / (num_timesteps - 1)
            angle = spec.phase + spec.sweep * frac
            radius = spec.radius_start + (spec.radius_end - spec.radius_start) * frac
            cx = spec.orbit_radius * np.cos(angle)
            cy = spec.orbit_radius * np.sin(angle)
            poly = regular_polygon(float(cx), float(cy), float(radius), CIRCLE_SEGMENTS)
            observations[t] = RegionObservation(
                poly, {"radius": float(radius), "direction": direction}
            )
        objects.append(MovingObject(f"obj{i + 1}", spec.label or f"object {i + 1}", observations))

    return MovingRegionDataset(
        objects=objects,
        timesteps=list(range(num_timesteps)),
        attribute_schema=[("direction", "categorical"), ("radius", "numeric")],
    )
