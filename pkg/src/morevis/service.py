"""Read-only HTTP service exposing a computed layout and its source dataset.

The layout is computed offline (CLI `layout`) and loaded at startup; every
endpoint is a pure read, so the service is safe under concurrent requests.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .dataset import MovingRegionDataset
from .geometry import centroid
from .layout import Layout
from .metrics import MetricsReport

OVERLAP_TOL = 1e-6

# parallel-coordinates aggregates computed server-side per object
DERIVED_ATTRIBUTES = ("mean_area", "path_length", "presence")


class FilterPredicate(BaseModel):
    attribute: str
    min: float
    max: float


class FilterRequest(BaseModel):
    predicates: list[FilterPredicate] = []


def object_aggregates(dataset: MovingRegionDataset) -> dict[str, dict[str, float]]:
    """Per-object numeric summary: attribute means plus movement aggregates."""
    from .geometry import area as poly_area

    numeric = [name for name, kind in dataset.attribute_schema if kind == "numeric"]
    out: dict[str, dict[str, float]] = {}
    for obj in dataset.objects:
        ts = sorted(obj.observations)
        cents = [centroid(obj.observations[t].polygon) for t in ts]
        path = float(sum(np.linalg.norm(b - a) for a, b in zip(cents, cents[1:])))
        aggregates = {
            "mean_area": float(np.mean([poly_area(obj.observations[t].polygon) for t in ts])),
            "path_length": path,
            "presence": float(len(ts)),
        }
        for name in numeric:
            vals = [
                float(obj.observations[t].attributes[name])
                for t in ts
                if name in obj.observations[t].attributes
            ]
            if vals:
                aggregates[name] = float(np.mean(vals))
        out[obj.id] = aggregates
    return out


def intersection_slices(
    layout: Layout, t0: int, t1: int, object_ids: set[str] | None = None
) -> list[dict]:
    """One intersection-graph slice per timestep in [t0, t1].

    Edges are overlapping rectangle pairs; real edges carry the 2D area w,
    spurious ones the achieved 1D overlap.  Zero-degree nodes are dropped.
    """
    out = []
    for s in layout.slices:
        if not t0 <= s.timestep <= t1:
            continue
        edges = []
        for p in s.pairs:
            if object_ids is not None and (p.i not in object_ids or p.j not in object_ids):
                continue
            if p.kind == "A":
                edges.append({"source": p.i, "target": p.j, "area": p.w, "kind": "real"})
            elif p.intersection > OVERLAP_TOL:
                edges.append(
                    {"source": p.i, "target": p.j, "area": p.intersection, "kind": "spurious"}
                )
        nodes = sorted({e["source"] for e in edges} | {e["target"] for e in edges})
        out.append({"timestep": s.timestep, "nodes": nodes, "edges": edges})
    return out


def create_app(
    layout: Layout | None = None,
    dataset: MovingRegionDataset | None = None,
    document: dict | None = None,
    metrics: MetricsReport | dict | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="morevis service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    state = app.state
    state.layout = layout
    state.dataset = dataset
    state.document = document
    if layout is not None and document is None:
        from .export import layout_to_json

        metrics_dict = metrics.to_dict() if isinstance(metrics, MetricsReport) else metrics
        state.document = layout_to_json(layout)
        if metrics_dict is not None:
            state.document["metrics"] = metrics_dict
    state.body = None
    state.etag = None
    state.aggregates = object_aggregates(dataset) if dataset is not None else {}

    def ready():
        if state.layout is None or state.dataset is None:
            raise HTTPException(status_code=503, detail="layout not loaded yet")

    @app.get("/layout")
    def get_layout():
        ready()
        if state.body is None:
            state.body = json.dumps(state.document).encode()
            state.etag = '"' + hashlib.sha256(state.body).hexdigest()[:32] + '"'
        return Response(content=state.body, media_type="application/json", headers={"ETag": state.etag})

    @app.get("/meta")
    def get_meta():
        ready()
        x0, y0, x1, y1 = state.dataset.bounds()
        return {
            "timesteps": list(state.layout.timesteps),
            "bounds": [x0, y0, x1, y1],
            "attribute_schema": [list(p) for p in state.dataset.attribute_schema],
            "derived_attributes": list(DERIVED_ATTRIBUTES),
            "object_ids": [o.id for o in state.dataset.objects],
        }

    @app.get("/intersections")
    def get_intersections(t0: int, t1: int, objects: str | None = None):
        ready()
        ts = state.layout.timesteps
        if t0 > t1 or t0 < min(ts) or t1 > max(ts):
            raise HTTPException(status_code=400, detail=f"range [{t0}, {t1}] outside layout")
        subset = set(objects.split(",")) if objects else None
        return intersection_slices(state.layout, t0, t1, subset)

    @app.get("/objects")
    def get_objects():
        ready()
        return [
            {"id": obj.id, "label": obj.label, "aggregates": state.aggregates[obj.id]}
            for obj in state.dataset.objects
        ]

    @app.get("/objects/{object_id}/track")
    def get_object_track(object_id: str):
        ready()
        obj = state.dataset.object_map().get(object_id)
        if obj is None:
            raise HTTPException(status_code=404, detail=f"unknown object {object_id!r}")
        return [
            {
                "timestep": t,
                "centroid": [float(v) for v in centroid(obs.polygon)],
                "polygon": obs.polygon.vertices.tolist(),
                "attributes": obs.attributes,
            }
            for t, obs in sorted(obj.observations.items())
        ]

    @app.get("/frames/{timestep}")
    def get_frame(timestep: int):
        ready()
        if timestep not in state.layout.timesteps:
            raise HTTPException(status_code=404, detail=f"timestep {timestep} not in layout")
        return [
            {
                "object_id": obj.id,
                "polygon": obj.observations[timestep].polygon.vertices.tolist(),
                "attributes": obj.observations[timestep].attributes,
            }
            for obj in state.dataset.observed_at(timestep)
        ]

    @app.post("/filter")
    def filter_objects(request: FilterRequest):
        ready()
        known = set(DERIVED_ATTRIBUTES)
        known.update(name for name, kind in state.dataset.attribute_schema if kind == "numeric")
        for pred in request.predicates:
            if pred.attribute not in known:
                raise HTTPException(status_code=400, detail=f"unknown attribute {pred.attribute!r}")
        ids = []
        for obj in state.dataset.objects:
            agg = state.aggregates[obj.id]
            if all(
                pred.attribute in agg and pred.min <= agg[pred.attribute] <= pred.max
                for pred in request.predicates
            ):
                ids.append(obj.id)
        return {"object_ids": ids}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
