"""Loss-free JSON serialization of layouts (schema v1)."""

from __future__ import annotations

import json
from pathlib import Path

from .dataset import ParseError
from .layout import (
    Layout,
    LayoutConfig,
    PairRecord,
    RibbonLink,
    RibbonRect,
    TimeSliceSolution,
)
from .metrics import MetricsReport
from .projection import ProjectionConfig

SCHEMA_VERSION = 1
SCHEMA_PATH = Path(__file__).parent / "schemas" / "layout_v1.json"


def layout_to_json(layout: Layout, metrics: MetricsReport | None = None) -> dict:
    """Schema-versioned document; per-slice wall-clock times are not included
    so identical inputs serialize byte-identically."""
    config = layout.config
    doc = {
        "schema_version": SCHEMA_VERSION,
        "area_scale": layout.area_scale,
        "timesteps": list(layout.timesteps),
        "config": {
            "lambda1": config.lambda1,
            "lambda2": config.lambda2,
            "column_fill": config.column_fill,
            "max_group_binaries": config.max_group_binaries,
            "y_bounds": list(config.y_bounds),
            "jobs": config.jobs,
            "node_limit": config.node_limit,
            "projection": {
                "method": config.projection.method,
                "distance_mode": config.projection.distance_mode,
                "curve_order": config.projection.curve_order,
                "iterations": config.projection.iterations,
                "learning_rate": config.projection.learning_rate,
                "seed": config.projection.seed,
            },
        },
        "rects": [
            {
                "object_id": r.object_id,
                "timestep": r.timestep,
                "y_center": r.y_center,
                "height": r.height,
                "y_prime": r.y_prime,
            }
            for r in layout.rects
        ],
        "links": [
            {
                "object_id": l.object_id,
                "t_from": l.t_from,
                "t_to": l.t_to,
                "spurious_with": list(l.spurious_crossings),
            }
            for l in layout.links
        ],
        "slices": [
            {
                "timestep": s.timestep,
                "groups": [list(g) for g in s.groups],
                "pairs": [
                    {
                        "i": p.i,
                        "j": p.j,
                        "kind": p.kind,
                        "w": p.w,
                        "intersection": p.intersection,
                        "k": p.k,
                        "c": p.c,
                    }
                    for p in s.pairs
                ],
                "f1": s.f1,
                "f2": s.f2,
                "f3": s.f3,
                "f1_group_mean": s.f1_group_mean,
                "f2_group_mean": s.f2_group_mean,
                "status": s.status,
                "nodes_explored": s.nodes_explored,
            }
            for s in layout.slices
        ],
        "metrics": metrics.to_dict() if metrics is not None else None,
    }
    return doc


def parse_layout_json(doc: dict) -> tuple[Layout, dict | None]:
    try:
        if doc["schema_version"] != SCHEMA_VERSION:
            raise ParseError(f"unsupported layout schema version {doc['schema_version']}")
        cfg = doc["config"]
        config = LayoutConfig(
            lambda1=cfg["lambda1"],
            lambda2=cfg["lambda2"],
            column_fill=cfg["column_fill"],
            max_group_binaries=cfg["max_group_binaries"],
            projection=ProjectionConfig(**cfg["projection"]),
            y_bounds=tuple(cfg["y_bounds"]),
            jobs=cfg["jobs"],
            node_limit=cfg["node_limit"],
        )
        rects = tuple(
            RibbonRect(r["object_id"], r["timestep"], r["y_center"], r["height"], r["y_prime"])
            for r in doc["rects"]
        )
        links = tuple(
            RibbonLink(l["object_id"], l["t_from"], l["t_to"], tuple(l["spurious_with"]))
            for l in doc["links"]
        )
        slices = tuple(
            TimeSliceSolution(
                timestep=s["timestep"],
                groups=tuple(tuple(g) for g in s["groups"]),
                pairs=tuple(
                    PairRecord(
                        p["i"], p["j"], p["kind"], p["w"], p["intersection"],
                        k=p.get("k"), c=p.get("c"),
                    )
                    for p in s["pairs"]
                ),
                f1=s["f1"],
                f2=s["f2"],
                f3=s["f3"],
                f1_group_mean=s["f1_group_mean"],
                f2_group_mean=s["f2_group_mean"],
                status=s["status"],
                runtime_s=0.0,
                nodes_explored=s["nodes_explored"],
            )
            for s in doc["slices"]
        )
        layout = Layout(
            rects=rects,
            links=links,
            slices=slices,
            timesteps=tuple(doc["timesteps"]),
            area_scale=doc["area_scale"],
            config=config,
        )
        return layout, doc.get("metrics")
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed layout document ({exc!r})") from exc


def write_layout(layout: Layout, path: str | Path, metrics: MetricsReport | None = None) -> None:
    Path(path).write_text(json.dumps(layout_to_json(layout, metrics), indent=1))


def read_layout(path: str | Path) -> tuple[Layout, dict | None]:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return parse_layout_json(doc)


def load_schema() -> dict:
    return json.loads(SCHEMA_PATH.read_text())
