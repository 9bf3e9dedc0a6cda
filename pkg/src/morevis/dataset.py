"""Moving-regions data model, disk formats, and validation.

Three ingestion formats are supported:

* regions-json: the native format (see ``save_dataset`` for the schema);
* tracking-csv: ``id,t,xmin,ymin,xmax,ymax[,attr...]`` bounding boxes;
* hurdat-csv:   ``id,timestamp,lon,lat,extent_km[,wind,pressure]`` storm
  fixes, bucketed into fixed-length day windows and hulled per window.

Datasets are immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np

from . import MoReVisError
from .geometry import ConvexPolygon, convex_hull, polygon_violations

FORMATS = ("regions-json", "tracking-csv", "hurdat-csv")
KM_PER_DEGREE = 111.32  # plate carree: lon/lat degrees scaled uniformly


class DatasetError(MoReVisError):
    pass


class ParseError(DatasetError):
    pass


class ValidationError(DatasetError):
    def __init__(self, report: "ValidationReport"):
        super().__init__("invalid dataset:\n" + report.describe())
        self.report = report


@dataclass(frozen=True)
class RegionObservation:
    polygon: ConvexPolygon
    attributes: dict[str, float | str] = field(default_factory=dict)


@dataclass(frozen=True)
class MovingObject:
    id: str
    label: str
    observations: dict[int, RegionObservation]

    def timesteps(self) -> list[int]:
        return sorted(self.observations)


@dataclass(frozen=True)
class MovingRegionDataset:
    objects: list[MovingObject]
    timesteps: list[int]
    attribute_schema: list[tuple[str, str]] = field(default_factory=list)

    def object_map(self) -> dict[str, MovingObject]:
        return {o.id: o for o in self.objects}

    def observed_at(self, t: int) -> list[MovingObject]:
        return [o for o in self.objects if t in o.observations]

    def iter_observations(self):
        """Yield (object, timestep, observation) in object-major, time-minor order."""
        for obj in self.objects:
            for t in sorted(obj.observations):
                yield obj, t, obj.observations[t]

    def bounds(self) -> tuple[float, float, float, float]:
        lo = np.array([np.inf, np.inf])
        hi = -lo
        for _, _, obs in self.iter_observations():
            lo = np.minimum(lo, obs.polygon.vertices.min(axis=0))
            hi = np.maximum(hi, obs.polygon.vertices.max(axis=0))
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])


@dataclass(frozen=True)
class Violation:
    code: str
    object_id: str | None
    timestep: int | None
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    violations: list[Violation]

    def ok(self) -> bool:
        return not self.violations

    def describe(self) -> str:
        return "\n".join(
            f"  [{v.code}] object={v.object_id} t={v.timestep}: {v.detail}"
            for v in self.violations
        )


def validate(dataset: MovingRegionDataset) -> ValidationReport:
    """Check every dataset invariant; empty report iff the dataset is valid."""
    out: list[Violation] = []
    ts = dataset.timesteps
    if any(b <= a for a, b in zip(ts, ts[1:])):
        out.append(Violation("timesteps", None, None, "timestep ids not strictly increasing"))
    known = set(ts)
    seen_ids: set[str] = set()
    schema = dict(dataset.attribute_schema)
    for obj in dataset.objects:
        if obj.id in seen_ids:
            out.append(Violation("duplicate-id", obj.id, None, "object id reused"))
        seen_ids.add(obj.id)
        if not obj.observations:
            out.append(Violation("no-observations", obj.id, None, "object never observed"))
        for t, obs in sorted(obj.observations.items()):
            if t not in known:
                out.append(Violation("unknown-timestep", obj.id, t, "timestep not declared"))
            for code in polygon_violations(obs.polygon.vertices):
                out.append(Violation(code, obj.id, t, "polygon fails invariant"))
            for name in obs.attributes:
                if name not in schema:
                    out.append(Violation("unknown-attribute", obj.id, t, f"attribute {name!r}"))
    return ValidationReport(out)


def _raise_if_invalid(dataset: MovingRegionDataset) -> MovingRegionDataset:
    report = validate(dataset)
    if not report.ok():
        raise ValidationError(report)
    return dataset


def _polygon_from_points(points, *, hull: bool, where: str) -> ConvexPolygon:
    pts = np.asarray(points, dtype=float)
    problems = polygon_violations(pts)
    if not problems:
        return ConvexPolygon(pts)
    if hull:
        try:
            return convex_hull(pts)
        except Exception as exc:
            raise ParseError(f"{where}: cannot hull degenerate polygon ({exc})") from exc
    raise ParseError(f"{where}: invalid polygon ({', '.join(problems)}); pass hull=True to repair")


def _infer_schema(objects: list[MovingObject]) -> list[tuple[str, str]]:
    kinds: dict[str, str] = {}
    for obj in objects:
        for obs in obj.observations.values():
            for name, value in obs.attributes.items():
                kind = "numeric" if isinstance(value, (int, float)) else "categorical"
                if kinds.setdefault(name, kind) != kind:
                    kinds[name] = "categorical"
    return sorted(kinds.items())


# --- regions-json -----------------------------------------------------------


def load_regions_json(path: str | Path, hull: bool = False) -> MovingRegionDataset:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        timesteps = [int(t) for t in doc["timesteps"]]
        objects = []
        for entry in doc["objects"]:
            oid = str(entry["id"])
            observations = {}
            for t_str, rec in entry["observations"].items():
                poly = _polygon_from_points(
                    rec["polygon"], hull=hull, where=f"object {oid} t={t_str}"
                )
                observations[int(t_str)] = RegionObservation(poly, dict(rec.get("attributes", {})))
            objects.append(MovingObject(oid, str(entry.get("label", oid)), observations))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed regions-json ({exc!r})") from exc
    schema = [tuple(pair) for pair in doc.get("attribute_schema", [])] or _infer_schema(objects)
    return _raise_if_invalid(MovingRegionDataset(objects, timesteps, schema))


def save_dataset(dataset: MovingRegionDataset, path: str | Path) -> None:
    """Write regions-json. load(save(d)) == d."""
    doc = {
        "timesteps": list(dataset.timesteps),
        "attribute_schema": [list(pair) for pair in dataset.attribute_schema],
        "objects": [
            {
                "id": obj.id,
                "label": obj.label,
                "observations": {
                    str(t): {
                        "polygon": obs.polygon.vertices.tolist(),
                        "attributes": obs.attributes,
                    }
                    for t, obs in sorted(obj.observations.items())
                },
            }
            for obj in dataset.objects
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=1))


# --- tracking-csv ------------------------------------------------------------


def load_tracking_csv(path: str | Path, hull: bool = False) -> MovingRegionDataset:
    rows = _read_csv(path, required=["id", "t", "xmin", "ymin", "xmax", "ymax"])
    attr_names = [c for c in rows.fieldnames if c not in ("id", "t", "xmin", "ymin", "xmax", "ymax")]
    per_object: dict[str, dict[int, RegionObservation]] = {}
    order: list[str] = []
    for ln, row in enumerate(rows, start=2):
        try:
            oid = row["id"]
            t = int(row["t"])
            x0, y0, x1, y1 = (float(row[k]) for k in ("xmin", "ymin", "xmax", "ymax"))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{path}:{ln}: bad row ({exc})") from exc
        if x1 <= x0 or y1 <= y0:
            raise ParseError(f"{path}:{ln}: record {oid}: empty box")
        poly = ConvexPolygon(np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float))
        attrs = {name: _coerce(row[name]) for name in attr_names if row.get(name) not in (None, "")}
        if oid not in per_object:
            per_object[oid] = {}
            order.append(oid)
        if t in per_object[oid]:
            raise ParseError(f"{path}:{ln}: record {oid}: duplicate timestep {t}")
        per_object[oid][t] = RegionObservation(poly, attrs)
    objects = [MovingObject(oid, oid, per_object[oid]) for oid in order]
    timesteps = sorted({t for obs in per_object.values() for t in obs})
    return _raise_if_invalid(MovingRegionDataset(objects, timesteps, _infer_schema(objects)))


def _coerce(text: str) -> float | str:
    try:
        return float(text)
    except ValueError:
        return text


def _read_csv(path: str | Path, required: list[str]):
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    reader = csv.DictReader(handle)
    if reader.fieldnames is None or reader.fieldnames[: len(required)] != required:
        handle.close()
        raise ParseError(f"{path}: expected header starting with {','.join(required)}")
    return reader


# --- hurdat-csv ---------------------------------------------------------------


def load_hurdat_csv(
    path: str | Path,
    hull: bool = False,
    window_days: float = 2.0,
    ignore_year: bool = True,
) -> MovingRegionDataset:
    """Storm fixes -> one hulled region per (storm, day window).

    Each fix contributes a square of side ``extent_km`` (converted to degrees)
    centered at its lon/lat; the window polygon is the convex hull of all
    square corners inside the window.  With ``ignore_year`` the window index
    comes from the day-of-year, which folds all years together.
    """
    rows = _read_csv(path, required=["id", "timestamp", "lon", "lat", "extent_km"])
    extra = [c for c in rows.fieldnames if c in ("wind", "pressure")]
    fixes: dict[str, dict[int, list]] = {}
    order: list[str] = []
    for ln, row in enumerate(rows, start=2):
        oid = row["id"]
        try:
            stamp = datetime.fromisoformat(row["timestamp"])
            lon, lat, extent = float(row["lon"]), float(row["lat"]), float(row["extent_km"])
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{path}:{ln}: record {oid}: {exc}") from exc
        if extent <= 0:
            raise ParseError(f"{path}:{ln}: record {oid}: non-positive extent")
        if ignore_year:
            day = stamp.timetuple().tm_yday - 1 + stamp.hour / 24.0
        else:
            day = stamp.toordinal() + stamp.hour / 24.0
        window = int(day // window_days)
        half = extent / KM_PER_DEGREE / 2.0
        corners = [
            (lon - half, lat - half), (lon + half, lat - half),
            (lon + half, lat + half), (lon - half, lat + half),
        ]
        attrs = {name: float(row[name]) for name in extra if row.get(name) not in (None, "")}
        if oid not in fixes:
            fixes[oid] = {}
            order.append(oid)
        fixes[oid].setdefault(window, []).append((corners, attrs))
    objects = []
    for oid in order:
        observations = {}
        for window, recs in sorted(fixes[oid].items()):
            pts = [c for corners, _ in recs for c in corners]
            poly = convex_hull(pts)
            attrs: dict[str, float | str] = {}
            for name in extra:
                vals = [a[name] for _, a in recs if name in a]
                if vals:
                    attrs[name] = float(np.mean(vals))
            observations[window] = RegionObservation(poly, attrs)
        objects.append(MovingObject(oid, oid, observations))
    timesteps = sorted({t for oid in order for t in fixes[oid]})
    return _raise_if_invalid(MovingRegionDataset(objects, timesteps, _infer_schema(objects)))


def load_dataset(path: str | Path, format: str, hull: bool = False, **kwargs) -> MovingRegionDataset:
    if format == "regions-json":
        return load_regions_json(path, hull=hull, **kwargs)
    if format == "tracking-csv":
        return load_tracking_csv(path, hull=hull, **kwargs)
    if format == "hurdat-csv":
        return load_hurdat_csv(path, hull=hull, **kwargs)
    raise ParseError(f"unknown format {format!r}; expected one of {', '.join(FORMATS)}")
