import json

import numpy as np
import pytest

from morevis.dataset import (
    MovingObject,
    MovingRegionDataset,
    ParseError,
    RegionObservation,
    ValidationError,
    load_dataset,
    save_dataset,
    validate,
)
from morevis.geometry import ConvexPolygon, area, box_polygon, convex_hull, intersection_area
from morevis.synth import generate_synthetic_orbits


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


# --- regions-json -------------------------------------------------------------


def test_load_regions_json_minimal(tmp_path):
    doc = {
        "timesteps": [0],
        "objects": [
            {
                "id": "a",
                "label": "A",
                "observations": {
                    "0": {"polygon": [[0, 0], [1, 0], [1, 1], [0, 1]], "attributes": {}}
                },
            }
        ],
    }
    ds = load_dataset(write(tmp_path, "d.json", json.dumps(doc)), "regions-json")
    assert len(ds.objects) == 1
    assert ds.timesteps == [0]
    assert area(ds.objects[0].observations[0].polygon) == 1.0


def test_regions_json_round_trip(tmp_path):
    ds = generate_synthetic_orbits(4, 6, seed=3)
    path = tmp_path / "out.json"
    save_dataset(ds, path)
    again = load_dataset(path, "regions-json")
    assert again == ds
    save_dataset(again, tmp_path / "out2.json")
    assert (tmp_path / "out.json").read_text() == (tmp_path / "out2.json").read_text()


def test_regions_json_rejects_nonconvex(tmp_path):
    doc = {
        "timesteps": [0],
        "objects": [
            {
                "id": "bad",
                "label": "bad",
                "observations": {
                    "0": {"polygon": [[0, 0], [1, 1], [1, 0], [0, 1]], "attributes": {}}
                },
            }
        ],
    }
    p = write(tmp_path, "bad.json", json.dumps(doc))
    with pytest.raises(ParseError, match="bad"):
        load_dataset(p, "regions-json")
    # --hull repairs instead of rejecting
    ds = load_dataset(p, "regions-json", hull=True)
    assert area(ds.objects[0].observations[0].polygon) > 0


def test_regions_json_parse_error(tmp_path):
    with pytest.raises(ParseError):
        load_dataset(write(tmp_path, "x.json", "{not json"), "regions-json")
    with pytest.raises(ParseError):
        load_dataset(tmp_path / "missing.json", "regions-json")


# --- tracking-csv ---------------------------------------------------------------


def test_tracking_csv_box_to_polygon(tmp_path):
    p = write(tmp_path, "t.csv", "id,t,xmin,ymin,xmax,ymax\nobj1,5,10,20,30,40\n")
    ds = load_dataset(p, "tracking-csv")
    poly = ds.objects[0].observations[5].polygon
    assert poly.vertices.tolist() == [[10, 20], [30, 20], [30, 40], [10, 40]]


def test_tracking_csv_attributes(tmp_path):
    p = write(
        tmp_path,
        "t.csv",
        "id,t,xmin,ymin,xmax,ymax,speed,kind\na,0,0,0,1,1,2.5,car\na,1,1,1,2,2,3.5,car\n",
    )
    ds = load_dataset(p, "tracking-csv")
    assert dict(ds.attribute_schema) == {"speed": "numeric", "kind": "categorical"}
    assert ds.objects[0].observations[0].attributes == {"speed": 2.5, "kind": "car"}


def test_tracking_csv_bad_header(tmp_path):
    with pytest.raises(ParseError):
        load_dataset(write(tmp_path, "t.csv", "a,b\n1,2\n"), "tracking-csv")


def test_tracking_csv_empty_box_names_record(tmp_path):
    p = write(tmp_path, "t.csv", "id,t,xmin,ymin,xmax,ymax\nbox9,0,5,5,5,9\n")
    with pytest.raises(ParseError, match="box9"):
        load_dataset(p, "tracking-csv")


# --- hurdat-csv -------------------------------------------------------------------


def test_hurdat_window_hull(tmp_path):
    # 8 fixes over 2 days -> a single 2-day window observation
    rows = ["id,timestamp,lon,lat,extent_km,wind,pressure"]
    fixes = []
    rng = np.random.default_rng(0)
    for i in range(8):
        hour = i * 6
        lon = -40 + 0.3 * i
        lat = 12 + 0.1 * float(rng.uniform(-1, 1))
        extent = 50 + 10 * i
        fixes.append((lon, lat, extent))
        rows.append(f"h1,2004-01-01T{hour % 24:02d}:00,{lon},{lat},{extent},80,990")
    rows[1 + 4 :] = [r.replace("2004-01-01", "2004-01-02") for r in rows[1 + 4 :]]
    ds = load_dataset(write(tmp_path, "h.csv", "\n".join(rows)), "hurdat-csv")
    assert ds.timesteps == [0]
    obs = ds.objects[0].observations[0]
    corners = []
    for lon, lat, extent in fixes:
        half = extent / 111.32 / 2
        corners += [
            (lon - half, lat - half), (lon + half, lat - half),
            (lon + half, lat + half), (lon - half, lat + half),
        ]
    expected = convex_hull(corners)
    assert obs.polygon == expected
    assert obs.attributes["wind"] == pytest.approx(80.0)


def test_hurdat_year_folding(tmp_path):
    text = (
        "id,timestamp,lon,lat,extent_km\n"
        "a,2004-02-01T00:00,-40,12,50\n"
        "b,2010-02-01T12:00,-42,13,60\n"
    )
    ds = load_dataset(write(tmp_path, "h.csv", text), "hurdat-csv")
    assert len(ds.timesteps) == 1  # same day-of-year window despite different years


def test_hurdat_bad_extent(tmp_path):
    text = "id,timestamp,lon,lat,extent_km\nz,2004-03-01T00:00,-40,12,0\n"
    with pytest.raises(ParseError, match="z"):
        load_dataset(write(tmp_path, "h.csv", text), "hurdat-csv")


# --- validate ------------------------------------------------------------------


def square_obs(x=0.0):
    return RegionObservation(box_polygon(x, 0, x + 1, 1))


def test_validate_ok():
    ds = MovingRegionDataset([MovingObject("a", "a", {0: square_obs()})], [0])
    assert validate(ds).ok()


def test_validate_winding():
    cw = ConvexPolygon.__new__(ConvexPolygon)
    object.__setattr__(cw, "vertices", np.array([[0, 0], [0, 1], [1, 1], [1, 0]], dtype=float))
    ds = MovingRegionDataset(
        [MovingObject("a", "a", {3: RegionObservation(cw)})], [3]
    )
    report = validate(ds)
    assert [v.code for v in report.violations] == ["winding"]
    assert report.violations[0].object_id == "a"
    assert report.violations[0].timestep == 3


def test_validate_self_intersecting_quad():
    bad = ConvexPolygon.__new__(ConvexPolygon)
    object.__setattr__(bad, "vertices", np.array([[0, 0], [1, 1], [1, 0], [0, 1]], dtype=float))
    ds = MovingRegionDataset([MovingObject("a", "a", {0: RegionObservation(bad)})], [0])
    assert "non-convex" in [v.code for v in validate(ds).violations]


def test_validate_duplicate_ids_and_unknown_timestep():
    ds = MovingRegionDataset(
        [
            MovingObject("a", "a", {0: square_obs()}),
            MovingObject("a", "a2", {7: square_obs(3)}),
        ],
        [0],
    )
    codes = {v.code for v in validate(ds).violations}
    assert {"duplicate-id", "unknown-timestep"} <= codes


# --- synthetic orbits -------------------------------------------------------------


def test_synth_growing_pair_overlaps_second_half():
    ds = generate_synthetic_orbits(4, 50, seed=0)
    objs = ds.object_map()
    for t in range(25, 50):
        w = intersection_area(
            objs["obj2"].observations[t].polygon, objs["obj3"].observations[t].polygon
        )
        assert w > 0, f"expected overlap at t={t}"
    # and no overlap right at the start
    w0 = intersection_area(objs["obj2"].observations[0].polygon, objs["obj3"].observations[0].polygon)
    assert w0 == 0.0


def test_synth_minimal():
    ds = generate_synthetic_orbits(1, 2, seed=0)
    assert len(ds.objects) == 1
    areas = [area(obs.polygon) for _, _, obs in ds.iter_observations()]
    assert len(areas) == 2
    assert areas[0] == pytest.approx(areas[1])


def test_synth_deterministic(tmp_path):
    a, b = (generate_synthetic_orbits(7, 20, seed=9) for _ in range(2))
    save_dataset(a, tmp_path / "a.json")
    save_dataset(b, tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_synth_only_one_intersecting_pair():
    ds = generate_synthetic_orbits(4, 50, seed=0)
    for t in ds.timesteps:
        present = ds.observed_at(t)
        for i in range(len(present)):
            for j in range(i + 1, len(present)):
                w = intersection_area(
                    present[i].observations[t].polygon, present[j].observations[t].polygon
                )
                if {present[i].id, present[j].id} != {"obj2", "obj3"}:
                    assert w == 0.0


def test_synth_validates():
    assert validate(generate_synthetic_orbits(6, 12, seed=1)).ok()
