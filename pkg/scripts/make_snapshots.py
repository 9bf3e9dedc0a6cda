"""Generate the recorded snapshot datasets under data/.

Stand-ins for the two evaluation datasets (pedestrian tracking and hurricane
tracks): same object counts, timestep counts, and intersection character, so
the paper-scale acceptance checks have stable, reproducible inputs.

Run from the repo root:  python3 scripts/make_snapshots.py
"""

from __future__ import annotations

import csv
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

OUT = Path(__file__).parent.parent / "data"

HALL_W, HALL_H = 20.0, 12.0  # metres
N_PEOPLE = 14
N_FRAMES = 234

N_STORMS = 70


def make_wildtrack_like(seed=7) -> list[tuple]:
    """14 tracked people over 234 timesteps; groups meet and split."""
    rng = np.random.default_rng(seed)
    rows = []
    # three social groups walk together for part of the period
    group_of = {i: g for g, members in enumerate(([0, 1, 2], [3, 4], [5, 6, 7])) for i in members}
    group_anchor = {g: rng.uniform([2, 2], [HALL_W - 2, HALL_H - 2]) for g in range(3)}

    for pid in range(N_PEOPLE):
        start = int(rng.integers(0, 60))
        length = int(rng.integers(140, N_FRAMES - start + 1)) if start < 90 else N_FRAMES - start
        end = min(N_FRAMES, start + length)
        pos = rng.uniform([1.5, 1.5], [HALL_W - 1.5, HALL_H - 1.5])
        goal = rng.uniform([1.5, 1.5], [HALL_W - 1.5, HALL_H - 1.5])
        for t in range(start, end):
            to_goal = goal - pos
            dist = float(np.linalg.norm(to_goal))
            if dist < 0.6:
                if pid in group_of and rng.uniform() < 0.6:
                    goal = group_anchor[group_of[pid]] + rng.uniform(-0.9, 0.9, 2)
                else:
                    goal = rng.uniform([1.5, 1.5], [HALL_W - 1.5, HALL_H - 1.5])
                to_goal = goal - pos
                dist = float(np.linalg.norm(to_goal))
            step = to_goal / max(dist, 1e-9) * min(0.35, dist)
            pos = pos + step + rng.normal(0, 0.05, 2)
            pos = np.clip(pos, [1.0, 1.0], [HALL_W - 1.0, HALL_H - 1.0])
            # boxes grow toward the camera line y = 0
            scale = 0.7 + 1.9 * (1.0 - pos[1] / HALL_H)
            bw = 0.55 * scale
            bh = 0.9 * scale
            rows.append(
                (
                    f"person{pid:02d}",
                    t,
                    round(pos[0] - bw / 2, 3),
                    round(pos[1] - bh / 2, 3),
                    round(pos[0] + bw / 2, 3),
                    round(pos[1] + bh / 2, 3),
                    round(float(np.linalg.norm(step)), 3),
                )
            )
    return rows


def make_hurdat_like(seed=17) -> list[tuple]:
    """70 storm tracks with 6-hourly fixes; years vary, day-of-year folds.

    Four small "families" of storms follow nearly identical corridors in the
    same seasonal window (these supply the crowded columns), the rest roam the
    basin independently.  Positions snap to 0.1 degrees and extents to 10 km,
    matching track-archive precision.
    """
    rng = np.random.default_rng(seed)
    rows = []
    state = {"sid": 0}

    def emit(lon, lat, heading, speed, max_extent, form_day, life_days, year, swing_total):
        stamp = datetime(year, 1, 1) + timedelta(days=int(form_day))
        n_fix = int(life_days * 4)
        for k in range(n_fix):
            frac = k / max(1, n_fix - 1)
            # recurve: heading swings from westward to northeastward
            h = heading - swing_total * frac**1.4
            lon += speed * float(np.cos(h)) + float(rng.normal(0, 0.06))
            lat += -speed * float(np.sin(h)) * 0.55 + float(rng.normal(0, 0.05))
            extent = 50.0 + (max_extent - 50.0) * float(np.sin(np.pi * frac) ** 0.3)
            wind = 35.0 + 100.0 * float(np.sin(np.pi * frac) ** 1.2) + float(rng.normal(0, 4))
            rows.append(
                (
                    f"storm{state['sid']:02d}",
                    (stamp + timedelta(hours=6 * k)).strftime("%Y-%m-%dT%H:%M"),
                    round(round(lon / 0.1) * 0.1, 1),
                    round(round(lat / 0.1) * 0.1, 1),
                    round(round(extent / 10) * 10, 0),
                    round(wind, 1),
                    round(1012.0 - 0.55 * wind, 1),
                )
            )
        state["sid"] += 1

    for _ in range(4):
        lon0 = float(rng.uniform(-46, -28))
        lat0 = float(rng.uniform(11, 17))
        head0 = np.deg2rad(float(rng.uniform(165, 195)))
        speed0 = float(rng.uniform(0.8, 1.3))
        day0 = float(rng.uniform(175, 245))
        swing0 = np.deg2rad(float(rng.uniform(120, 160)))
        ext0 = 260 * float(rng.uniform(0.9, 1.15))
        for _ in range(4):
            emit(
                lon0 + float(rng.normal(0, 1.0)),
                lat0 + float(rng.normal(0, 0.7)),
                head0 + float(rng.normal(0, 0.08)),
                speed0 * float(rng.uniform(0.92, 1.08)),
                ext0 * float(rng.uniform(0.85, 1.15)),
                day0 + float(rng.normal(0, 3)),
                float(rng.uniform(7, 12)),
                int(rng.integers(2004, 2021)),
                swing0,
            )
    while state["sid"] < N_STORMS:
        emit(
            float(rng.uniform(-52, -18)),
            float(rng.uniform(8, 22)),
            np.deg2rad(float(rng.uniform(150, 210))),
            float(rng.uniform(0.6, 1.8)),
            float(rng.uniform(140, 260)),
            float(rng.uniform(160, 254)),
            float(rng.uniform(5, 14)),
            int(rng.integers(2004, 2021)),
            np.deg2rad(float(rng.uniform(110, 170))),
        )
    return rows


def main():
    OUT.mkdir(exist_ok=True)
    with open(OUT / "wildtrack_like.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "t", "xmin", "ymin", "xmax", "ymax", "speed"])
        writer.writerows(make_wildtrack_like())
    with open(OUT / "hurdat_like.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "timestamp", "lon", "lat", "extent_km", "wind", "pressure"])
        writer.writerows(make_hurdat_like())
    print(f"wrote {OUT / 'wildtrack_like.csv'} and {OUT / 'hurdat_like.csv'}")


if __name__ == "__main__":
    main()
