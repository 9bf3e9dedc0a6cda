"""Metrics report files: delimited summaries plus matplotlib figures."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .layout import Layout
from .metrics import MetricsReport

SCALAR_METRICS = (
    "stress",
    "crossing_metric",
    "jump_distance",
    "intersection_area_ratio_error",
    "spurious_intersection_error",
)


def write_report(layout: Layout, metrics: MetricsReport, outdir: str | Path) -> list[Path]:
    """Write metrics.csv, per_timestep.csv and PNG figures into `outdir`."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    summary = outdir / "metrics.csv"
    with open(summary, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        values = metrics.to_dict()
        for name in SCALAR_METRICS:
            writer.writerow([name, values[name]])
        writer.writerow(["mean_timestep_runtime_s", _mean(metrics.per_timestep_runtimes)])
    written.append(summary)

    per_t = outdir / "per_timestep.csv"
    with open(per_t, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestep", "runtime_s", "spurious_count", "f1", "f2", "f3", "status"])
        for s, runtime in zip(layout.slices, metrics.per_timestep_runtimes):
            writer.writerow([s.timestep, runtime, s.spurious_count(), s.f1, s.f2, s.f3, s.status])
    written.append(per_t)

    ts = [s.timestep for s in layout.slices]

    fig, ax = plt.subplots(figsize=(7, 3))
    ax.plot(ts, metrics.per_timestep_runtimes, lw=1.2)
    ax.set_xlabel("timestep")
    ax.set_ylabel("solve time (s)")
    ax.set_title("per-timestep optimization runtime")
    fig.tight_layout()
    runtime_png = outdir / "runtimes.png"
    fig.savefig(runtime_png, dpi=120)
    plt.close(fig)
    written.append(runtime_png)

    fig, ax = plt.subplots(figsize=(7, 3))
    ax.bar(ts, [s.spurious_count() for s in layout.slices], color="#c44e52")
    ax.set_xlabel("timestep")
    ax.set_ylabel("spurious overlaps")
    ax.set_title("spurious intersections per timestep")
    fig.tight_layout()
    spurious_png = outdir / "spurious_counts.png"
    fig.savefig(spurious_png, dpi=120)
    plt.close(fig)
    written.append(spurious_png)

    return written


def _mean(values) -> float:
    values = list(values)
    return sum(values) / len(values) if values else 0.0
