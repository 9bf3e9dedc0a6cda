"""Command-line entry point.

Subcommands: synth, layout, metrics, render, serve.  Exit codes: 0 on
success, 1 on input/validation errors, 2 on solver failures.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click

from . import MoReVisError, SolverError
from .dataset import FORMATS, load_dataset, save_dataset
from .export import read_layout, write_layout
from .layout import LayoutConfig, compute_layout
from .metrics import DEFAULT_SAMPLE_BUDGET, compute_metrics
from .projection import ProjectionConfig
from .render import COLOR_MODES, RenderSpec, render_svg
from .synth import generate_synthetic_orbits

PROJECTION_FLAGS = {
    "pca": "pca-centroids",
    "force": "force-directed",
    "hilbert": "hilbert",
    "morton": "morton",
}


def _jobs_default() -> int:
    env = os.environ.get("MOREVIS_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise MoReVisError(f"MOREVIS_JOBS must be an integer, got {env!r}")
    return 1


@click.group()
def cli():
    """Ribbon-timeline summaries of moving-region datasets."""


@cli.command()
@click.option("--objects", default=4, show_default=True, type=int)
@click.option("--timesteps", default=50, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--output", required=True, type=click.Path(dir_okay=False))
def synth(objects, timesteps, seed, output):
    """Generate the synthetic orbit dataset (regions-json)."""
    dataset = generate_synthetic_orbits(objects, timesteps, seed)
    save_dataset(dataset, output)
    click.echo(f"wrote {output} ({objects} objects, {timesteps} timesteps)")


def _load(path, format, hull):
    if not Path(path).exists():
        raise MoReVisError(f"input file not found: {path}")
    return load_dataset(path, format, hull=hull)


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False))
@click.option("--format", "format_", default="regions-json", show_default=True,
              type=click.Choice(FORMATS))
@click.option("--hull", is_flag=True, help="replace invalid polygons by their convex hull")
@click.option("--projection", default="pca", show_default=True,
              type=click.Choice(sorted(PROJECTION_FLAGS)))
@click.option("--distance-mode", default="centroid", show_default=True,
              type=click.Choice(["centroid", "region"]))
@click.option("--curve-order", default=10, show_default=True, type=int)
@click.option("--iterations", default=500, show_default=True, type=int)
@click.option("--learning-rate", default=0.1, show_default=True, type=float)
@click.option("--lambda1", default=1.0, show_default=True, type=float)
@click.option("--lambda2", default=1.0, show_default=True, type=float)
@click.option("--column-fill", default=0.6, show_default=True, type=float)
@click.option("--max-group-binaries", default=30, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--jobs", default=None, type=int,
              help="worker pool size (falls back to MOREVIS_JOBS, then 1)")
@click.option("--output", required=True, type=click.Path(dir_okay=False))
def layout(input_path, format_, hull, projection, distance_mode, curve_order, iterations,
           learning_rate, lambda1, lambda2, column_fill, max_group_binaries, seed, jobs, output):
    """Compute the ribbon layout for a dataset and write layout JSON."""
    dataset = _load(input_path, format_, hull)
    config = LayoutConfig(
        lambda1=lambda1,
        lambda2=lambda2,
        column_fill=column_fill,
        max_group_binaries=max_group_binaries,
        projection=ProjectionConfig(
            method=PROJECTION_FLAGS[projection],
            distance_mode=distance_mode,
            curve_order=curve_order,
            iterations=iterations,
            learning_rate=learning_rate,
            seed=seed,
        ),
        jobs=jobs if jobs is not None else _jobs_default(),
    )
    result = compute_layout(dataset, config)
    write_layout(result, output)
    n_spurious = sum(s.spurious_count() for s in result.slices)
    click.echo(f"wrote {output} ({len(result.rects)} rects, {n_spurious} spurious overlaps)")


@cli.command()
@click.option("--layout", "layout_path", required=True, type=click.Path(dir_okay=False))
@click.option("--dataset", "dataset_path", required=True, type=click.Path(dir_okay=False))
@click.option("--format", "format_", default="regions-json", show_default=True,
              type=click.Choice(FORMATS))
@click.option("--hull", is_flag=True)
@click.option("--sample-budget", default=DEFAULT_SAMPLE_BUDGET, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--report-dir", default=None, type=click.Path(file_okay=False),
              help="also write CSV summaries and figures here")
def metrics(layout_path, dataset_path, format_, hull, sample_budget, seed, report_dir):
    """Print the quality metrics of a stored layout."""
    if not Path(layout_path).exists():
        raise MoReVisError(f"layout file not found: {layout_path}")
    stored, _ = read_layout(layout_path)
    dataset = _load(dataset_path, format_, hull)
    report = compute_metrics(dataset, stored, sample_budget=sample_budget, seed=seed)
    values = report.to_dict()
    runtimes = values.pop("per_timestep_runtimes")
    for name, value in values.items():
        click.echo(f"{name}: {value if value is not None else 'n/a'}")
    click.echo(f"mean_timestep_runtime_s: {sum(runtimes) / len(runtimes) if runtimes else 0.0}")
    if report_dir:
        from .report import write_report

        written = write_report(stored, report, report_dir)
        click.echo("report files: " + ", ".join(str(p) for p in written))


@cli.command()
@click.option("--layout", "layout_path", required=True, type=click.Path(dir_okay=False))
@click.option("--dataset", "dataset_path", required=True, type=click.Path(dir_okay=False))
@click.option("--format", "format_", default="regions-json", show_default=True,
              type=click.Choice(FORMATS))
@click.option("--hull", is_flag=True)
@click.option("--svg", "svg_path", required=True, type=click.Path(dir_okay=False))
@click.option("--width", default=1200, show_default=True, type=int)
@click.option("--height", default=640, show_default=True, type=int)
@click.option("--color-mode", default="identity-palette", show_default=True,
              type=click.Choice(COLOR_MODES))
@click.option("--attribute", default=None, help="attribute name for --color-mode=attribute")
def render(layout_path, dataset_path, format_, hull, svg_path, width, height, color_mode, attribute):
    """Render a stored layout to SVG."""
    if not Path(layout_path).exists():
        raise MoReVisError(f"layout file not found: {layout_path}")
    stored, _ = read_layout(layout_path)
    dataset = _load(dataset_path, format_, hull)
    spec = RenderSpec(width=width, height=height, color_mode=color_mode, attribute_name=attribute)
    Path(svg_path).write_text(render_svg(stored, dataset, spec))
    click.echo(f"wrote {svg_path}")


@cli.command()
@click.option("--layout", "layout_path", required=True, type=click.Path(dir_okay=False))
@click.option("--dataset", "dataset_path", required=True, type=click.Path(dir_okay=False))
@click.option("--format", "format_", default="regions-json", show_default=True,
              type=click.Choice(FORMATS))
@click.option("--hull", is_flag=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8040, show_default=True, type=int)
@click.option("--ui-dir", default=None, type=click.Path(file_okay=False),
              help="static UI bundle to serve at /")
def serve(layout_path, dataset_path, format_, hull, host, port, ui_dir):
    """Serve a stored layout and its dataset over HTTP."""
    import uvicorn

    from .service import create_app

    if not Path(layout_path).exists():
        raise MoReVisError(f"layout file not found: {layout_path}")
    stored, metrics_doc = read_layout(layout_path)
    dataset = _load(dataset_path, format_, hull)
    default_ui = Path(__file__).parent.parent.parent / "frontend" / "dist"
    if ui_dir is None and default_ui.is_dir():
        ui_dir = default_ui
    app = create_app(stored, dataset, metrics=metrics_doc, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except SolverError as exc:
        click.echo(f"solver failure: {exc}", err=True)
        return 2
    except MoReVisError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
