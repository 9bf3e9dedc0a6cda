"""Static SVG rendering of layouts plus the 2D spatial colormap.

The plot body draws one column per timestep: the per-object rectangles are the
only ``<rect>`` elements in the document; ribbon bands, the spurious-count
bar chart on top, and the left color bar are paths/polygons.  Spurious links
use a hatch pattern for print fidelity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import MoReVisError
from .dataset import MovingRegionDataset
from .geometry import centroid
from .layout import Layout

# bottom-left, bottom-right, top-left, top-right of the data bounding box
DEFAULT_COLORMAP_CORNERS = ("#00876c", "#f2c14e", "#6a4c93", "#d81b8c")

PALETTE = (
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1",
    "#76b7b2", "#edc948", "#ff9da7", "#9c755f", "#bab0ac",
)

COLOR_MODES = ("identity-palette", "attribute", "spatial-colormap")


@dataclass(frozen=True)
class RenderSpec:
    width: int = 1200
    height: int = 640
    color_mode: str = "identity-palette"
    attribute_name: str | None = None
    colormap_corners: tuple[str, str, str, str] = DEFAULT_COLORMAP_CORNERS

    def __post_init__(self):
        if self.color_mode not in COLOR_MODES:
            raise MoReVisError(f"unknown color mode {self.color_mode!r}")
        if (self.color_mode == "attribute") != (self.attribute_name is not None):
            raise MoReVisError("attribute_name is required iff color_mode='attribute'")


def _hex_to_rgb(color: str) -> np.ndarray:
    c = color.lstrip("#")
    return np.array([int(c[i : i + 2], 16) for i in (0, 2, 4)], dtype=float)


def _rgb_to_hex(rgb) -> str:
    r, g, b = (int(round(min(255.0, max(0.0, v)))) for v in rgb)
    return f"#{r:02x}{g:02x}{b:02x}"


def spatial_color(
    dataset: MovingRegionDataset,
    point,
    corners: tuple[str, str, str, str] = DEFAULT_COLORMAP_CORNERS,
) -> str:
    """Bilinear blend of the 4 corner colors at the point's position inside
    the dataset bounding box (clamped)."""
    x0, y0, x1, y1 = dataset.bounds()
    px = 0.5 if x1 <= x0 else min(1.0, max(0.0, (point[0] - x0) / (x1 - x0)))
    py = 0.5 if y1 <= y0 else min(1.0, max(0.0, (point[1] - y0) / (y1 - y0)))
    c00, c10, c01, c11 = (_hex_to_rgb(c) for c in corners)
    bottom = c00 * (1 - px) + c10 * px
    top = c01 * (1 - px) + c11 * px
    return _rgb_to_hex(bottom * (1 - py) + top * py)


def _rect_colors(layout: Layout, dataset: MovingRegionDataset, spec: RenderSpec):
    """Fill color per (object, timestep) under the requested mode."""
    ids = [o.id for o in dataset.objects]
    obj_index = {oid: i for i, oid in enumerate(ids)}
    objects = dataset.object_map()
    colors: dict[tuple[str, int], str] = {}
    if spec.color_mode == "attribute":
        name = spec.attribute_name
        kinds = dict(dataset.attribute_schema)
        if name not in kinds:
            raise MoReVisError(f"unknown attribute {name!r}")
        if kinds[name] == "numeric":
            values = [
                float(obs.attributes[name])
                for _, _, obs in dataset.iter_observations()
                if name in obs.attributes
            ]
            lo, hi = (min(values), max(values)) if values else (0.0, 1.0)
            span = (hi - lo) or 1.0
            c_lo, c_hi = _hex_to_rgb("#3b4cc0"), _hex_to_rgb("#b40426")
        else:
            cats = sorted(
                {
                    str(obs.attributes[name])
                    for _, _, obs in dataset.iter_observations()
                    if name in obs.attributes
                }
            )
            cat_color = {c: PALETTE[i % len(PALETTE)] for i, c in enumerate(cats)}
    for r in layout.rects:
        obs = objects[r.object_id].observations[r.timestep]
        if spec.color_mode == "identity-palette":
            colors[(r.object_id, r.timestep)] = PALETTE[obj_index[r.object_id] % len(PALETTE)]
        elif spec.color_mode == "spatial-colormap":
            colors[(r.object_id, r.timestep)] = spatial_color(
                dataset, centroid(obs.polygon), spec.colormap_corners
            )
        else:
            value = obs.attributes.get(spec.attribute_name)
            if value is None:
                colors[(r.object_id, r.timestep)] = "#999999"
            elif dict(dataset.attribute_schema)[spec.attribute_name] == "numeric":
                t = (float(value) - lo) / span
                colors[(r.object_id, r.timestep)] = _rgb_to_hex(c_lo * (1 - t) + c_hi * t)
            else:
                colors[(r.object_id, r.timestep)] = cat_color[str(value)]
    return colors


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_svg(layout: Layout, dataset: MovingRegionDataset, spec: RenderSpec | None = None) -> str:
    """Deterministic SVG 1.1 text for the layout."""
    spec = spec or RenderSpec()
    margin_left, margin_top, margin_right, margin_bottom = 64, 64, 10, 26
    colorbar_w = 14
    plot_x = margin_left
    plot_y = margin_top
    plot_w = spec.width - margin_left - margin_right
    plot_h = spec.height - margin_top - margin_bottom
    if plot_w <= 0 or plot_h <= 0:
        raise MoReVisError("render size too small")

    timesteps = list(layout.timesteps)
    col_of = {t: i for i, t in enumerate(timesteps)}
    n_cols = max(1, len(timesteps))
    col_w = plot_w / n_cols
    rect_w = layout.config.column_fill * col_w

    rects = list(layout.rects)
    if rects:
        y_lo = min(r.y_center - r.height / 2 for r in rects)
        y_hi = max(r.y_center + r.height / 2 for r in rects)
    else:
        y_lo, y_hi = 0.0, 1.0
    pad = 0.02 * (y_hi - y_lo or 1.0)
    y_lo -= pad
    y_hi += pad
    span = y_hi - y_lo

    def sx(t: int) -> float:  # column center
        return plot_x + (col_of[t] + 0.5) * col_w

    def sy(y: float) -> float:  # invert: larger layout y sits higher
        return plot_y + (y_hi - y) / span * plot_h

    colors = _rect_colors(layout, dataset, spec)
    rect_map = layout.rect_map()

    out: list[str] = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{spec.width}" height="{spec.height}" '
        f'viewBox="0 0 {spec.width} {spec.height}" '
        f'data-y-min="{y_lo!r}" data-y-max="{y_hi!r}">'
    )

    # hatch patterns, one per color used by a spurious band
    spurious_colors = []
    for link in layout.links:
        if link.spurious_crossings:
            color = colors[(link.object_id, link.t_from)]
            if color not in spurious_colors:
                spurious_colors.append(color)
    if spurious_colors:
        out.append("<defs>")
        for idx, color in enumerate(spurious_colors):
            out.append(
                f'<pattern id="hatch{idx}" width="6" height="6" '
                f'patternTransform="rotate(45)" patternUnits="userSpaceOnUse">'
                f'<path d="M0,0 L0,6" stroke="{color}" stroke-width="3.5"/>'
                "</pattern>"
            )
        out.append("</defs>")
    hatch_of = {color: f"url(#hatch{i})" for i, color in enumerate(spurious_colors)}

    out.append(f'<g class="bands">')
    for link in layout.links:
        r0 = rect_map[(link.object_id, link.t_from)]
        r1 = rect_map[(link.object_id, link.t_to)]
        x0 = sx(link.t_from) + rect_w / 2
        x1 = sx(link.t_to) - rect_w / 2
        pts = (
            f"{_fmt(x0)},{_fmt(sy(r0.y_center + r0.height / 2))} "
            f"{_fmt(x1)},{_fmt(sy(r1.y_center + r1.height / 2))} "
            f"{_fmt(x1)},{_fmt(sy(r1.y_center - r1.height / 2))} "
            f"{_fmt(x0)},{_fmt(sy(r0.y_center - r0.height / 2))}"
        )
        color = colors[(link.object_id, link.t_from)]
        if link.spurious_crossings:
            out.append(
                f'<polygon class="band spurious" points="{pts}" '
                f'fill="{hatch_of[color]}" data-object="{link.object_id}"/>'
            )
        else:
            out.append(
                f'<polygon class="band" points="{pts}" fill="{color}" '
                f'fill-opacity="0.85" data-object="{link.object_id}"/>'
            )
    out.append("</g>")

    objects = dataset.object_map()
    out.append('<g class="rects">')
    for r in rects:
        top = sy(r.y_center + r.height / 2)
        px_h = r.height / span * plot_h
        obs = objects[r.object_id].observations[r.timestep]
        out.append(
            f'<rect x="{_fmt(sx(r.timestep) - rect_w / 2)}" y="{_fmt(top)}" '
            f'width="{_fmt(rect_w)}" height="{_fmt(px_h)}" '
            f'fill="{colors[(r.object_id, r.timestep)]}" '
            f'data-object="{r.object_id}" data-timestep="{r.timestep}">'
            f"<title>{r.object_id} t={r.timestep} h={r.height!r}</title></rect>"
        )
    out.append("</g>")

    # spurious-count bar chart across the top
    counts = {s.timestep: s.spurious_count() for s in layout.slices}
    max_count = max(counts.values(), default=0)
    bar_area_h = margin_top - 16
    out.append('<g class="spurious-bars">')
    for t in timesteps:
        count = counts.get(t, 0)
        if count <= 0:
            continue
        bh = bar_area_h * count / max_count
        x0 = sx(t) - rect_w / 2
        y1 = plot_y - 10
        out.append(
            f'<path class="bar" data-timestep="{t}" data-count="{count}" '
            f'd="M{_fmt(x0)},{_fmt(y1)} h{_fmt(rect_w)} v{_fmt(-bh)} h{_fmt(-rect_w)} Z" '
            f'fill="#c44e52"/>'
        )
    out.append("</g>")

    # left color bar: all rects collapsed onto one column, colors blended
    out.append('<g class="colorbar">')
    samples = 64
    bar_x = plot_x - colorbar_w - 34
    for s_idx in range(samples):
        y_val = y_lo + (s_idx + 0.5) / samples * span
        cover = [
            _hex_to_rgb(spatial_color(dataset, centroid(objects[r.object_id].observations[r.timestep].polygon), spec.colormap_corners))
            for r in rects
            if r.y_center - r.height / 2 <= y_val <= r.y_center + r.height / 2
        ]
        if not cover:
            continue
        blend = _rgb_to_hex(np.mean(cover, axis=0))
        y_top = sy(y_lo + (s_idx + 1) / samples * span)
        seg_h = plot_h / samples
        out.append(
            f'<path class="colorbar-seg" d="M{_fmt(bar_x)},{_fmt(y_top)} '
            f'h{_fmt(colorbar_w)} v{_fmt(seg_h)} h{_fmt(-colorbar_w)} Z" fill="{blend}"/>'
        )
    out.append("</g>")

    # axes: timestep ticks along the bottom, y extremes on the left
    out.append('<g class="axis" font-size="10" fill="#333">')
    tick_every = max(1, n_cols // 12)
    for i, t in enumerate(timesteps):
        if i % tick_every:
            continue
        out.append(
            f'<text x="{_fmt(sx(t))}" y="{_fmt(plot_y + plot_h + 14)}" '
            f'text-anchor="middle">{t}</text>'
        )
    out.append(
        f'<text x="{_fmt(plot_x - 6)}" y="{_fmt(plot_y + plot_h)}" '
        f'text-anchor="end">{y_lo:.2f}</text>'
    )
    out.append(
        f'<text x="{_fmt(plot_x - 6)}" y="{_fmt(plot_y + 10)}" text-anchor="end">{y_hi:.2f}</text>'
    )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out)
