"""Convex-polygon kernel: areas, centroids, clipping, hulls, minimum distances.

All polygons are counter-clockwise vertex lists in world units.  Contact and
collinearity decisions use the shared tolerance EPS_GEOM; intersection areas
below it are reported as zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS_GEOM = 1e-9


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex CCW polygon with positive area and no repeated consecutive vertices."""

    vertices: np.ndarray  # (n, 2) float64

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] < 3:
            raise GeometryError("polygon needs at least 3 2D vertices")
        problems = polygon_violations(verts)
        if problems:
            raise GeometryError(f"invalid polygon: {', '.join(problems)}")
        verts = verts.copy()
        verts.setflags(write=False)
        object.__setattr__(self, "vertices", verts)

    def __eq__(self, other):
        if not isinstance(other, ConvexPolygon):
            return NotImplemented
        return self.vertices.shape == other.vertices.shape and bool(
            np.all(self.vertices == other.vertices)
        )

    def __hash__(self):
        return hash(self.vertices.tobytes())

    def translated(self, dx: float, dy: float) -> "ConvexPolygon":
        return ConvexPolygon(self.vertices + np.array([dx, dy]))

    def bounds(self) -> tuple[float, float, float, float]:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])


def polygon_violations(vertices) -> list[str]:
    """Invariant check used by dataset validation; returns violation codes.

    Codes: too-few-vertices, repeated-vertex, non-convex, winding, zero-area.
    """
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] < 3:
        return ["too-few-vertices"]
    out = []
    nxt = np.roll(verts, -1, axis=0)
    edge_len = np.linalg.norm(nxt - verts, axis=1)
    scale = max(1.0, float(np.abs(verts).max()))
    if np.any(edge_len <= EPS_GEOM * scale):
        out.append("repeated-vertex")
    # orientation sign of every consecutive vertex triple
    prv = np.roll(verts, 1, axis=0)
    u, v = verts - prv, nxt - verts
    cross = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
    tol = EPS_GEOM * scale * scale
    if np.any(cross > tol) and np.any(cross < -tol):
        out.append("non-convex")
    else:
        a = _signed_area(verts)
        if abs(a) <= EPS_GEOM:
            out.append("zero-area")
        elif a < 0:
            out.append("winding")
    return out


def _signed_area(verts: np.ndarray) -> float:
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def area(p: ConvexPolygon) -> float:
    """Shoelace area; positive by the CCW invariant."""
    return _signed_area(p.vertices)


def centroid(p: ConvexPolygon) -> np.ndarray:
    """Area-weighted centroid; inside the polygon by convexity."""
    v = p.vertices
    nxt = np.roll(v, -1, axis=0)
    cross = v[:, 0] * nxt[:, 1] - nxt[:, 0] * v[:, 1]
    a = 0.5 * cross.sum()
    cx = ((v[:, 0] + nxt[:, 0]) * cross).sum() / (6.0 * a)
    cy = ((v[:, 1] + nxt[:, 1]) * cross).sum() / (6.0 * a)
    return np.array([cx, cy])


def _clip_halfplane(points: list[np.ndarray], a: np.ndarray, b: np.ndarray) -> list[np.ndarray]:
    # keep the side left of directed edge a->b (inside for CCW clip polygon)
    d = b - a
    out: list[np.ndarray] = []
    n = len(points)
    for i in range(n):
        cur, nxt = points[i], points[(i + 1) % n]
        cur_in = d[0] * (cur[1] - a[1]) - d[1] * (cur[0] - a[0]) >= -EPS_GEOM
        nxt_in = d[0] * (nxt[1] - a[1]) - d[1] * (nxt[0] - a[0]) >= -EPS_GEOM
        if cur_in:
            out.append(cur)
        if cur_in != nxt_in:
            e = nxt - cur
            denom = d[0] * e[1] - d[1] * e[0]
            if abs(denom) > EPS_GEOM * max(1.0, abs(d[0]) + abs(d[1])):
                t = (d[0] * (a[1] - cur[1]) - d[1] * (a[0] - cur[0])) / denom
                out.append(cur + t * e)
    return out


def intersection_area(p: ConvexPolygon, q: ConvexPolygon) -> float:
    """Area of p∩q via iterative half-plane clipping; 0 when disjoint."""
    px0, py0, px1, py1 = p.bounds()
    qx0, qy0, qx1, qy1 = q.bounds()
    if px1 < qx0 - EPS_GEOM or qx1 < px0 - EPS_GEOM:
        return 0.0
    if py1 < qy0 - EPS_GEOM or qy1 < py0 - EPS_GEOM:
        return 0.0
    pts = list(p.vertices)
    qv = q.vertices
    for i in range(len(qv)):
        pts = _clip_halfplane(pts, qv[i], qv[(i + 1) % len(qv)])
        if len(pts) < 3:
            return 0.0
    a = abs(_signed_area(np.asarray(pts)))
    return a if a > EPS_GEOM else 0.0


def _point_segment_dist(pt: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(ab @ ab)
    if denom <= EPS_GEOM * EPS_GEOM:
        return float(np.linalg.norm(pt - a))
    t = float(np.clip((pt - a) @ ab / denom, 0.0, 1.0))
    return float(np.linalg.norm(pt - (a + t * ab)))


def _segments_intersect(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    return (o1 * o2 < 0) and (o3 * o4 < 0)


def min_distance(p: ConvexPolygon, q: ConvexPolygon) -> float:
    """Smallest segment length linking the two regions; 0 iff they intersect or touch."""
    if intersection_area(p, q) > 0.0:
        return 0.0
    best = np.inf
    pv, qv = p.vertices, q.vertices
    np_, nq = len(pv), len(qv)
    for i in range(np_):
        a1, a2 = pv[i], pv[(i + 1) % np_]
        for j in range(nq):
            b1, b2 = qv[j], qv[(j + 1) % nq]
            if _segments_intersect(a1, a2, b1, b2):
                return 0.0
            best = min(
                best,
                _point_segment_dist(a1, b1, b2),
                _point_segment_dist(a2, b1, b2),
                _point_segment_dist(b1, a1, a2),
                _point_segment_dist(b2, a1, a2),
            )
    return 0.0 if best <= EPS_GEOM else float(best)


def convex_hull(points) -> ConvexPolygon:
    """Minimal convex CCW polygon containing all points (monotone chain).

    Raises GeometryError for fewer than 3 non-collinear points.
    """
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise GeometryError("hull needs at least 3 distinct points")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def half(seq):
        chain: list[np.ndarray] = []
        for pt in seq:
            while len(chain) >= 2:
                a, b = chain[-2], chain[-1]
                if (b[0] - a[0]) * (pt[1] - a[1]) - (b[1] - a[1]) * (pt[0] - a[0]) <= EPS_GEOM:
                    chain.pop()
                else:
                    break
            chain.append(pt)
        return chain

    lower = half(pts)
    upper = half(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise GeometryError("degenerate hull: points are collinear")
    return ConvexPolygon(np.asarray(hull))


def regular_polygon(cx: float, cy: float, radius: float, n: int = 32) -> ConvexPolygon:
    """Regular n-gon of circumradius `radius` centered at (cx, cy), CCW."""
    if radius <= 0:
        raise GeometryError("radius must be positive")
    ang = 2.0 * np.pi * np.arange(n) / n
    verts = np.column_stack([cx + radius * np.cos(ang), cy + radius * np.sin(ang)])
    return ConvexPolygon(verts)


def box_polygon(xmin: float, ymin: float, xmax: float, ymax: float) -> ConvexPolygon:
    if xmax <= xmin or ymax <= ymin:
        raise GeometryError(f"empty box [{xmin},{xmax}]x[{ymin},{ymax}]")
    return ConvexPolygon(
        np.array([[xmin, ymin], [xmax, ymin], [xmax, ymax], [xmin, ymax]], dtype=float)
    )


def pairwise_min_distance(polygons: list[ConvexPolygon], idx_a, idx_b, chunk: int = 4096) -> np.ndarray:
    """Vectorized min_distance over many polygon pairs.

    `idx_a`/`idx_b` index into `polygons`; returns one distance per pair.
    Matches the scalar min_distance within EPS_GEOM (property-tested).
    """
    idx_a = np.asarray(idx_a, dtype=int)
    idx_b = np.asarray(idx_b, dtype=int)
    vmax = max(len(p.vertices) for p in polygons)
    verts = np.empty((len(polygons), vmax, 2))
    for k, p in enumerate(polygons):
        v = p.vertices
        verts[k, : len(v)] = v
        verts[k, len(v):] = v[-1]  # pad: degenerate edges, harmless for min
    nxt = np.roll(verts, -1, axis=1)

    out = np.empty(len(idx_a))
    for s in range(0, len(idx_a), chunk):
        ia = idx_a[s : s + chunk]
        ib = idx_b[s : s + chunk]
        d = np.minimum(
            _points_to_edges(verts[ia], verts[ib], nxt[ib]),
            _points_to_edges(verts[ib], verts[ia], nxt[ia]),
        )
        overlap = _sat_overlap(verts[ia], nxt[ia], verts[ib], nxt[ib])
        d[overlap] = 0.0
        d[d <= EPS_GEOM] = 0.0
        out[s : s + chunk] = d
    return out


def _points_to_edges(pts, ea, eb) -> np.ndarray:
    # pts (C,V,2) against edges (ea->eb) (C,V,2): min point-to-segment distance per row
    p = pts[:, :, None, :]
    a = ea[:, None, :, :]
    ab = (eb - ea)[:, None, :, :]
    denom = (ab * ab).sum(-1)
    t = ((p - a) * ab).sum(-1) / np.where(denom > EPS_GEOM * EPS_GEOM, denom, 1.0)
    t = np.clip(np.where(denom > EPS_GEOM * EPS_GEOM, t, 0.0), 0.0, 1.0)
    diff = p - (a + t[..., None] * ab)
    return np.sqrt((diff * diff).sum(-1).min(axis=(1, 2)))


def _sat_overlap(va, na, vb, nb) -> np.ndarray:
    # separating-axis test on edge normals of both polygons (convex only)
    axes = np.concatenate([nxt - cur for cur, nxt in ((va, na), (vb, nb))], axis=1)
    normals = np.stack([-axes[..., 1], axes[..., 0]], axis=-1)  # (C, 2V, 2)
    proj_a = np.einsum("cka,cva->ckv", normals, va)
    proj_b = np.einsum("cka,cva->ckv", normals, vb)
    gap_ab = proj_b.min(axis=2) - proj_a.max(axis=2)
    gap_ba = proj_a.min(axis=2) - proj_b.max(axis=2)
    separated = (np.maximum(gap_ab, gap_ba) > EPS_GEOM).any(axis=1)
    return ~separated
