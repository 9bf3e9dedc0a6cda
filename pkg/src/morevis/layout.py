"""The ribbon-layout pipeline: time slices, area scaling, per-timestep
intersection optimization, and spurious-crossing flags.

Per timestep, objects are split into groups (connected components of the
2D-intersection graph).  Each group becomes one MIQP: pairs that intersect in
2D ("A-pairs") must overlap vertically by at least their scaled intersection
area, with a ratio variable k penalizing excess overlap; pairs that do not
("B-pairs") pay a binary c when they are forced to overlap anyway.  Groups are
then packed disjointly by a small QP, which preserves the per-pair overlaps.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import MoReVisError, SolverError
from .dataset import MovingRegionDataset, ValidationError, validate
from .geometry import area, intersection_area
from .miqp import (
    INFEASIBLE,
    OPTIMAL,
    LinearConstraint,
    MiqpProblem,
    MiqpSolution,
    solve,
    solve_qp,
    solve_with_fixed_binaries,
)
from .projection import ProjectionConfig, project

G1_TOL = 1e-6

STATUS_OPTIMAL = "optimal"
STATUS_RELAXED = "relaxed-rounded"
STATUS_LIMIT = "iteration-limit"


class GroupTooLargeError(MoReVisError):
    """Raised by build_group_problem when the binary count exceeds the cap."""

    def __init__(self, binaries: int, limit: int):
        super().__init__(f"group needs {binaries} binaries (cap {limit}); use the relaxation fallback")
        self.binaries = binaries
        self.limit = limit


@dataclass(frozen=True)
class LayoutConfig:
    lambda1: float = 1.0
    lambda2: float = 1.0
    column_fill: float = 0.6
    max_group_binaries: int = 30
    projection: ProjectionConfig = field(default_factory=ProjectionConfig)
    y_bounds: tuple[float, float] = (-1.0, 2.0)  # makes the big-M constant valid
    jobs: int = 1
    node_limit: int = 20_000

    def __post_init__(self):
        if self.lambda1 <= 0 or self.lambda2 <= 0:
            raise MoReVisError("lambda1 and lambda2 must be positive")
        if not 0 < self.column_fill <= 1:
            raise MoReVisError("column_fill must be in (0, 1]")
        if self.max_group_binaries < 1 or self.jobs < 1:
            raise MoReVisError("max_group_binaries and jobs must be >= 1")


@dataclass(frozen=True)
class RibbonRect:
    object_id: str
    timestep: int
    y_center: float
    height: float
    y_prime: float


@dataclass(frozen=True)
class RibbonLink:
    object_id: str
    t_from: int
    t_to: int
    spurious_crossings: tuple[str, ...] = ()


@dataclass(frozen=True)
class PairRecord:
    i: str
    j: str
    kind: str  # "A" (w > 0) or "B" (w == 0)
    w: float
    intersection: float
    k: float | None = None
    c: int | None = None


@dataclass(frozen=True)
class TimeSliceSolution:
    timestep: int
    groups: tuple[tuple[str, ...], ...]
    pairs: tuple[PairRecord, ...]
    f1: float | None
    f2: float | None
    f3: float
    f1_group_mean: float | None
    f2_group_mean: float | None
    status: str
    runtime_s: float = field(compare=False)  # wall clock; never serialized
    nodes_explored: int = 0

    def spurious_count(self) -> int:
        return sum(1 for p in self.pairs if p.kind == "B" and p.c)


@dataclass(frozen=True)
class Layout:
    rects: tuple[RibbonRect, ...]
    links: tuple[RibbonLink, ...]
    slices: tuple[TimeSliceSolution, ...]
    timesteps: tuple[int, ...]
    area_scale: float
    config: LayoutConfig

    def rect_map(self) -> dict[tuple[str, int], RibbonRect]:
        return {(r.object_id, r.timestep): r for r in self.rects}


def scale_heights(dataset: MovingRegionDataset) -> tuple[dict[tuple[str, int], float], float]:
    """Rectangle heights a_{i,t}/A_M with A_M = max_t sum_i a_{i,t}."""
    areas = {(obj.id, t): area(obs.polygon) for obj, t, obs in dataset.iter_observations()}
    totals: dict[int, float] = {}
    for (_, t), a in areas.items():
        totals[t] = totals.get(t, 0.0) + a
    if not totals:
        raise MoReVisError("dataset has no observations")
    a_m = max(totals.values())
    return {key: a / a_m for key, a in areas.items()}, a_m


def pair_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


def partition_groups(object_ids: list[str], w: dict[tuple[str, str], float]) -> list[list[str]]:
    """Connected components of the positive-intersection graph, order-stable."""
    parent = {oid: oid for oid in object_ids}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, a in enumerate(object_ids):
        for b in object_ids[i + 1:]:
            if w.get(pair_key(a, b), 0.0) > 0.0:
                parent[find(a)] = find(b)
    groups: dict[str, list[str]] = {}
    for oid in object_ids:
        groups.setdefault(find(oid), []).append(oid)
    roots_in_order = []
    seen = set()
    for oid in object_ids:
        root = find(oid)
        if root not in seen:
            seen.add(root)
            roots_in_order.append(root)
    return [groups[root] for root in roots_in_order]


def classify_pairs(group: list[str], w: dict[tuple[str, str], float]):
    """Within-group index pairs split into A (w > 0) and B (w == 0)."""
    a_pairs, b_pairs = [], []
    for i in range(len(group)):
        for j in range(i + 1, len(group)):
            if w.get(pair_key(group[i], group[j]), 0.0) > 0.0:
                a_pairs.append((i, j))
            else:
                b_pairs.append((i, j))
    return a_pairs, b_pairs


def build_group_problem(
    group: list[str],
    y_prime: dict[str, float],
    heights: dict[str, float],
    w: dict[tuple[str, str], float],
    lambda1: float,
    lambda2: float,
    y_bounds: tuple[float, float] = (-1.0, 2.0),
    max_group_binaries: int = 30,
) -> MiqpProblem:
    """Encode one group's vertical placement as an MIQP.

    Variables (in order): y per object, k per A-pair, then binaries: an
    ordering selector o per pair and a spurious flag c per B-pair.  The
    objective is lambda1*mean(k) + lambda2*mean(c) + sum((y'-y)^2), with the
    mean terms dropped when the corresponding pair set is empty.
    """
    if len(group) < 2:
        raise MoReVisError("singleton groups skip optimization")
    a_pairs, b_pairs = classify_pairs(group, w)
    n_bin = len(a_pairs) + 2 * len(b_pairs)
    if n_bin > max_group_binaries:
        raise GroupTooLargeError(n_bin, max_group_binaries)

    g = len(group)
    nc = g + len(a_pairs)
    n = nc + n_bin
    names = [f"y:{oid}" for oid in group]
    names += [f"k:{group[i]}|{group[j]}" for i, j in a_pairs]
    names += [f"o:{group[i]}|{group[j]}" for i, j in a_pairs]
    names += [f"o:{group[i]}|{group[j]}" for i, j in b_pairs]
    names += [f"c:{group[i]}|{group[j]}" for i, j in b_pairs]

    def k_idx(p):
        return g + a_pairs.index(p)

    def o_idx(p):
        if p in a_pairs:
            return nc + a_pairs.index(p)
        return nc + len(a_pairs) + b_pairs.index(p)

    def c_idx(p):
        return nc + len(a_pairs) + len(b_pairs) + b_pairs.index(p)

    h = [heights[oid] for oid in group]
    big_m = 2.0 + max(h)

    q_matrix = np.zeros((nc, nc))
    q_matrix[:g, :g] = np.eye(g)
    linear = np.zeros(n)
    constant = 0.0
    for idx, oid in enumerate(group):
        linear[idx] = -2.0 * y_prime[oid]
        constant += y_prime[oid] ** 2
    for p in a_pairs:
        linear[k_idx(p)] = lambda1 / len(a_pairs)
    for p in b_pairs:
        linear[c_idx(p)] = lambda2 / len(b_pairs)

    bounds = np.zeros((n, 2))
    bounds[:g] = y_bounds
    bounds[nc:] = (0.0, 1.0)

    constraints: list[LinearConstraint] = []

    def row():
        return np.zeros(n)

    for p in a_pairs:
        i, j = p
        wij = w[pair_key(group[i], group[j])]
        h2 = (h[i] + h[j]) / 2.0
        # the overlap floor makes missing intersections impossible
        r = row(); r[i], r[j] = 1.0, -1.0
        constraints.append(LinearConstraint(r, "<=", h2 - wij))
        r = row(); r[i], r[j] = -1.0, 1.0
        constraints.append(LinearConstraint(r, "<=", h2 - wij))
        # overlap ceiling k*w, disjunctive over the vertical ordering
        bounds[k_idx(p)] = (1.0, max(1.0, h2 / wij))
        r = row(); r[i], r[j] = -1.0, 1.0
        r[k_idx(p)] = -wij
        r[o_idx(p)] = big_m
        constraints.append(LinearConstraint(r, "<=", big_m - h2))
        r = row(); r[i], r[j] = 1.0, -1.0
        r[k_idx(p)] = -wij
        r[o_idx(p)] = -big_m
        constraints.append(LinearConstraint(r, "<=", -h2))
    for p in b_pairs:
        i, j = p
        h2 = (h[i] + h[j]) / 2.0
        # separation required unless the spurious flag c is paid
        r = row(); r[i], r[j] = -1.0, 1.0
        r[c_idx(p)] = -h2
        r[o_idx(p)] = big_m
        constraints.append(LinearConstraint(r, "<=", big_m - h2))
        r = row(); r[i], r[j] = 1.0, -1.0
        r[c_idx(p)] = -h2
        r[o_idx(p)] = -big_m
        constraints.append(LinearConstraint(r, "<=", -h2))

    return MiqpProblem(
        num_continuous=nc,
        num_binary=n_bin,
        q_matrix=q_matrix,
        linear=linear,
        constant=constant,
        constraints=constraints,
        bounds=bounds,
        variable_names=names,
    )


def pack_groups(extents: list[tuple[float, float, str]]) -> list[float]:
    """Vertical offsets making group extents disjoint with least displacement.

    `extents` holds (lo, hi, tie_break_id) per group in caller order; groups
    are stacked in order of mean position (ties by id) under non-overlap
    constraints between consecutive groups; returns one offset per group.
    """
    if not extents:
        return []
    centers = [(lo + hi) / 2.0 for lo, hi, _ in extents]
    sizes = [hi - lo for lo, hi, _ in extents]
    order = sorted(range(len(extents)), key=lambda g: (centers[g], extents[g][2]))
    n = len(extents)
    if n == 1:
        return [0.0]
    q_matrix = np.eye(n)
    linear = np.array([-2.0 * centers[g] for g in order])
    constant = sum(c * c for c in centers)
    constraints = []
    for a, b in zip(range(n - 1), range(1, n)):
        r = np.zeros(n)
        r[a], r[b] = 1.0, -1.0
        rhs = -(sizes[order[a]] + sizes[order[b]]) / 2.0
        constraints.append(LinearConstraint(r, "<=", rhs))
    problem = MiqpProblem(n, 0, q_matrix, linear, constant, constraints)
    sol = solve_qp(problem)
    if sol.status != OPTIMAL:
        raise SolverError(f"group packing failed with status {sol.status}")
    offsets = [0.0] * n
    for pos, g in enumerate(order):
        offsets[g] = float(sol.values[pos]) - centers[g]
    return offsets


def achieved_intersection(y_i: float, h_i: float, y_j: float, h_j: float) -> float:
    """Vertical interval overlap; equals min(h) under containment."""
    lo = max(y_i - h_i / 2.0, y_j - h_j / 2.0)
    hi = min(y_i + h_i / 2.0, y_j + h_j / 2.0)
    return max(0.0, hi - lo)


def _solve_group(group, y_p, h_map, w, config: LayoutConfig):
    """Returns (y list, k per A-pair, c per B-pair, status, nodes)."""
    a_pairs, b_pairs = classify_pairs(group, w)
    try:
        problem = build_group_problem(
            group, y_p, h_map, w, config.lambda1, config.lambda2,
            config.y_bounds, config.max_group_binaries,
        )
    except GroupTooLargeError:
        problem = build_group_problem(
            group, y_p, h_map, w, config.lambda1, config.lambda2,
            config.y_bounds, max_group_binaries=10**9,
        )
        return _solve_group_relaxed(problem, group, a_pairs, b_pairs)

    sol = solve(problem, node_limit=config.node_limit)
    if sol.status == INFEASIBLE:
        raise SolverError("group problem unexpectedly infeasible")
    if sol.status == OPTIMAL:
        status = STATUS_OPTIMAL
    elif np.all(np.isfinite(sol.values)):
        status = STATUS_LIMIT
    else:
        return _solve_group_relaxed(problem, group, a_pairs, b_pairs)
    return _extract(problem, sol, group, a_pairs, b_pairs, status)


def _solve_group_relaxed(problem, group, a_pairs, b_pairs):
    """Relaxation + rounding fallback for oversized or stuck groups."""
    relax = solve_qp(problem)
    if relax.status == INFEASIBLE:
        raise SolverError("group relaxation unexpectedly infeasible")
    nc = problem.num_continuous
    assignment = np.zeros(problem.num_binary)
    # o encodes which side of the disjunction holds: o=1 <-> y_i above y_j
    for pos, p in enumerate(list(a_pairs) + list(b_pairs)):
        assignment[pos] = 1.0 if relax.values[p[0]] >= relax.values[p[1]] else 0.0
    c_round = (relax.values[nc + len(a_pairs) + len(b_pairs):] >= 0.5).astype(float)
    assignment[len(a_pairs) + len(b_pairs):] = c_round
    sol = solve_with_fixed_binaries(problem, assignment)
    if sol.status != OPTIMAL:
        assignment[len(a_pairs) + len(b_pairs):] = 1.0  # c=1 makes separation vacuous
        sol = solve_with_fixed_binaries(problem, assignment)
    if sol.status != OPTIMAL:
        raise SolverError("relaxation rounding failed to recover a feasible layout")
    return _extract(problem, sol, group, a_pairs, b_pairs, STATUS_RELAXED)


def _extract(problem, sol: MiqpSolution, group, a_pairs, b_pairs, status):
    g = len(group)
    ys = [float(v) for v in sol.values[:g]]
    ks = [float(sol.values[g + idx]) for idx in range(len(a_pairs))]
    # c is reported as "actually overlapping": a non-optimal solve may leave
    # c=1 on a pair it nevertheless separated (never the other way around),
    # and the spurious counts must match the achieved overlaps exactly
    hs = {}
    cs = []
    for idx, (i, j) in enumerate(b_pairs):
        cs.append(1 if _pair_overlaps(problem, group, ys, i, j) else 0)
    return ys, ks, cs, status, sol.nodes_explored


def _pair_overlaps(problem, group, ys, i, j) -> bool:
    h_i = problem.pair_heights[group[i]] if hasattr(problem, "pair_heights") else None
    raise NotImplementedError


def optimize_timestep(
    t: int,
    object_ids: list[str],
    y_prime: dict[str, float],
    heights: dict[str, float],
    w: dict[tuple[str, str], float],
    config: LayoutConfig,
) -> tuple[TimeSliceSolution, dict[str, float]]:
    """Solve one column: returns the slice record and final y per object."""
    started = time.perf_counter()
    groups = partition_groups(object_ids, w)
    group_y: list[list[float]] = []
    group_pairs: list[tuple[list, list]] = []
    group_k: list[list[float]] = []
    group_c: list[list[int]] = []
    statuses: list[str] = []
    nodes = 0
    try:
        for group in groups:
            if len(group) == 1:
                group_y.append([y_prime[group[0]]])
                group_pairs.append(([], []))
                group_k.append([])
                group_c.append([])
                statuses.append(STATUS_OPTIMAL)
                continue
            a_pairs, b_pairs = classify_pairs(group, w)
            ys, ks, cs, status, n_nodes = _solve_group(group, y_prime, heights, w, config)
            group_y.append(ys)
            group_pairs.append((a_pairs, b_pairs))
            group_k.append(ks)
            group_c.append(cs)
            statuses.append(status)
            nodes += n_nodes
    except SolverError as exc:
        raise SolverError(f"timestep {t}: {exc}", timestep=t) from exc

    extents = []
    for group, ys in zip(groups, group_y):
        lo = min(y - heights[oid] / 2.0 for oid, y in zip(group, ys))
        hi = max(y + heights[oid] / 2.0 for oid, y in zip(group, ys))
        extents.append((lo, hi, min(group)))
    offsets = pack_groups(extents)

    y_final: dict[str, float] = {}
    for group, ys, off in zip(groups, group_y, offsets):
        for oid, y in zip(group, ys):
            y_final[oid] = y + off

    pairs: list[PairRecord] = []
    total_k, total_c, n_a, n_b = 0.0, 0, 0, 0
    f1_means, f2_means = [], []
    for group, (a_pairs, b_pairs), ks, cs in zip(groups, group_pairs, group_k, group_c):
        for (i, j), k in zip(a_pairs, ks):
            a_id, b_id = group[i], group[j]
            wij = w[pair_key(a_id, b_id)]
            got = achieved_intersection(
                y_final[a_id], heights[a_id], y_final[b_id], heights[b_id]
            )
            pairs.append(PairRecord(a_id, b_id, "A", wij, got, k=k))
            total_k += k
        for (i, j), c in zip(b_pairs, cs):
            a_id, b_id = group[i], group[j]
            got = achieved_intersection(
                y_final[a_id], heights[a_id], y_final[b_id], heights[b_id]
            )
            pairs.append(PairRecord(a_id, b_id, "B", 0.0, got, c=c))
            total_c += c
        n_a += len(a_pairs)
        n_b += len(b_pairs)
        if a_pairs:
            f1_means.append(sum(ks) / len(a_pairs))
        if b_pairs:
            f2_means.append(sum(cs) / len(b_pairs))

    for p in pairs:
        if p.kind == "A" and p.intersection < p.w - G1_TOL:
            raise SolverError(
                f"timestep {t}: missing intersection for ({p.i}, {p.j}): "
                f"I={p.intersection} < w={p.w}",
                timestep=t,
            )

    f3 = sum((y_final[oid] - y_prime[oid]) ** 2 for oid in object_ids)
    status = STATUS_OPTIMAL
    for s in statuses:
        if s == STATUS_RELAXED:
            status = STATUS_RELAXED
        elif s == STATUS_LIMIT and status == STATUS_OPTIMAL:
            status = STATUS_LIMIT
    slice_solution = TimeSliceSolution(
        timestep=t,
        groups=tuple(tuple(g) for g in groups),
        pairs=tuple(pairs),
        f1=(total_k / n_a) if n_a else None,
        f2=(total_c / n_b) if n_b else None,
        f3=f3,
        f1_group_mean=(sum(f1_means) / len(f1_means)) if f1_means else None,
        f2_group_mean=(sum(f2_means) / len(f2_means)) if f2_means else None,
        status=status,
        runtime_s=time.perf_counter() - started,
        nodes_explored=nodes,
    )
    return slice_solution, y_final


def pairwise_w(dataset: MovingRegionDataset, t: int, a_m: float) -> dict[tuple[str, str], float]:
    """Scaled 2D intersection areas for objects co-observed at t (positives only)."""
    present = dataset.observed_at(t)
    out: dict[tuple[str, str], float] = {}
    for i in range(len(present)):
        for j in range(i + 1, len(present)):
            a, b = present[i], present[j]
            raw = intersection_area(a.observations[t].polygon, b.observations[t].polygon)
            if raw > 0.0:
                out[pair_key(a.id, b.id)] = raw / a_m
    return out


def build_links(dataset: MovingRegionDataset) -> list[tuple[str, int, int]]:
    """(object, t, t_next) spans between consecutive observed timesteps."""
    links = []
    for obj in dataset.objects:
        ts = sorted(obj.observations)
        for t0, t1 in zip(ts, ts[1:]):
            links.append((obj.id, t0, t1))
    return links


def flag_spurious_crossings(
    rect_map: dict[tuple[str, int], RibbonRect],
    spans: list[tuple[str, int, int]],
    w_by_t: dict[int, dict[tuple[str, str], float]],
) -> list[RibbonLink]:
    """A crossing is spurious iff the pair has no 2D intersection at either endpoint."""
    flags: dict[tuple[str, int, int], set[str]] = {span: set() for span in spans}
    by_span: dict[tuple[int, int], list[str]] = {}
    for oid, t0, t1 in spans:
        by_span.setdefault((t0, t1), []).append(oid)
    for (t0, t1), members in by_span.items():
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                a, b = members[i], members[j]
                d0 = rect_map[(a, t0)].y_center - rect_map[(b, t0)].y_center
                d1 = rect_map[(a, t1)].y_center - rect_map[(b, t1)].y_center
                if d0 * d1 >= 0:
                    continue  # not a proper crossing
                key = pair_key(a, b)
                if w_by_t[t0].get(key, 0.0) == 0.0 and w_by_t[t1].get(key, 0.0) == 0.0:
                    flags[(a, t0, t1)].add(b)
                    flags[(b, t0, t1)].add(a)
    return [
        RibbonLink(oid, t0, t1, tuple(sorted(flags[(oid, t0, t1)])))
        for oid, t0, t1 in spans
    ]


def compute_layout(dataset: MovingRegionDataset, config: LayoutConfig | None = None) -> Layout:
    """Full pipeline: projection, height scaling, per-timestep solves, links."""
    config = config or LayoutConfig()
    report = validate(dataset)
    if not report.ok():
        raise ValidationError(report)

    projection = project(dataset, config.projection)
    heights, a_m = scale_heights(dataset)
    w_by_t = {t: pairwise_w(dataset, t, a_m) for t in dataset.timesteps}

    def run_slice(t: int):
        present = [o.id for o in dataset.observed_at(t)]
        y_p = {oid: projection.y_prime[(oid, t)] for oid in present}
        h_map = {oid: heights[(oid, t)] for oid in present}
        return optimize_timestep(t, present, y_p, h_map, w_by_t[t], config)

    jobs = config.jobs
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_slice, dataset.timesteps))
    else:
        results = [run_slice(t) for t in dataset.timesteps]

    rects: list[RibbonRect] = []
    slices: list[TimeSliceSolution] = []
    y_by_t: dict[int, dict[str, float]] = {}
    for t, (slice_solution, y_final) in zip(dataset.timesteps, results):
        slices.append(slice_solution)
        y_by_t[t] = y_final
    for obj in dataset.objects:
        for t in sorted(obj.observations):
            rects.append(
                RibbonRect(
                    object_id=obj.id,
                    timestep=t,
                    y_center=y_by_t[t][obj.id],
                    height=heights[(obj.id, t)],
                    y_prime=projection.y_prime[(obj.id, t)],
                )
            )
    rect_map = {(r.object_id, r.timestep): r for r in rects}
    links = flag_spurious_crossings(rect_map, build_links(dataset), w_by_t)
    return Layout(
        rects=tuple(rects),
        links=tuple(links),
        slices=tuple(slices),
        timesteps=tuple(dataset.timesteps),
        area_scale=a_m,
        config=config,
    )
