"""Small-scale mixed-integer quadratic programming.

A best-first branch-and-bound over binary variables, with convex-QP
relaxations solved by a Mehrotra predictor-corrector interior-point method.
Feasibility (and infeasibility certificates) for each relaxation come from an
LP phase run by HiGHS first; the interior-point phase then converges to the
KKT point.  The reduced Newton system stays positive definite even though the
quadratic term is singular, because every generated variable is bounded.
Everything is deterministic, which keeps layouts byte-reproducible.

Objective convention: f(x) = x_c' Q x_c + q' x + const, with Q over the
continuous block only and binaries entering linearly.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

EPS_FEAS = 1e-8
_EPS_ACTIVE = 1e-9

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ITERATION_LIMIT = "iteration-limit"


class MiqpError(ValueError):
    pass


@dataclass(frozen=True)
class LinearConstraint:
    row: np.ndarray  # coefficients over all variables
    relation: str  # "<=" or "=="
    rhs: float


@dataclass
class MiqpProblem:
    num_continuous: int
    num_binary: int
    q_matrix: np.ndarray  # (nc, nc) PSD
    linear: np.ndarray  # (nc + nb,)
    constant: float = 0.0
    constraints: list[LinearConstraint] = field(default_factory=list)
    bounds: np.ndarray | None = None  # (n, 2); None entries become +-inf
    variable_names: list[str] | None = None

    @property
    def num_variables(self) -> int:
        return self.num_continuous + self.num_binary

    def bound_array(self) -> np.ndarray:
        n = self.num_variables
        if self.bounds is None:
            b = np.column_stack([np.full(n, -np.inf), np.full(n, np.inf)])
        else:
            b = np.asarray(self.bounds, dtype=float).copy()
        b[self.num_continuous:, 0] = np.maximum(b[self.num_continuous:, 0], 0.0)
        b[self.num_continuous:, 1] = np.minimum(b[self.num_continuous:, 1], 1.0)
        return b

    def validate(self) -> None:
        nc, n = self.num_continuous, self.num_variables
        q = np.asarray(self.q_matrix, dtype=float)
        if q.shape != (nc, nc):
            raise MiqpError(f"Q must be ({nc},{nc}), got {q.shape}")
        if nc and float(np.linalg.eigvalsh((q + q.T) / 2).min()) < -1e-8:
            raise MiqpError("Q is not positive semidefinite")
        if np.asarray(self.linear).shape != (n,):
            raise MiqpError("linear term has wrong length")
        for k, con in enumerate(self.constraints):
            if np.asarray(con.row).shape != (n,):
                raise MiqpError(f"constraint {k} row has wrong length")
            if con.relation not in ("<=", "=="):
                raise MiqpError(f"constraint {k} has unknown relation {con.relation!r}")
        bounds = self.bound_array()
        if np.any(bounds[:, 0] > bounds[:, 1] + _EPS_ACTIVE):
            raise MiqpError("empty variable bound")

    def objective(self, x: np.ndarray) -> float:
        xc = x[: self.num_continuous]
        return float(xc @ self.q_matrix @ xc + self.linear @ x + self.constant)

    def name_index(self, name: str) -> int:
        if not self.variable_names:
            raise MiqpError("problem carries no variable names")
        return self.variable_names.index(name)


@dataclass
class MiqpSolution:
    values: np.ndarray
    objective_value: float
    status: str
    nodes_explored: int = 0

    def __getitem__(self, idx: int) -> float:
        return float(self.values[idx])


def _expanded_q(problem: MiqpProblem) -> np.ndarray:
    n = problem.num_variables
    h = np.zeros((n, n))
    nc = problem.num_continuous
    q = np.asarray(problem.q_matrix, dtype=float)
    h[:nc, :nc] = q + q.T  # hessian of x'Qx
    return h


def _constraint_matrices(problem: MiqpProblem, bounds: np.ndarray):
    """Split into G x <= h and A x == b; fixed variables become equalities."""
    n = problem.num_variables
    g_rows, g_rhs, a_rows, a_rhs = [], [], [], []
    for con in problem.constraints:
        row = np.asarray(con.row, dtype=float)
        if con.relation == "==":
            a_rows.append(row)
            a_rhs.append(con.rhs)
        else:
            g_rows.append(row)
            g_rhs.append(con.rhs)
    eye = np.eye(n)
    lo, hi = bounds[:, 0], bounds[:, 1]
    fixed = np.isfinite(lo) & np.isfinite(hi) & (hi - lo <= _EPS_ACTIVE)
    for i in np.nonzero(fixed)[0]:
        a_rows.append(eye[i])
        a_rhs.append((lo[i] + hi[i]) / 2)
    up = np.isfinite(hi) & ~fixed
    dn = np.isfinite(lo) & ~fixed
    G = np.vstack([np.asarray(g_rows).reshape(-1, n), eye[up], -eye[dn]])
    h = np.concatenate([np.asarray(g_rhs, dtype=float), hi[up], -lo[dn]])
    A = np.asarray(a_rows).reshape(-1, n) if a_rows else np.zeros((0, n))
    b = np.asarray(a_rhs, dtype=float) if a_rhs else np.zeros(0)
    return G, h, A, b


def _phase1(G, h, A, b, n) -> np.ndarray | None:
    res = linprog(
        c=np.zeros(n),
        A_ub=G if len(G) else None,
        b_ub=h if len(G) else None,
        A_eq=A if len(A) else None,
        b_eq=b if len(A) else None,
        bounds=[(None, None)] * n,
        method="highs",
    )
    if res.status == 2:
        return None
    if not res.success:
        raise MiqpError(f"phase-1 LP failed: {res.message}")
    return np.asarray(res.x, dtype=float)


def _solve_kkt(M, A, rhs_x, rhs_y, delta=1e-12):
    """Bordered system [[M, A'], [A, -delta I]]; delta guards rank-deficient A."""
    n = M.shape[0]
    p = len(A)
    if p == 0:
        return np.linalg.solve(M, rhs_x), np.zeros(0)
    kkt = np.zeros((n + p, n + p))
    kkt[:n, :n] = M
    kkt[:n, n:] = A.T
    kkt[n:, :n] = A
    kkt[n:, n:] = -delta * np.eye(p)
    sol = np.linalg.solve(kkt, np.concatenate([rhs_x, rhs_y]))
    return sol[:n], sol[n:]


def _ipm_qp(H, q, G, h, A, b, x0, max_iter) -> tuple[np.ndarray, str]:
    """Mehrotra predictor-corrector for convex QP.

    Works with singular H because every generated problem bounds all
    variables, making H + G'(Z/S)G positive definite.  Assumes feasibility
    was already certified (phase-1), so no infeasibility detection here.
    """
    n = len(x0)
    mI = len(G)
    x = x0.astype(float).copy()
    y = np.zeros(len(A))
    if mI == 0:
        # equality-constrained (or free) QP: one KKT solve
        try:
            x, y = _solve_kkt(H + 1e-12 * np.eye(n), A, -q, b)
        except np.linalg.LinAlgError:
            return x, ITERATION_LIMIT
        return x, OPTIMAL

    scale = 1.0 + float(np.abs(h).max(initial=0.0)) + float(np.abs(b).max(initial=0.0))
    s = np.maximum(h - G @ x, 0.1)
    z = np.ones(mI)

    for _ in range(max_iter):
        r_d = H @ x + q + G.T @ z + (A.T @ y if len(A) else 0.0)
        r_p = G @ x + s - h
        r_e = A @ x - b if len(A) else np.zeros(0)
        mu = float(s @ z) / mI
        worst = max(
            float(np.abs(r_d).max(initial=0.0)),
            float(np.abs(r_p).max(initial=0.0)),
            float(np.abs(r_e).max(initial=0.0)),
        )
        if worst <= 1e-10 * scale and mu <= 1e-11 * scale:
            return x, OPTIMAL

        w = z / np.maximum(s, 1e-14)
        M = H + (G.T * w) @ G

        def direction(rhs_c):
            rx = -r_d - G.T @ (rhs_c / np.maximum(s, 1e-14) + w * r_p)
            dx, dy = _solve_kkt(M, A, rx, -r_e)
            ds = -r_p - G @ dx
            dz = rhs_c / np.maximum(s, 1e-14) - w * ds
            return dx, dy, ds, dz

        try:
            dx_a, dy_a, ds_a, dz_a = direction(-s * z)
        except np.linalg.LinAlgError:
            return x, ITERATION_LIMIT

        def max_step(vec, dvec):
            neg = dvec < 0
            if not neg.any():
                return 1.0
            return min(1.0, float(np.min(-vec[neg] / dvec[neg])))

        alpha_aff = min(max_step(s, ds_a), max_step(z, dz_a))
        mu_aff = float((s + alpha_aff * ds_a) @ (z + alpha_aff * dz_a)) / mI
        sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.0

        try:
            dx, dy, ds, dz = direction(-s * z - ds_a * dz_a + sigma * mu)
        except np.linalg.LinAlgError:
            return x, ITERATION_LIMIT
        alpha = 0.99 * min(max_step(s, ds), max_step(z, dz))
        x += alpha * dx
        y += alpha * dy
        s += alpha * ds
        z += alpha * dz
        s = np.maximum(s, 1e-300)
        z = np.maximum(z, 1e-300)
    return x, ITERATION_LIMIT


def solve_qp(
    problem: MiqpProblem,
    bounds: np.ndarray | None = None,
    start: np.ndarray | None = None,
) -> MiqpSolution:
    """Solve the convex relaxation (binaries treated as continuous in [0,1]).

    `start` is an optional initial-point candidate; when it is feasible the
    phase-1 LP is skipped.
    """
    bound_arr = problem.bound_array() if bounds is None else bounds
    n = problem.num_variables
    G, h, A, b = _constraint_matrices(problem, bound_arr)
    x0 = None
    if start is not None and _is_feasible(start, G, h, A, b):
        x0 = np.asarray(start, dtype=float).copy()
    if x0 is None:
        x0 = _phase1(G, h, A, b, n)
        if x0 is None:
            return MiqpSolution(np.full(n, np.nan), np.inf, INFEASIBLE)
    H = _expanded_q(problem)
    q = np.asarray(problem.linear, dtype=float)
    x, status = _ipm_qp(H, q, G, h, A, b, x0, max_iter=60)
    return MiqpSolution(x, problem.objective(x), status)


def _is_feasible(x, G, h, A, b) -> bool:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        return False
    if len(G) and float((G @ x - h).max(initial=0.0)) > _EPS_ACTIVE:
        return False
    if len(A) and float(np.abs(A @ x - b).max(initial=0.0)) > _EPS_ACTIVE:
        return False
    return True


def _solve_fixed(
    problem: MiqpProblem, assignment: np.ndarray, start: np.ndarray | None = None
) -> MiqpSolution:
    bounds = problem.bound_array()
    nc = problem.num_continuous
    bounds[nc:, 0] = assignment
    bounds[nc:, 1] = assignment
    if start is not None:
        start = np.asarray(start, dtype=float).copy()
        start[nc:] = assignment
    sol = solve_qp(problem, bounds, start)
    if sol.status == OPTIMAL:
        sol.values[nc:] = assignment  # exact binaries, no active-set roundoff
        sol.objective_value = problem.objective(sol.values)
    return sol


def solve_with_fixed_binaries(problem: MiqpProblem, assignment) -> MiqpSolution:
    """Convex QP with every binary pinned to the given 0/1 assignment."""
    assignment = np.round(np.asarray(assignment, dtype=float))
    if assignment.shape != (problem.num_binary,):
        raise MiqpError("assignment length does not match num_binary")
    return _solve_fixed(problem, assignment)


def brute_force_solve(problem: MiqpProblem, max_binaries: int = 16) -> MiqpSolution:
    """Exact optimum by enumerating every binary assignment (test oracle)."""
    problem.validate()
    nb = problem.num_binary
    if nb > max_binaries:
        raise MiqpError(f"brute force capped at {max_binaries} binaries, got {nb}")
    best: MiqpSolution | None = None
    for bits in itertools.product((0.0, 1.0), repeat=nb):
        sol = _solve_fixed(problem, np.asarray(bits))
        if sol.status != OPTIMAL:
            continue
        if best is None or sol.objective_value < best.objective_value - 1e-12:
            best = sol
    if best is None:
        return MiqpSolution(np.full(problem.num_variables, np.nan), np.inf, INFEASIBLE, 2**nb)
    best.nodes_explored = 2**nb
    best.status = OPTIMAL
    return best


def solve(problem: MiqpProblem, node_limit: int = 50_000) -> MiqpSolution:
    """Global MIQP optimum via best-first branch-and-bound on the binaries."""
    problem.validate()
    nc, nb = problem.num_continuous, problem.num_binary
    if nb == 0:
        return solve_qp(problem)

    base_bounds = problem.bound_array()
    root = solve_qp(problem, base_bounds)
    nodes = 1
    if root.status == INFEASIBLE:
        return MiqpSolution(root.values, np.inf, INFEASIBLE, nodes)

    incumbent: MiqpSolution | None = None

    def integral(sol: MiqpSolution) -> bool:
        frac = sol.values[nc:]
        return bool(np.all(np.minimum(np.abs(frac), np.abs(1 - frac)) <= 1e-7))

    def offer(assignment: np.ndarray, start: np.ndarray | None = None):
        nonlocal incumbent, nodes
        nodes += 1
        cand = _solve_fixed(problem, np.round(assignment), start)
        if cand.status == OPTIMAL and (
            incumbent is None or cand.objective_value < incumbent.objective_value - 1e-12
        ):
            incumbent = cand

    # rounding heuristic gives an early upper bound for pruning
    offer(root.values[nc:], root.values)

    counter = itertools.count()
    heap: list[tuple[float, int, np.ndarray, MiqpSolution]] = []
    heapq.heappush(heap, (root.objective_value, next(counter), base_bounds, root))
    limited = False

    while heap:
        bound, _, node_bounds, relax = heapq.heappop(heap)
        if incumbent is not None and bound >= incumbent.objective_value - 1e-9:
            continue
        free = (node_bounds[nc:, 1] - node_bounds[nc:, 0]) > _EPS_ACTIVE
        if (relax.status == OPTIMAL and integral(relax)) or not np.any(free):
            offer(relax.values[nc:], relax.values)
            continue
        if nodes >= node_limit:
            limited = True
            break
        dist = np.abs(relax.values[nc:] - 0.5)
        dist[~free] = np.inf
        var = int(np.argmin(dist))
        for value in (0.0, 1.0):
            child = node_bounds.copy()
            child[nc + var, 0] = value
            child[nc + var, 1] = value
            start = relax.values.copy()
            start[nc + var] = value
            sol = solve_qp(problem, child, start)
            nodes += 1
            if sol.status == INFEASIBLE:
                continue
            # non-converged relaxations give no trustworthy bound
            child_bound = sol.objective_value if sol.status == OPTIMAL else -np.inf
            if incumbent is not None and child_bound >= incumbent.objective_value - 1e-9:
                continue
            heapq.heappush(heap, (child_bound, next(counter), child, sol))

    if incumbent is None:
        status = ITERATION_LIMIT if limited else INFEASIBLE
        return MiqpSolution(root.values, root.objective_value if limited else np.inf, status, nodes)
    incumbent.status = ITERATION_LIMIT if limited else OPTIMAL
    incumbent.nodes_explored = nodes
    return incumbent
