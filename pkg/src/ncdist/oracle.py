"""Independent numerical checks: derivative-free maximization of the distance
ratio for paths and general graphs, and weighted geodesic distances."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy.optimize import linprog
from scipy.sparse.csgraph import connected_components, dijkstra

from .linalg import GraphDiracOperator, commutator_matrix, commutator_norm, tridiag_rho_newton
from .munu import _as_path

PATH, GRAPH = 0, 1
_LP_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


@dataclass(frozen=True)
class OracleConfig:
    restarts: int = 32
    max_iters: int = 20_000
    step_init: float = 0.25
    step_min: float = 1e-9
    seed: int = 0
    # relative gap between certified upper bound and best feasible value
    tolerance: float = 1e-9
    cut_rounds: int = 500

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not self.step_min < self.step_init:
            raise ValueError("step_min must be smaller than step_init")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.cut_rounds < 0:
            raise ValueError("cut_rounds must be >= 0")


@dataclass
class OracleResult:
    value: float
    argument: np.ndarray
    feasibility_residual: float
    converged: bool
    iterations: int
    upper_bound: float = math.inf
    restart_values: np.ndarray | None = None

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)


@numba.njit(cache=True)
def _objective(kind, x, d, D, i, j):
    if kind == PATH:
        s = 0.0
        for v in x:
            s += v
        if s <= 0.0:
            return -np.inf
        r = tridiag_rho_newton(d * x)
        if r == 0.0:
            return -np.inf
        return s / r
    n = D.shape[0]
    a = np.zeros(n)
    k = 0
    for v in range(n):
        if v != j:
            a[v] = x[k]
            k += 1
    K = np.empty((n, n))
    for p in range(n):
        for q in range(n):
            K[p, q] = (a[p] - a[q]) * D[p, q]
    s2 = np.linalg.eigvalsh(K.T @ K)[-1]
    if s2 <= 0.0:
        return -np.inf
    return (a[i] - a[j]) / np.sqrt(s2)


@numba.njit(cache=True)
def _normalize(kind, x):
    if kind == PATH:
        s = x.sum()
        if s > 0.0:
            x /= s
    else:
        s = np.max(np.abs(x))
        if s > 0.0:
            x /= s


@numba.njit(cache=True)
def _ascend(kind, x0, d, D, i, j, step_init, step_min, max_iters):
    """Coordinate compass search: poll +-step along every axis, move to the
    best improving trial, halve the step after a failed poll."""
    m = x0.shape[0]
    x = x0.copy()
    _normalize(kind, x)
    fx = _objective(kind, x, d, D, i, j)
    step = step_init
    it = 0
    trial = np.empty(m)
    best_x = np.empty(m)
    while it < max_iters and step >= step_min:
        it += 1
        best_f = fx
        moved = False
        for k in range(m):
            for sgn in (1.0, -1.0):
                trial[:] = x
                v = x[k] + sgn * step
                if kind == PATH and v < 0.0:
                    v = 0.0
                trial[k] = v
                ft = _objective(kind, trial, d, D, i, j)
                if ft > best_f + 1e-15 * abs(best_f):
                    best_f = ft
                    best_x[:] = trial
                    moved = True
        if moved:
            x[:] = best_x
            _normalize(kind, x)
            fx = _objective(kind, x, d, D, i, j)
        else:
            step *= 0.5
    return x, fx, it, step < step_min


def _compass(kind, m, starts, d, D, i, j, cfg: OracleConfig):
    """Stage 1: multi-start compass search. Restart r draws its start from
    a generator seeded with cfg.seed + r (mod 2^64)."""
    values = np.empty(cfg.restarts)
    points = []
    iters = 0
    for r in range(cfg.restarts):
        rng = np.random.default_rng((cfg.seed + r) % 2**64)
        x, fx, it, _ = _ascend(
            kind, starts(rng, m), d, D, i, j, cfg.step_init, cfg.step_min, cfg.max_iters
        )
        values[r] = fx
        points.append(x)
        iters += it
    return points, values, iters


def _cutting_planes(cut_at, value_at, c, A, bounds, points, cfg: OracleConfig):
    """Stage 2: Kelley cutting planes on max c^t x s.t. a^t x <= 1 for every
    cut a, with in-out stabilization towards the best feasible point.

    ``cut_at(x)`` returns a valid cut tight at x/||x||, ``value_at(x)`` the
    objective of the rescaled feasible point and that point. Returns best
    value, its point, the LP upper bound and the number of LP rounds.
    """
    best, best_x = -math.inf, None
    for x in points:
        v, xs = value_at(x)
        if v > best:
            best, best_x = v, xs
        A.append(cut_at(x))
    upper = math.inf
    rounds = 0
    while rounds < cfg.cut_rounds:
        rounds += 1
        res = linprog(
            -c, A_ub=np.array(A), b_ub=np.ones(len(A)), bounds=bounds,
            method="highs", options=_LP_OPTIONS,
        )
        if res.status != 0:
            break
        upper = -res.fun
        if upper - best <= cfg.tolerance * abs(best):
            break
        for q in (res.x, 0.5 * (res.x + best_x)):
            v, xs = value_at(q)
            if v > best:
                best, best_x = v, xs
            A.append(cut_at(q))
    return best, best_x, upper, rounds


def oracle_path(d, cfg: OracleConfig | None = None) -> OracleResult:
    """max sum(z) subject to rho(L(d, z)) <= 1, z >= 0.

    Compass search on the scale-free ratio sum(z) / rho(L(d, z)) from random
    simplex points, then cutting planes v^t L(d, z) v <= 1 (v a top
    eigenvector) to close the gap to a certified upper bound.
    """
    cfg = cfg or OracleConfig()
    w = _as_path(d).as_array()
    m = w.size
    points, values, iters = _compass(
        PATH, m, lambda rng, m: rng.dirichlet(np.ones(m)), w, np.zeros((1, 1)), 0, 0, cfg
    )

    def value_at(x):
        x = np.maximum(x, 0.0)
        r = float(tridiag_rho_newton(w * x))
        if r == 0.0:
            return -math.inf, x
        return math.fsum(x) / r, x / r

    def cut_at(x):
        x = np.maximum(x, 0.0)
        L = np.diag(w * x, 1)
        _, V = np.linalg.eigh(L + L.T)
        v = np.abs(V[:, -1])
        return 2.0 * w * v[:-1] * v[1:]

    A = [w[k] * np.eye(m)[k] for k in range(m)]  # d_k z_k <= 1
    best, z, upper, rounds = _cutting_planes(
        cut_at, value_at, np.ones(m), A, (0, None), points, cfg
    )
    feas = abs(float(tridiag_rho_newton(w * z)) - 1.0)
    converged = bool(upper - best <= cfg.tolerance * best)
    return OracleResult(float(best), z, feas, converged, iters + rounds, float(upper), values)


def _graph(D) -> GraphDiracOperator:
    return D if isinstance(D, GraphDiracOperator) else GraphDiracOperator(np.asarray(D, float))


def _check_vertex(D: GraphDiracOperator, v: int) -> int:
    if not 1 <= v <= D.order:
        raise IndexError(f"vertex {v} outside 1..{D.order}")
    return v - 1


def _components(D: GraphDiracOperator) -> np.ndarray:
    return connected_components(D.entries != 0, directed=False)[1]


def connected(D, i: int, j: int) -> bool:
    D = _graph(D)
    labels = _components(D)
    return labels[_check_vertex(D, i)] == labels[_check_vertex(D, j)]


def oracle_graph(D, i: int, j: int, cfg: OracleConfig | None = None) -> OracleResult:
    """max a_i - a_j subject to ||[diag(a), D]|| <= 1 (vertices 1-based).

    Gauge a_j = 0. Disconnected pairs give value inf. Cuts come from the top
    singular pair (u, w) of the commutator: u^t [A', D] w <= 1 is linear in a'.
    """
    cfg = cfg or OracleConfig()
    D = _graph(D)
    n = D.order
    ii, jj = _check_vertex(D, i), _check_vertex(D, j)
    if ii == jj:
        raise ValueError("oracle_graph needs two distinct vertices")
    labels = _components(D)
    if labels[ii] != labels[jj]:
        return OracleResult(math.inf, np.zeros(n), 0.0, True, 0)
    M = np.ascontiguousarray(D.entries, dtype=float)
    points, values, iters = _compass(
        GRAPH, n - 1, lambda rng, m: rng.standard_normal(m), np.zeros(1), M, ii, jj, cfg
    )
    # other components form separate blocks of the commutator, so zeroing
    # them never raises its norm
    outside = labels != labels[jj]
    points = [np.where(outside, 0.0, np.insert(x, jj, 0.0)) for x in points]

    def value_at(a):
        s = commutator_norm(D, a)
        if s == 0.0:
            return -math.inf, a
        return (a[ii] - a[jj]) / s, a / s

    def cut_at(a):
        U, _, Vt = np.linalg.svd(commutator_matrix(D, a))
        u, v = U[:, 0], Vt[0]
        return u * (M @ v) - v * (M @ u)

    # |a_p - a_q| |d_pq| <= 1 on every edge keeps the LP bounded
    A = []
    for p, q in D.edges():
        row = np.zeros(n)
        row[p], row[q] = abs(M[p, q]), -abs(M[p, q])
        A += [row, -row]
    bounds = [(0.0, 0.0) if (v == jj or outside[v]) else (None, None) for v in range(n)]
    c = np.zeros(n)
    c[ii] = 1.0
    best, a, upper, rounds = _cutting_planes(cut_at, value_at, c, A, bounds, points, cfg)
    feas = abs(commutator_norm(D, a) - 1.0)
    converged = bool(upper - best <= cfg.tolerance * abs(best))
    return OracleResult(float(best), a, feas, converged, iters + rounds, float(upper), values)


def geodesic(D, i: int, j: int) -> float:
    """Shortest-path distance with edge lengths 1/|d_ij| (vertices 1-based);
    inf when disconnected."""
    D = _graph(D)
    ii, jj = _check_vertex(D, i), _check_vertex(D, j)
    if ii == jj:
        return 0.0
    with np.errstate(divide="ignore"):
        w = np.where(D.entries != 0, 1.0 / np.abs(D.entries), 0.0)
    dist = dijkstra(w, directed=False, indices=ii)
    return float(dist[jj])
