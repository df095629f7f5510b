"""Exact noncommutative distance between the endpoints of a weighted path.

The maximizer is searched over zero patterns of z = (a_1 - a_2, ...,
a_{n-1} - a_n). Each maximal run of nonzero coordinates (a block) has a
unique candidate solving T_k(z) y_k = x_k, T_k(z)^t x_k = y_k; a pattern
is viable when every block candidate is strictly positive, and the
distance is the best sum of block values ||mu(f_k)|| ||nu(f_k)|| / d_first
over viable patterns.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .linalg import GraphDiracOperator, commutator_norm, staircase_norm
from .munu import PathDiracOperator, _as_path, staircase, unit_munu

ZeroPattern = tuple[int, ...]

# a block entry below this fraction of the block's largest entry is not
# strictly positive
POSITIVITY_RTOL = 1e-12
TIE_RTOL = 1e-12
VERIFY_TOL = 1e-9
# above this order the pattern count (Fibonacci) is too large to enumerate
ENUMERATION_LIMIT = 24


@dataclass(frozen=True)
class BlockSolution:
    alpha: int
    beta: int
    z: np.ndarray
    value: float
    viable: bool


@dataclass
class ViableCandidate:
    pattern: ZeroPattern
    z: np.ndarray
    blocks: tuple[BlockSolution, ...]
    objective: float
    residual: float = math.nan

    @property
    def block_values(self) -> list[float]:
        return [b.value for b in self.blocks]

    @property
    def block_bounds(self) -> list[tuple[int, int]]:
        return [(b.alpha, b.beta) for b in self.blocks]


@dataclass
class VerificationRecord:
    eigen_residual: float  # |T T^t x - x|, |T^t T y - y| with the global mu, nu
    block_eigen_residual: float
    norm_error: float  # max_k | ||T_k(z)|| - 1 |
    bj_residual: float  # max |x_k^t (R_j - R_{j+1}) y_k|
    attainment_residual: float  # max_k |x_k^t T_k(z) y_k - 1|
    sum_residual: float  # |sum(z) - sum of block values|
    structure_ok: bool
    tol: float = VERIFY_TOL

    @property
    def passed(self) -> bool:
        worst = max(
            self.eigen_residual,
            self.block_eigen_residual,
            self.norm_error,
            self.bj_residual,
            self.attainment_residual,
        )
        return self.structure_ok and worst <= self.tol and self.sum_residual <= self.tol

    def as_dict(self) -> dict:
        return {
            "eigen": self.eigen_residual,
            "block_eigen": self.block_eigen_residual,
            "block_norm": self.norm_error,
            "birkhoff_james": self.bj_residual,
            "attainment": self.attainment_residual,
            "sum": self.sum_residual,
            "passed": self.passed,
        }


@dataclass
class DistanceReport:
    d: PathDiracOperator
    distance: float
    z: np.ndarray
    a: np.ndarray
    pattern: ZeroPattern
    blocks: tuple[BlockSolution, ...]
    geodesic: float
    method: str
    verification: VerificationRecord | None = None
    candidates: list[ViableCandidate] | None = None
    case: str | None = None
    patterns_evaluated: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.d.n


def closed_form_z(f) -> tuple[np.ndarray, float]:
    """The unique z with T(z) y = x and T(z)^t x = y, plus ||mu|| ||nu|| / f_1.

    z_{2i+1} = V (|mu^(i+1)|^2/|mu|^2 - |nu^(i)|^2/|nu|^2)
    z_{2i}   = V (|nu^(i)|^2/|nu|^2 - |mu^(i)|^2/|mu|^2),  V = |mu||nu|/f_1.
    """
    x, y, _, _, value = unit_munu(f)
    fmu = np.cumsum(x * x)
    fnu = np.cumsum(y * y)
    fmu[-1] = 1.0
    fnu[-1] = 1.0
    m = len(f)
    z = np.empty(m)
    for j in range(1, m + 1):
        i = j // 2
        if j % 2:
            z[j - 1] = value * (fmu[i] - (fnu[i - 1] if i else 0.0))
        else:
            z[j - 1] = value * (fnu[i - 1] - fmu[i - 1])
    return z, value


def solve_block(f, alpha: int = 1) -> BlockSolution:
    f = _as_path(f)
    z, value = closed_form_z(f)
    viable = bool(np.all(z >= POSITIVITY_RTOL * np.max(np.abs(z))))
    z.setflags(write=False)
    return BlockSolution(alpha, alpha + len(f) - 1, z, value, viable)


def enumerate_patterns(n: int) -> Iterator[ZeroPattern]:
    """Zero sets inside {2..n-2} with no two adjacent indices.

    Ordered by size, then lexicographically, so every subset of a pattern
    is produced before the pattern itself.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    for k in itertools.count():
        # non-adjacent k-subsets of {2..n-2} <-> k-subsets of {2..n-1-k}
        pool = range(2, n - k)
        if len(pool) < k:
            return
        for c in itertools.combinations(pool, k):
            yield tuple(v + j for j, v in enumerate(c))


def pattern_count(n: int) -> int:
    a, b = 1, 1  # P(2), P(3)
    for _ in range(n - 3):
        a, b = b, a + b
    return b if n >= 3 else a


def block_bounds(pattern: ZeroPattern, n: int) -> list[tuple[int, int]]:
    """Maximal runs [alpha, beta] of indices in 1..n-1 outside ``pattern``."""
    edges = [0, *pattern, n]
    return [(lo + 1, hi - 1) for lo, hi in zip(edges, edges[1:])]


def _pattern_mask(pattern: ZeroPattern) -> int:
    m = 0
    for p in pattern:
        m |= 1 << p
    return m


def assemble_z(blocks, n: int) -> np.ndarray:
    z = np.zeros(n - 1)
    for b in blocks:
        z[b.alpha - 1 : b.beta] = b.z
    return z


def a_from_z(z) -> np.ndarray:
    """Diagonal a with a_j - a_{j+1} = z_j and a_n = 0."""
    z = np.asarray(z, dtype=float)
    return np.concatenate([np.cumsum(z[::-1])[::-1], [0.0]])


def geodesic_length(d) -> float:
    total = 0.0
    for v in _as_path(d).d:
        total += 1.0 / v
    return total


def _candidate(d: PathDiracOperator, pattern: ZeroPattern, blocks) -> ViableCandidate:
    z = assemble_z(blocks, d.n)
    c = ViableCandidate(pattern, z, tuple(blocks), math.fsum(b.value for b in blocks))
    c.residual = _block_eigen_residual(d, c)
    return c


def _better(new: ViableCandidate, best: ViableCandidate | None) -> bool:
    if best is None:
        return True
    if new.objective > best.objective * (1 + TIE_RTOL):
        return True
    if new.objective < best.objective * (1 - TIE_RTOL):
        return False
    return (len(new.pattern), new.pattern) < (len(best.pattern), best.pattern)


def _enumerate(d: PathDiracOperator, prune: bool, keep_all: bool):
    n = d.n
    cache: dict[tuple[int, int], BlockSolution] = {}
    viable_masks: list[int] = []
    best = None
    found = []
    evaluated = 0
    for pattern in enumerate_patterns(n):
        mask = _pattern_mask(pattern)
        if prune and any(v & ~mask == 0 for v in viable_masks):
            continue
        evaluated += 1
        blocks = []
        for alpha, beta in block_bounds(pattern, n):
            key = (alpha, beta)
            if key not in cache:
                cache[key] = solve_block(d.slice(alpha, beta), alpha)
            b = cache[key]
            if not b.viable:
                break
            blocks.append(b)
        else:
            cand = _candidate(d, pattern, blocks)
            viable_masks.append(mask)
            if keep_all:
                found.append(cand)
            if _better(cand, best):
                best = cand
    return best, found, evaluated


def _dynamic_program(d: PathDiracOperator):
    """Best viable pattern by DP over the last block boundary.

    Objective is additive over blocks and block viability depends only on
    the block's own weights, so the optimum over edges 1..beta ending in a
    block is the best (prefix up to alpha-2) + block(alpha, beta).
    """
    n = d.n
    best: dict[int, tuple[float, ZeroPattern, list[BlockSolution]]] = {}
    evaluated = 0
    for beta in range(1, n):
        entry = None
        for alpha in range(1, beta + 1):
            if alpha == 2:
                continue
            if alpha >= 3 and (alpha - 2) not in best:
                continue
            b = solve_block(d.slice(alpha, beta), alpha)
            evaluated += 1
            if not b.viable:
                continue
            if alpha == 1:
                obj, pat, blocks = b.value, (), [b]
            else:
                p_obj, p_pat, p_blocks = best[alpha - 2]
                obj, pat, blocks = p_obj + b.value, p_pat + (alpha - 1,), [*p_blocks, b]
            if entry is None:
                entry = (obj, pat, blocks)
                continue
            cur = entry[0]
            if obj > cur * (1 + TIE_RTOL) or (
                obj >= cur * (1 - TIE_RTOL) and (len(pat), pat) < (len(entry[1]), entry[1])
            ):
                entry = (obj, pat, blocks)
        if entry is not None:
            best[beta] = entry
    _, pattern, blocks = best[n - 1]
    return _candidate(d, pattern, blocks), evaluated


def solve_path(
    d,
    *,
    prune: bool = True,
    all_candidates: bool = False,
    method: str = "auto",
    verify: bool = True,
) -> DistanceReport:
    """d^D(1, n) for the path with superdiagonal weights ``d``.

    ``method`` is "enumerate", "dp" or "auto" (enumerate up to
    ENUMERATION_LIMIT vertices). ``all_candidates`` lists every viable
    candidate met during enumeration.
    """
    d = _as_path(d)
    if method == "auto":
        method = "enumerate" if d.n <= ENUMERATION_LIMIT else "dp"
    found = None
    if method == "enumerate":
        best, found, evaluated = _enumerate(d, prune, all_candidates)
    elif method == "dp":
        if all_candidates:
            raise ValueError("candidate listing needs method='enumerate'")
        best, evaluated = _dynamic_program(d)
    else:
        raise ValueError(f"unknown method {method!r}")
    # a viable pattern always exists (single-entry blocks are always viable)
    assert best is not None, "no viable pattern found"
    report = DistanceReport(
        d=d,
        distance=best.objective,
        z=best.z,
        a=a_from_z(best.z),
        pattern=best.pattern,
        blocks=best.blocks,
        geodesic=geodesic_length(d),
        method=method,
        candidates=found if all_candidates else None,
        patterns_evaluated=evaluated,
    )
    if verify:
        report.verification = verify_candidate(d, best)
    return report


def _block_frame(d: PathDiracOperator, b: BlockSolution, z):
    f = d.slice(b.alpha, b.beta)
    u = np.asarray(z, dtype=float)[b.alpha - 1 : b.beta]
    x, y, *_ = unit_munu(f)
    T = staircase(f, u)
    return f, x, y, T


def _block_eigen_residual(d: PathDiracOperator, c: ViableCandidate) -> float:
    worst = 0.0
    for b in c.blocks:
        _, x, y, T = _block_frame(d, b, c.z)
        M = T.to_dense()
        worst = max(
            worst,
            float(np.max(np.abs(M @ (M.T @ x) - x))),
            float(np.max(np.abs(M.T @ (M @ y) - y))),
        )
    return worst


def candidate_from_z(d, z) -> ViableCandidate:
    """Wrap an arbitrary nonnegative z as a candidate (pattern = its zeros)."""
    d = _as_path(d)
    z = np.array(z, dtype=float)
    pattern = tuple(int(i) + 1 for i in np.flatnonzero(z == 0.0))
    blocks = []
    for alpha, beta in _runs(z):
        f = d.slice(alpha, beta)
        _, value = closed_form_z(f)
        blocks.append(BlockSolution(alpha, beta, z[alpha - 1 : beta].copy(), value, True))
    c = ViableCandidate(pattern, z, tuple(blocks), math.fsum(b.value for b in blocks))
    c.residual = _block_eigen_residual(d, c)
    return c


def _runs(z) -> list[tuple[int, int]]:
    runs = []
    start = None
    for i, v in enumerate(z, start=1):
        if v != 0.0 and start is None:
            start = i
        elif v == 0.0 and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(z)))
    return runs


def verify_candidate(d, c: ViableCandidate, tol: float = VERIFY_TOL) -> VerificationRecord:
    """Recompute the optimality certificates of a candidate; never raises."""
    try:
        d = _as_path(d)
        z = np.asarray(c.z, dtype=float)
        n = d.n
        structure_ok = (
            z.shape == (n - 1,)
            and bool(np.all(z >= 0))
            and z[0] > 0
            and z[-1] > 0
            and all(q - p > 1 for p, q in zip(c.pattern, c.pattern[1:]))
            and set(c.pattern) == {i + 1 for i in np.flatnonzero(z == 0.0)}
        )
        # global statement: T(z) T(z)^t x = x, T(z)^t T(z) y = y
        X, Y, *_ = unit_munu(d)
        M = staircase(d, z).to_dense()
        eigen = max(
            float(np.max(np.abs(M @ (M.T @ X) - X))),
            float(np.max(np.abs(M.T @ (M @ Y) - Y))),
        )
        block_eigen = norm_err = bj = attain = 0.0
        for b in c.blocks:
            f, x, y, T = _block_frame(d, b, z)
            Tm = T.to_dense()
            block_eigen = max(
                block_eigen,
                float(np.max(np.abs(Tm @ (Tm.T @ x) - x))),
                float(np.max(np.abs(Tm.T @ (Tm @ y) - y))),
            )
            norm_err = max(norm_err, abs(staircase_norm(T) - 1.0))
            attain = max(attain, abs(float(x @ Tm @ y) - 1.0))
            # x^t R_j y with R_j = f_j E_{row(j), col(j)}
            coeffs = []
            for j, fj in enumerate(f.d, start=1):
                r, col = T.position(j)
                coeffs.append(fj * x[r] * y[col])
            for j in range(len(coeffs) - 1):
                bj = max(bj, abs(coeffs[j] - coeffs[j + 1]))
        sum_res = abs(math.fsum(z) - c.objective)
        return VerificationRecord(eigen, block_eigen, norm_err, bj, attain, sum_res, structure_ok, tol)
    except Exception:  # noqa: BLE001 - a broken candidate is a failed record
        inf = math.inf
        return VerificationRecord(inf, inf, inf, inf, inf, inf, False, tol)


def commutator_check(report: DistanceReport) -> float:
    """||[A, D]|| for the reported optimal diagonal (should be 1)."""
    return commutator_norm(GraphDiracOperator.from_path(report.d.d), report.a)


# --- closed forms for small and uniform paths -------------------------------


def _report(d, distance, z, pattern, case) -> DistanceReport:
    z = np.asarray(z, dtype=float)
    blocks = []
    for alpha, beta in block_bounds(pattern, d.n):
        f = d.slice(alpha, beta)
        blocks.append(
            BlockSolution(alpha, beta, z[alpha - 1 : beta].copy(), closed_form_z(f)[1], True)
        )
    return DistanceReport(
        d=d,
        distance=float(distance),
        z=z,
        a=a_from_z(z),
        pattern=tuple(pattern),
        blocks=tuple(blocks),
        geodesic=geodesic_length(d),
        method="fastpath",
        case=case,
    )


def _two_edge(d1: float, d2: float) -> tuple[float, list[float]]:
    r = math.hypot(d1, d2)
    return math.sqrt(1 + (d1 / d2) ** 2) / d1, [d2 / (d1 * r), d1 / (d2 * r)]


def solve_path_fastpath(d) -> DistanceReport | None:
    """Closed-form answer for n <= 5 or uniform weights; None otherwise."""
    d = _as_path(d)
    w = d.d
    n = d.n
    if all(v == w[0] for v in w):
        c = w[0]
        if n % 2 == 0:
            k = n // 2
            z = [1.0 / c if j % 2 else 0.0 for j in range(1, n)]
            return _report(d, k / c, z, tuple(range(2, n - 1, 2)), "uniform-even")
        k = (n + 1) // 2
        p, q = math.sqrt((k - 1) / k), math.sqrt(k / (k - 1))
        z = []
        for j in range(1, k):
            z += [(j * p - (j - 1) * q) / c, j * (q - p) / c]
        return _report(d, math.sqrt(k * (k - 1)) / c, z, (), "uniform-odd")
    if n == 2:
        return _report(d, 1.0 / w[0], [1.0 / w[0]], (), "n2")
    if n == 3:
        value, z = _two_edge(*w)
        return _report(d, value, z, (), "n3")
    if n == 4:
        d1, d2, d3 = w
        mu2 = 1 + (d1 / d2) ** 2
        nu2 = 1 + (d2 / d3) ** 2
        if nu2 > mu2:
            return _report(d, 1 / d1 + 1 / d3, [1 / d1, 0.0, 1 / d3], (2,), "n4a")
        s = d1 * math.sqrt(mu2) * math.sqrt(nu2)
        z = [nu2 / s, (mu2 - nu2) / s, (mu2 * nu2 - mu2) / s]
        return _report(d, math.sqrt(mu2) * math.sqrt(nu2) / d1, z, (), "n4b")
    if n == 5:
        d1, d2, d3, d4 = w
        mu_pre = 1 + (d1 / d2) ** 2
        mu2 = mu_pre + (d1 * d3 / (d2 * d4)) ** 2
        nu2 = 1 + (d2 / d3) ** 2
        if nu2 > mu2:
            tail, (z3, z4) = _two_edge(d3, d4)
            return _report(d, 1 / d1 + tail, [1 / d1, 0.0, z3, z4], (2,), "n5a")
        if mu2 > mu_pre * nu2:
            head, (z1, z2) = _two_edge(d1, d2)
            return _report(d, 1 / d4 + head, [z1, z2, 0.0, 1 / d4], (3,), "n5b")
        s = d1 * math.sqrt(mu2) * math.sqrt(nu2)
        z = [nu2 / s, (mu2 - nu2) / s, (mu_pre * nu2 - mu2) / s, (nu2 * mu2 - mu_pre * nu2) / s]
        return _report(d, math.sqrt(mu2) * math.sqrt(nu2) / d1, z, (), "n5c")
    return None
