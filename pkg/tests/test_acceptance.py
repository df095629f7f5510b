"""Acceptance gate. Each test checks one criterion at its stated tolerance
and records a PASS/FAIL line; the lines are repeated in the pytest terminal
summary (see conftest.py)."""

import math
import sys
import time

import numpy as np
import pytest

from ncdist.linalg import GraphDiracOperator
from ncdist.munu import bilinear_identity_residual, build_munu
from ncdist.oracle import OracleConfig, geodesic, oracle_graph, oracle_path
from ncdist.path import solve_path, solve_path_fastpath

RESULTS: list[str] = []

SQ = math.sqrt
REGRESSION = [
    ((0.5,), 2.0),
    ((1.0,), 1.0),
    ((3.7,), 1 / 3.7),
    ((1.0, 1.0), SQ(2)),
    ((3.0, 2.0, 1.0), 4 / 3),
    ((2.0, 1.0, 1.0, 1.0, 1.0), 3 * SQ(3) / 2),
    ((1.0, 2.0, 1.0, 2.0, 1.0), 3.0),
    ((3.0, 20.0, 100.0, 10.0, 1000.0), SQ(409) / 60 + SQ(10001) / 1000),
    ((1.0, 3.0, 2.0, 1.0, 1.0), 1 + SQ(5 / 2)),
    ((1.0, 1.0, 2.0, 3.0, 1.0), 1 + SQ(5 / 2)),
]


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})"
    RESULTS.append(line)
    print(line)
    assert ok, line


def log_uniform(rng, size, lo=0.1, hi=10.0):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size))


def test_criterion_1_regression_suite():
    solve_path((1.0, 2.0, 3.0))  # load compiled kernels from the on-disk cache
    t0 = time.perf_counter()
    errors = [abs(solve_path(d).distance - expected) for d, expected in REGRESSION]
    z_err = float(np.max(np.abs(solve_path((1.0, 2.0, 1.0, 2.0, 1.0)).z - [1, 0, 1, 0, 1])))
    elapsed = time.perf_counter() - t0
    worst = max(errors + [z_err])
    record(1, "regression values", worst <= 1e-12 and elapsed <= 1.0, f"max abs error {worst:.2e}, {elapsed:.3f} s")


def uniform_z(n):
    if n % 2 == 0:
        return np.array([1.0 if j % 2 else 0.0 for j in range(1, n)]), n // 2
    k = (n + 1) // 2
    p, q = SQ((k - 1) / k), SQ(k / (k - 1))
    z = []
    for j in range(1, n // 2 + 1):
        z += [j * p - (j - 1) * q, j * (q - p)]
    return np.array(z), SQ(k * (k - 1))


def test_criterion_2_uniform_weights():
    worst_v = worst_z = 0.0
    for n in range(2, 21):
        z, value = uniform_z(n)
        r = solve_path(np.ones(n - 1))
        worst_v = max(worst_v, abs(r.distance - value))
        worst_z = max(worst_z, float(np.max(np.abs(r.z - z))))
    ok = worst_v <= 1e-12 and worst_z <= 1e-12
    record(2, "uniform closed forms n=2..20", ok, f"value error {worst_v:.2e}, z error {worst_z:.2e}")


def test_criterion_3_oracle_equivalence():
    rng = np.random.default_rng(3)
    cfg = OracleConfig()
    oracle_path((1.0, 2.0), cfg)
    t0 = time.perf_counter()
    agree = silent = 0
    total = 500
    for _ in range(total):
        n = int(rng.integers(3, 8))
        d = log_uniform(rng, n - 1)
        exact = solve_path(d).distance
        res = oracle_path(d, cfg)
        close = abs(res.value - exact) / exact <= 1e-6
        agree += close
        silent += (not close) and res.converged
    elapsed = time.perf_counter() - t0
    ok = agree >= 0.99 * total and silent == 0 and elapsed <= 120.0
    record(3, "oracle vs exact solver", ok, f"{agree}/{total} agree, {silent} silent mismatches, {elapsed:.1f} s")


def case_n4(d1, d2, d3):
    return "n4a" if d2 * d2 > d1 * d3 else "n4b"


def case_n5(d1, d2, d3, d4):
    mu = SQ(1 + (d1 / d2) ** 2 + (d1 * d3 / (d2 * d4)) ** 2)
    nu = SQ(1 + (d2 / d3) ** 2)
    if nu > mu:
        return "n5a"
    if mu > SQ(1 + d1 * d1 / (d2 * d2)) * nu:
        return "n5b"
    return "n5c"


def test_criterion_4_case_analysis():
    rng = np.random.default_rng(4)
    worst = 0.0
    mismatched = 0
    seen = set()
    for n, rule in ((4, case_n4), (5, case_n5)):
        for _ in range(10_000):
            d = log_uniform(rng, n - 1)
            fast = solve_path_fastpath(d)
            full = solve_path(d, verify=False)
            worst = max(worst, abs(fast.distance - full.distance), float(np.max(np.abs(fast.z - full.z))))
            mismatched += fast.case != rule(*d)
            seen.add(fast.case)
    ok = worst <= 1e-12 and mismatched == 0 and seen == {"n4a", "n4b", "n5a", "n5b", "n5c"}
    record(4, "n=4,5 case analysis", ok, f"max diff {worst:.2e}, {mismatched} case mismatches, cases {sorted(seen)}")


def pair_value(f):
    mn = build_munu(f)
    return mn.mu_norm * mn.nu_norm / f[0]


def test_criterion_5_property_suites():
    rng = np.random.default_rng(5)
    count = 1000
    fails = dict.fromkeys(
        ["bilinear", "prerefine", "refine", "homogeneity", "reversal", "geodesic", "verify"], 0
    )
    worst_bilinear = 0.0
    for _ in range(count):
        n = int(rng.integers(2, 13))
        d = log_uniform(rng, n - 1)
        z = rng.uniform(0.0, 1.0, n - 1)
        res = bilinear_identity_residual(d, z)
        worst_bilinear = max(worst_bilinear, res)
        fails["bilinear"] += res > 1e-10
        whole = pair_value(d)
        for p in range(2, n - 1):
            fails["prerefine"] += whole < pair_value(d[: p - 1]) + pair_value(d[p:])
        full = solve_path(d, prune=False, all_candidates=True)
        for a in full.candidates:
            for b in full.candidates:
                if set(a.pattern) < set(b.pattern) and a.objective < b.objective:
                    fails["refine"] += 1
        c = math.exp(rng.uniform(-3, 3))
        fails["homogeneity"] += abs(solve_path(c * d).distance * c - full.distance) > 1e-12 * full.distance
        fails["reversal"] += abs(solve_path(d[::-1]).distance - full.distance) > 1e-12 * full.distance
        fails["geodesic"] += full.distance > full.geodesic
        fails["verify"] += not full.verification.passed
    bad = {k: v for k, v in fails.items() if v}
    detail = f"{count} instances each, bilinear residual max {worst_bilinear:.1e}, failures {bad or 'none'}"
    record(5, "property suites", not bad, detail)


def test_criterion_6_graph_oracle():
    cfg = OracleConfig()
    worst = 0.0
    for d, expected in REGRESSION:
        res = oracle_graph(GraphDiracOperator.from_path(d), 1, len(d) + 1, cfg)
        worst = max(worst, abs(res.value - expected))
    m = np.zeros((4, 4))
    m[0, 1] = m[1, 0] = 1.0
    m[2, 3] = m[3, 2] = 1.0
    split = GraphDiracOperator(m)
    infinite = oracle_graph(split, 1, 3, cfg).infinite and oracle_graph(split, 2, 4, cfg).infinite
    geo = geodesic(GraphDiracOperator.from_path((3.0, 2.0, 1.0)), 1, 4)
    exact_geo = geo == 1.0 / 3.0 + 1.0 / 2.0 + 1.0
    ok = worst <= 1e-6 and infinite and exact_geo
    record(6, "graph oracle sanity", ok, f"max error {worst:.2e}, disconnected inf {infinite}, geodesic {geo!r}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
