"""Command-line front end: ``ncdist <mode> ...``.

Exit codes: 0 success, 2 invalid input, 3 a certificate failed,
4 the oracle did not converge.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linalg import GraphDiracOperator
from .munu import PathDiracOperator, bilinear_identity_residual
from .oracle import OracleConfig, geodesic, oracle_graph, oracle_path
from .path import (
    ENUMERATION_LIMIT,
    block_bounds,
    commutator_check,
    enumerate_patterns,
    geodesic_length,
    solve_block,
    solve_path,
)

MODES = ("solve", "oracle", "verify", "enumerate", "compare", "geodesic")
EXIT_OK, EXIT_INVALID, EXIT_VERIFY, EXIT_ORACLE = 0, 2, 3, 4
# a failed certificate outranks oracle non-convergence across a batch
_SEVERITY = {EXIT_OK: 0, EXIT_ORACLE: 1, EXIT_VERIFY: 2}
SYMMETRY_TOL = 1e-12
# slack for the checks that verify adds on top of the certificates
VERIFY_SLACK = 1e-9


class InputError(ValueError):
    """Malformed weights, matrix or options."""


def parse_weights(text: str) -> PathDiracOperator:
    """Comma- or whitespace-separated positive numbers."""
    tokens = [t for t in re.split(r"[,\s]+", text.strip()) if t]
    if not tokens:
        raise InputError("no weights given")
    values = []
    for i, tok in enumerate(tokens, start=1):
        try:
            values.append(float(tok))
        except ValueError:
            raise InputError(f"weight {i} is not a number: {tok!r}") from None
    try:
        return PathDiracOperator(tuple(values))
    except ValueError as exc:
        raise InputError(str(exc)) from None


def parse_matrix(text: str) -> GraphDiracOperator:
    rows = [line.split() for line in text.splitlines() if line.strip()]
    if not rows:
        raise InputError("empty matrix")
    n = len(rows)
    if any(len(row) != n for row in rows):
        raise InputError(f"expected {n} lines of {n} numbers")
    try:
        m = np.array([[float(v) for v in row] for row in rows])
    except ValueError as exc:
        raise InputError(f"matrix entry is not a number: {exc}") from None
    if not np.all(np.isfinite(m)):
        raise InputError("matrix entries must be finite")
    bad = np.flatnonzero(np.diag(m) != 0.0)
    if bad.size:
        raise InputError(f"diagonal entry {bad[0] + 1} must be exactly 0")
    if np.any(np.abs(m - m.T) > SYMMETRY_TOL):
        i, j = np.argwhere(np.abs(m - m.T) > SYMMETRY_TOL)[0]
        raise InputError(f"matrix not symmetric at ({i + 1}, {j + 1})")
    return GraphDiracOperator(0.5 * (m + m.T))


def parse_pair(text: str) -> tuple[int, int]:
    try:
        i, j = (int(v) for v in text.split(","))
    except ValueError:
        raise InputError(f"--pair expects i,j got {text!r}") from None
    return i, j


@dataclass
class JobSpec:
    mode: str
    weights: list[PathDiracOperator] = field(default_factory=list)
    batch: bool = False
    matrix: GraphDiracOperator | None = None
    pair: tuple[int, int] | None = None
    fmt: str = "text"
    all_candidates: bool = False
    prune: bool = True
    oracle: OracleConfig = field(default_factory=OracleConfig)

    def __post_init__(self):
        if self.mode not in MODES:
            raise InputError(f"unknown mode {self.mode!r}")
        if (self.matrix is None) == (not self.weights):
            raise InputError("give exactly one input: --weights, --input or --matrix")
        if self.matrix is not None:
            if self.mode not in ("oracle", "geodesic"):
                raise InputError(f"--matrix is only accepted by oracle and geodesic, not {self.mode}")
            n = self.matrix.order
            if self.pair is None:
                self.pair = (1, n)
            i, j = self.pair
            if not (1 <= i <= n and 1 <= j <= n):
                raise InputError(f"--pair vertices must lie in 1..{n}")
            if self.mode == "oracle" and i == j:
                raise InputError("--pair needs two distinct vertices")
        elif self.pair is not None:
            raise InputError("--pair needs --matrix")
        if self.all_candidates and self.mode not in ("solve", "verify"):
            raise InputError("--all-candidates applies to solve and verify only")


# --- formatting ---------------------------------------------------------------


def num(x: float) -> float:
    """Round to 15 significant digits."""
    return float(format(x, ".15g"))


def vec(xs) -> list[float]:
    return [num(float(x)) for x in xs]


def _blocks(blocks) -> list[dict]:
    return [{"alpha": b.alpha, "beta": b.beta, "value": num(b.value)} for b in blocks]


def _text_value(v, sep: str = " ") -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format(v, ".15g") if math.isfinite(v) else str(v)
    if isinstance(v, (list, tuple)):
        return sep.join(_text_value(x) for x in v) if v else "-"
    if isinstance(v, dict):
        return " ".join(f"{k}={_text_value(x, ',')}" for k, x in v.items())
    return str(v)


_LINE_KEYS = {"candidates": "candidate", "patterns": "enumerated"}


def render_text(report: dict) -> str:
    """One ``key: value`` line per field; list-valued records get one line each."""
    lines = []
    for key, value in report.items():
        if key == "input" and value and isinstance(value[0], list):
            lines.extend("input: " + _text_value(row) for row in value)
        elif key == "input":
            # shortest round-trip repr so the echo re-parses to the same weights
            lines.append("input: " + ",".join(repr(x) for x in value))
        elif key == "gap":
            lines.append(f"gap: {value!r}")
        elif key == "blocks":
            lines.append(
                "blocks: "
                + " ".join(f"{b['alpha']}-{b['beta']}:{_text_value(b['value'])}" for b in value)
            )
        elif key in _LINE_KEYS:
            lines.extend(f"{_LINE_KEYS[key]}: {_text_value(c)}" for c in value)
        else:
            lines.append(f"{key}: {_text_value(value)}")
    return "\n".join(lines)


# --- modes --------------------------------------------------------------------


def _path_base(d: PathDiracOperator) -> dict:
    return {"input": list(d.d), "n": d.n}


def _solve(job: JobSpec, d: PathDiracOperator) -> tuple[dict, int]:
    rep = solve_path(d, prune=job.prune, all_candidates=job.all_candidates)
    out = _path_base(d)
    out.update(
        distance=num(rep.distance),
        z=vec(rep.z),
        a=vec(rep.a),
        pattern=list(rep.pattern),
        blocks=_blocks(rep.blocks),
        geodesic=num(rep.geodesic),
    )
    residuals = {k: (num(v) if isinstance(v, float) else v) for k, v in rep.verification.as_dict().items()}
    code = EXIT_OK if rep.verification.passed else EXIT_VERIFY
    if job.mode == "verify":
        comm = abs(commutator_check(rep) - 1.0)
        bilinear = bilinear_identity_residual(d, rep.z) / (d.d[0] * max(rep.distance, 1.0))
        geo_ok = rep.distance <= rep.geodesic * (1 + VERIFY_SLACK)
        residuals.update(commutator=num(comm), bilinear=num(bilinear), geodesic_bound=geo_ok)
        ok = rep.verification.passed and comm <= VERIFY_SLACK and bilinear <= VERIFY_SLACK and geo_ok
        residuals["passed"] = ok
        code = EXIT_OK if ok else EXIT_VERIFY
    out["residuals"] = residuals
    if rep.candidates is not None:
        out["candidates"] = [
            {"pattern": list(c.pattern), "objective": num(c.objective)} for c in rep.candidates
        ]
    if job.mode == "compare":
        res = oracle_path(d, job.oracle)
        o, s = num(res.value), out["distance"]
        out["oracle"] = {
            "value": o,
            "upper_bound": num(res.upper_bound),
            "converged": res.converged,
            "feasibility": num(res.feasibility_residual),
        }
        out["gap"] = abs(s - o)
        if code == EXIT_OK and not res.converged:
            code = EXIT_ORACLE
    return out, code


def _enumerate(job: JobSpec, d: PathDiracOperator) -> tuple[dict, int]:
    if d.n > ENUMERATION_LIMIT:
        raise InputError(f"enumerate lists every pattern; n must be at most {ENUMERATION_LIMIT}")
    out = _path_base(d)
    patterns = []
    for pattern in enumerate_patterns(d.n):
        blocks = [solve_block(d.slice(a, b), a) for a, b in block_bounds(pattern, d.n)]
        viable = all(b.viable for b in blocks)
        patterns.append(
            {
                "pattern": list(pattern),
                "viable": viable,
                "objective": num(math.fsum(b.value for b in blocks)) if viable else None,
            }
        )
    out["patterns"] = patterns
    best, code = _solve(job, d)
    for key in ("distance", "z", "a", "pattern", "blocks", "geodesic", "residuals"):
        out[key] = best[key]
    return out, code


def _oracle(job: JobSpec, d: PathDiracOperator | None) -> tuple[dict, int]:
    if d is not None:
        res = oracle_path(d, job.oracle)
        out = _path_base(d)
        out["distance"] = num(res.value)
        out["z"] = vec(res.argument)
    else:
        i, j = job.pair
        res = oracle_graph(job.matrix, i, j, job.oracle)
        out = {"input": [vec(r) for r in job.matrix.entries], "n": job.matrix.order, "pair": [i, j]}
        out["distance"] = num(res.value)
        if not res.infinite:
            out["a"] = vec(res.argument)
    out["oracle"] = {
        "value": num(res.value),
        "upper_bound": num(res.upper_bound),
        "converged": res.converged,
        "feasibility": num(res.feasibility_residual),
        "iterations": res.iterations,
    }
    return out, EXIT_OK if res.converged else EXIT_ORACLE


def _geodesic(job: JobSpec, d: PathDiracOperator | None) -> tuple[dict, int]:
    if d is not None:
        out = _path_base(d)
        out["geodesic"] = num(geodesic_length(d))
    else:
        i, j = job.pair
        out = {"input": [vec(r) for r in job.matrix.entries], "n": job.matrix.order, "pair": [i, j]}
        out["geodesic"] = num(geodesic(job.matrix, i, j))
    return out, EXIT_OK


def _one(job: JobSpec, d: PathDiracOperator | None) -> tuple[dict, int]:
    if job.mode == "enumerate":
        return _enumerate(job, d)
    if job.mode == "oracle":
        return _oracle(job, d)
    if job.mode == "geodesic":
        return _geodesic(job, d)
    return _solve(job, d)


def run(job: JobSpec, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    reports, code = [], EXIT_OK
    try:
        for d in job.weights or [None]:
            report, c = _one(job, d)
            reports.append(report)
            code = max(code, c, key=_SEVERITY.__getitem__)
    except ValueError as exc:
        print(f"ncdist: {exc}", file=stderr)
        return EXIT_INVALID
    if job.fmt == "json":
        payload = reports if job.batch else reports[0]
        stdout.write(json.dumps(payload, indent=2) + "\n")
    else:
        stdout.write("\n\n".join(render_text(r) for r in reports) + "\n")
    if code == EXIT_VERIFY:
        print("ncdist: verification failed", file=stderr)
    elif code == EXIT_ORACLE:
        print("ncdist: oracle did not converge", file=stderr)
    return code


# --- argument handling --------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ncdist", description="Exact noncommutative distances on weighted paths.")
    p.add_argument("mode", choices=MODES)
    p.add_argument("--weights", help="edge weights d_1..d_{n-1}, comma or space separated")
    p.add_argument("--input", type=Path, help="file with one weight vector per line")
    p.add_argument("--matrix", type=Path, help="file with a symmetric zero-diagonal n x n matrix")
    p.add_argument("--pair", help="1-based vertices i,j for --matrix (default 1,n)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--all-candidates", action="store_true")
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--tol", type=float)
    return p


def _read(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def build_job(args: argparse.Namespace, environ=os.environ) -> JobSpec:
    if sum(x is not None for x in (args.weights, args.input, args.matrix)) != 1:
        raise InputError("give exactly one input: --weights, --input or --matrix")
    weights, batch, matrix = [], False, None
    if args.weights is not None:
        weights = [parse_weights(args.weights)]
    elif args.input is not None:
        batch = True
        for lineno, line in enumerate(_read(args.input).splitlines(), start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            try:
                weights.append(parse_weights(line))
            except InputError as exc:
                raise InputError(f"{args.input}:{lineno}: {exc}") from None
        if not weights:
            raise InputError(f"{args.input} holds no weight vectors")
    else:
        matrix = parse_matrix(_read(args.matrix))
    seed = args.seed
    if seed is None:
        env = environ.get("NCDIST_SEED")
        try:
            seed = int(env) if env is not None else 0
        except ValueError:
            raise InputError(f"NCDIST_SEED must be an integer, got {env!r}") from None
    overrides = {"seed": seed}
    if args.restarts is not None:
        overrides["restarts"] = args.restarts
    if args.tol is not None:
        overrides["tolerance"] = args.tol
    try:
        cfg = OracleConfig(**overrides)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return JobSpec(
        mode=args.mode,
        weights=weights,
        batch=batch,
        matrix=matrix,
        pair=parse_pair(args.pair) if args.pair is not None else None,
        fmt=args.format,
        all_candidates=args.all_candidates,
        prune=not args.no_prune,
        oracle=cfg,
    )


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        job = build_job(args)
    except ValueError as exc:
        print(f"ncdist: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(job)


if __name__ == "__main__":
    sys.exit(main())
