"""Weight-ratio vectors mu and nu of a weighted path and their truncations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import BidiagonalStaircase

# Largest admissible spread (natural log) of the running mu/nu products.
MAX_LOG_SPREAD = 600.0


class WeightRangeError(ValueError):
    """Weights so strongly graded that mu or nu would leave binary64 range."""


@dataclass(frozen=True)
class PathDiracOperator:
    """Superdiagonal weights d_1..d_{n-1} of a path's Dirac matrix."""

    d: tuple[float, ...]

    def __post_init__(self):
        d = tuple(float(v) for v in self.d)
        if not d:
            raise ValueError("a path needs at least one edge weight")
        for i, v in enumerate(d, start=1):
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"weight {i} must be a finite positive number, got {v!r}")
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return len(self.d) + 1

    def __len__(self) -> int:
        return len(self.d)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.d, dtype=float)

    def scaled(self, c: float) -> "PathDiracOperator":
        return PathDiracOperator(tuple(c * v for v in self.d))

    def reversed(self) -> "PathDiracOperator":
        return PathDiracOperator(self.d[::-1])

    def slice(self, alpha: int, beta: int) -> "PathDiracOperator":
        """Weights d_alpha..d_beta (1-based, inclusive)."""
        return PathDiracOperator(self.d[alpha - 1 : beta])


@dataclass(frozen=True)
class MuNu:
    mu: np.ndarray
    nu: np.ndarray
    # cumulative sums of squares: mu_sq[k-1] = ||mu^(k)||^2
    mu_sq: np.ndarray = field(repr=False)
    nu_sq: np.ndarray = field(repr=False)

    @property
    def mu_norm(self) -> float:
        return math.sqrt(self.mu_sq[-1])

    @property
    def nu_norm(self) -> float:
        return math.sqrt(self.nu_sq[-1])


def _as_path(d) -> PathDiracOperator:
    return d if isinstance(d, PathDiracOperator) else PathDiracOperator(tuple(d))


def _check_spread(logs: Sequence[float], name: str) -> None:
    if max(logs) - min(logs) > MAX_LOG_SPREAD:
        raise WeightRangeError(
            f"{name} spans more than e^{MAX_LOG_SPREAD:g}; weights too strongly graded"
        )


def build_munu(d) -> MuNu:
    d = _as_path(d).d
    n = len(d) + 1
    m = (n + 1) // 2
    mu = [1.0]
    nu = [1.0]
    log_mu = [0.0]
    log_nu = [0.0]
    for k in range(1, m):
        # mu_{k+1} = mu_k * d_{2k-1} / d_{2k}
        mu.append(mu[-1] * (d[2 * k - 2] / d[2 * k - 1]))
        log_mu.append(log_mu[-1] + math.log(d[2 * k - 2]) - math.log(d[2 * k - 1]))
    for k in range(1, n - m):
        # nu_{k+1} = nu_k * d_{2k} / d_{2k+1}
        nu.append(nu[-1] * (d[2 * k - 1] / d[2 * k]))
        log_nu.append(log_nu[-1] + math.log(d[2 * k - 1]) - math.log(d[2 * k]))
    _check_spread(log_mu, "mu")
    _check_spread(log_nu, "nu")
    mu_a = np.array(mu)
    nu_a = np.array(nu)
    for arr in (mu_a, nu_a):
        arr.setflags(write=False)
    return MuNu(mu_a, nu_a, np.cumsum(mu_a**2), np.cumsum(nu_a**2))


def unit_munu(d) -> tuple[np.ndarray, np.ndarray, float, float, float]:
    """x = mu/||mu||, y = nu/||nu||, their log-norms and ||mu|| ||nu|| / d_1.

    Works on max-rescaled copies so squared norms never overflow.
    """
    d = _as_path(d)
    mn = build_munu(d)
    out = []
    for v in (mn.mu, mn.nu):
        s = float(np.max(v))
        w = v / s
        r = float(np.sqrt(np.sum(w * w)))
        out.append((w / r, math.log(s) + math.log(r), s * r))
    (x, log_mu, mu_norm), (y, log_nu, nu_norm) = out
    value = mu_norm / d.d[0] * nu_norm
    if not (math.isfinite(value) and value > 0):
        value = math.exp(log_mu + log_nu - math.log(d.d[0]))
    return x, y, log_mu, log_nu, value


def prefix_norms(d) -> tuple[np.ndarray, np.ndarray]:
    """Prefix norms ||mu^(k)||, ||nu^(k)|| for every k."""
    mn = build_munu(d)
    return np.sqrt(mn.mu_sq), np.sqrt(mn.nu_sq)


def truncated_munu(d, a: int, b: int) -> tuple[np.ndarray, np.ndarray]:
    """mu[a,b] and nu[a,b]: the rows/columns of T touched by entries a..b."""
    d = _as_path(d)
    if not (1 <= a <= b <= len(d)):
        raise IndexError(f"need 1 <= a <= b <= {len(d)}, got a={a}, b={b}")
    mn = build_munu(d)
    mu_lo, mu_hi = (a + 2) // 2, (b + 2) // 2  # ceil((i+1)/2)
    nu_lo, nu_hi = (a + 1) // 2, (b + 1) // 2  # ceil(i/2)
    return mn.mu[mu_lo - 1 : mu_hi].copy(), mn.nu[nu_lo - 1 : nu_hi].copy()


def staircase(d, z) -> BidiagonalStaircase:
    """T(d, z)."""
    d = _as_path(d)
    z = np.asarray(z, dtype=float)
    if z.shape != (len(d),):
        raise ValueError(f"z must have {len(d)} entries, got {z.shape}")
    return BidiagonalStaircase(tuple(d.as_array() * z))


def bilinear_identity_residual(d, z) -> float:
    """|mu^t T(z) nu - d_1 sum(z)|."""
    d = _as_path(d)
    mn = build_munu(d)
    T = staircase(d, z).to_dense()
    lhs = float(mn.mu @ T @ mn.nu)
    rhs = d.d[0] * math.fsum(np.asarray(z, dtype=float))
    return abs(lhs - rhs)
