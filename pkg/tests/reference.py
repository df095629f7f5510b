"""Brute-force reference solver built only from the definitions: products
for mu/nu, a least-squares solve of T(z) y = x, T(z)^t x = y per block, and
itertools enumeration of zero sets."""

import itertools
import math

import numpy as np


def mu_nu(f):
    m = len(f) + 1
    mu = [math.prod(f[2 * j] / f[2 * j + 1] for j in range(k)) for k in range((m + 1) // 2)]
    nu = [math.prod(f[2 * j + 1] / f[2 * j + 2] for j in range(k)) for k in range(m // 2)]
    return np.array(mu), np.array(nu)


def block_z(f):
    mu, nu = mu_nu(f)
    x, y = mu / np.linalg.norm(mu), nu / np.linalg.norm(nu)
    k = len(f)
    A = np.zeros((x.size + y.size, k))
    rhs = np.concatenate([x, y])
    for i in range(1, k + 1):
        r, c = math.ceil((i + 1) / 2) - 1, math.ceil(i / 2) - 1
        A[r, i - 1] += f[i - 1] * y[c]  # (T y)_r
        A[x.size + c, i - 1] += f[i - 1] * x[r]  # (T^t x)_c
    z = np.linalg.lstsq(A, rhs, rcond=None)[0]
    return z, np.linalg.norm(mu) * np.linalg.norm(nu) / f[0]


def zero_sets(n):
    interior = range(2, n - 1)
    for k in range(len(interior) + 1):
        for s in itertools.combinations(interior, k):
            if all(b - a > 1 for a, b in zip(s, s[1:])):
                yield s


def runs(zeros, n):
    out, start = [], 1
    for p in list(zeros) + [n]:
        out.append((start, p - 1))
        start = p + 1
    return out


def brute_force(d):
    """(distance, zero set, z) maximizing over viable decompositions."""
    d = [float(v) for v in d]
    n = len(d) + 1
    best = (-math.inf, None, None)
    for zeros in zero_sets(n):
        z = np.zeros(n - 1)
        ok = True
        for a, b in runs(zeros, n):
            zb, _ = block_z(d[a - 1 : b])
            if np.min(zb) < 1e-12 * np.max(np.abs(zb)):
                ok = False
                break
            z[a - 1 : b] = zb
        if ok and z.sum() > best[0] * (1 + 1e-12):
            best = (z.sum(), zeros, z)
    return best
