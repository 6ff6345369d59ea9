"""Symmetric eigenvalues and statistics of empirical spectral distributions.

The solver reduces the matrix to tridiagonal form with Householder
reflections (reading the upper triangle only) and then runs implicit QL
sweeps with a Wilkinson-type shift. Eigenvectors are never formed.
"""
from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numba
import numpy as np

from .combinat import catalan

QL_MAX_ITER = 50


class NumericError(RuntimeError):
    """Iterative solver failed to converge."""


@dataclass(frozen=True, eq=False)
class SpectralResult:
    n: int
    eigenvalues: np.ndarray
    source: str = ""

    def __post_init__(self):
        self.eigenvalues.setflags(write=False)


@numba.njit(cache=True, nogil=True)
def _tridiagonalize(a):
    # in place on a C-contiguous copy; only a[i, j] with j >= i is touched
    n = a.shape[0]
    d = np.empty(n)
    e = np.zeros(n)
    v = np.empty(n)
    p = np.empty(n)
    for k in range(n - 2):
        d[k] = a[k, k]
        m = n - k - 1
        sigma = 0.0
        for j in range(m):
            v[j] = a[k, k + 1 + j]
            sigma += v[j] * v[j]
        sigma = np.sqrt(sigma)
        if sigma == 0.0:
            e[k] = 0.0
            continue
        alpha = -sigma if v[0] >= 0.0 else sigma
        v[0] -= alpha
        vnorm2 = 0.0
        for j in range(m):
            vnorm2 += v[j] * v[j]
        beta = 2.0 / vnorm2
        e[k] = alpha
        for j in range(m):
            p[j] = 0.0
        off = k + 1
        for i in range(m):
            row = a[off + i]
            vi = v[i]
            acc = row[off + i] * vi
            for j in range(i + 1, m):
                s = row[off + j]
                acc += s * v[j]
                p[j] += s * vi
            p[i] += acc
        vp = 0.0
        for j in range(m):
            p[j] *= beta
            vp += v[j] * p[j]
        half = 0.5 * beta * vp
        for j in range(m):
            p[j] -= half * v[j]  # p now holds w
        for i in range(m):
            row = a[off + i]
            vi = v[i]
            wi = p[i]
            for j in range(i, m):
                row[off + j] -= vi * p[j] + wi * v[j]
    if n >= 2:
        d[n - 2] = a[n - 2, n - 2]
        e[n - 2] = a[n - 2, n - 1]
    d[n - 1] = a[n - 1, n - 1]
    return d, e


@numba.njit(cache=True, nogil=True)
def _tridiagonal_ql(d, e, max_iter):
    # e[i] couples d[i] and d[i+1]; e[n-1] = 0. Returns 0 or -1 on failure.
    n = d.shape[0]
    eps = np.finfo(np.float64).eps
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                return -1
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


def _as_array(m) -> tuple[np.ndarray, str]:
    values = getattr(m, "values", m)
    src = ""
    prov = getattr(m, "provenance", None)
    if prov:
        src = str(prov.get("structure", ""))
    return np.asarray(values, dtype=float), src


def eigenvalues_symmetric(m, source: str | None = None) -> SpectralResult:
    """All eigenvalues of a real symmetric matrix, ascending.

    Accepts a StructuredMatrix or a plain square array.
    """
    a, src = _as_array(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"need a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if not np.array_equal(a, a.T):
        raise ValueError("matrix is not symmetric")
    n = a.shape[0]
    if n == 0:
        raise ValueError("empty matrix")
    d, e = _tridiagonalize(np.ascontiguousarray(a).copy())
    if _tridiagonal_ql(d, e, QL_MAX_ITER) != 0:
        raise NumericError(f"QL iteration did not converge within {QL_MAX_ITER} sweeps")
    d.sort()
    return SpectralResult(n, d, source if source is not None else src)


def esd_moment(r: SpectralResult, k: int) -> float:
    if k < 1:
        raise ValueError("moment order must be >= 1")
    return float(np.mean(r.eigenvalues ** k))


def ks_distance(r: SpectralResult, cdf: Callable) -> float:
    """Two-sided Kolmogorov-Smirnov distance between the ESD and ``cdf``."""
    lam = r.eigenvalues
    n = lam.size
    F = np.asarray(cdf(lam), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(np.abs(i / n - F)), np.max(np.abs((i - 1) / n - F))))


def semicircle_density(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) < 2.0, np.sqrt(np.clip(4.0 - x * x, 0.0, None)) / (2.0 * np.pi), 0.0)


def semicircle_cdf(x):
    x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    return 0.5 + x * np.sqrt(4.0 - x * x) / (4.0 * np.pi) + np.arcsin(x / 2.0) / np.pi


def semicircle_moment(k: int) -> float:
    return float(catalan(k // 2)) if k % 2 == 0 else 0.0


def stieltjes(r: SpectralResult, z: complex) -> complex:
    """s(z) = (1/n) sum 1/(lambda_i - z) on the upper half plane."""
    z = complex(z)
    if z.imag <= 0.0:
        raise ValueError(f"Stieltjes transform needs Im z > 0, got {z}")
    return complex(np.mean(1.0 / (r.eigenvalues - z)))
