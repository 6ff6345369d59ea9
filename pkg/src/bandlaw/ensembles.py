"""Seeded samplers for the symmetric entry arrays a_n.

Every sampler returns an :class:`EnsembleSample` whose ``entries`` are an
exactly symmetric n x n array: the upper triangle (diagonal included) is
drawn in row-major order and mirrored.
"""
from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .rng import RngStream

CW_GRID_POINTS = 4096
# tail cut-off for the auxiliary-variable density, in log units below the mode
CW_LOG_TAIL = 40.0


@dataclass(frozen=True, eq=False)
class EnsembleSample:
    n: int
    entries: np.ndarray
    ensemble_id: str
    seed: int
    replica: int

    def __post_init__(self):
        self.entries.setflags(write=False)


@lru_cache(maxsize=16)
def _triu(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n)


def _fill_symmetric(n: int, upper: np.ndarray) -> np.ndarray:
    a = np.empty((n, n), dtype=upper.dtype)
    iu = _triu(n)
    a[iu] = upper
    a[iu[1], iu[0]] = upper
    return a


def _check_n(n: int) -> None:
    if int(n) != n or n < 1:
        raise ValueError(f"matrix dimension must be a positive integer, got {n!r}")


def sample_iid(dist: str, n: int, rng: RngStream) -> EnsembleSample:
    """i.i.d. upper triangle from ``'rademacher'`` or ``'std_gaussian'``."""
    _check_n(n)
    m = n * (n + 1) // 2
    g = rng.generator
    if dist == "rademacher":
        upper = 2.0 * g.integers(0, 2, size=m) - 1.0
    elif dist in ("std_gaussian", "gaussian"):
        upper = g.standard_normal(m)
        dist = "std_gaussian"
    else:
        raise ValueError(f"unknown distribution {dist!r}")
    return EnsembleSample(n, _fill_symmetric(n, upper), dist, rng.seed, rng.stream)


def _check_beta(beta: float) -> None:
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"Curie-Weiss inverse temperature must lie in (0, 1], got {beta}")


def _log_aux_density(t: np.ndarray, beta: float, N: int) -> np.ndarray:
    # -t^2/2 + N log cosh(sqrt(beta/N) t), up to an additive constant
    x = np.abs(np.sqrt(beta / N) * t)
    return -0.5 * t * t + N * (x + np.log1p(np.exp(-2.0 * x)) - np.log(2.0))


@lru_cache(maxsize=32)
def _aux_inverse_cdf_table(beta: float, N: int) -> tuple[np.ndarray, np.ndarray]:
    # For beta <= 1 the log-density is concave with its mode at 0, so doubling
    # L until the tail has dropped CW_LOG_TAIL below the mode brackets the mass.
    L = 10.0
    while _log_aux_density(np.array([L]), beta, N)[0] > -CW_LOG_TAIL:
        L *= 2.0
    t = np.linspace(-L, L, CW_GRID_POINTS)
    logf = _log_aux_density(t, beta, N)
    f = np.exp(logf - logf.max())
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]))])
    cdf /= cdf[-1]
    return t, cdf


def sample_aux_field(beta: float, N: int, size: int, rng: RngStream) -> np.ndarray:
    """Draws of T with density proportional to exp(-t^2/2) (2 cosh(sqrt(beta/N) t))^N."""
    t, cdf = _aux_inverse_cdf_table(float(beta), int(N))
    return np.interp(rng.generator.random(size), cdf, t)


def sample_curie_weiss_spins(beta: float, N: int, rng: RngStream,
                             size: int | None = None) -> np.ndarray:
    """Exact Curie-Weiss(beta, N) spins through the Gaussian auxiliary field.

    Conditionally on T the spins are i.i.d. with
    P(+1) = e^{cT} / (2 cosh(cT)), c = sqrt(beta/N). With ``size`` the result
    has shape (size, N), one independent configuration per row.
    """
    _check_beta(beta)
    _check_n(N)
    reps = 1 if size is None else int(size)
    T = sample_aux_field(beta, N, reps, rng)
    p_up = 1.0 / (1.0 + np.exp(-2.0 * np.sqrt(beta / N) * T))
    u = rng.generator.random((reps, N))
    spins = np.where(u < p_up[:, None], 1.0, -1.0)
    return spins[0] if size is None else spins


def curie_weiss_scheme(beta: float, n: int, rng: RngStream) -> EnsembleSample:
    """Curie-Weiss(beta, n^2) spins laid out row-major, upper triangle mirrored."""
    _check_n(n)
    spins = sample_curie_weiss_spins(beta, n * n, rng).reshape(n, n)
    a = np.triu(spins)
    a = a + np.triu(spins, 1).T
    return EnsembleSample(n, a, f"curie_weiss(beta={beta})", rng.seed, rng.stream)


def sample_au_gaussian(n: int, rho: float, rng: RngStream) -> EnsembleSample:
    """Equicorrelated Gaussian scheme with unit variances and covariance rho/n.

    a(P) = sqrt(rho/n) G + sqrt(1 - rho/n) xi_P with one shared G.
    """
    _check_n(n)
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1] to keep covariances <= 1/n, got {rho}")
    g = rng.generator
    shared = g.standard_normal()
    xi = g.standard_normal(n * (n + 1) // 2)
    upper = np.sqrt(rho / n) * shared + np.sqrt(1.0 - rho / n) * xi
    return EnsembleSample(n, _fill_symmetric(n, upper), f"au_gaussian(rho={rho})",
                          rng.seed, rng.stream)


def make_sampler(kind: str, **params) -> Callable[[int, RngStream], EnsembleSample]:
    """Sampler ``(n, rng) -> EnsembleSample`` for an ensemble name."""
    if kind in ("rademacher", "gaussian", "std_gaussian"):
        return lambda n, rng: sample_iid(kind, n, rng)
    if kind == "curie_weiss":
        beta = float(params["beta"])
        _check_beta(beta)
        return lambda n, rng: curie_weiss_scheme(beta, n, rng)
    if kind == "au_gaussian":
        rho = float(params["rho"])
        if not 0.0 <= rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {rho}")
        return lambda n, rng: sample_au_gaussian(n, rho, rng)
    raise ValueError(f"unknown ensemble {kind!r}")


def empirical_mixed_moment(sampler: Callable[[RngStream], EnsembleSample],
                           pairs: Sequence[tuple[int, int]],
                           powers: Sequence[int],
                           replicas: int,
                           rng: RngStream) -> tuple[float, float]:
    """Monte Carlo estimate of E prod a(P_i)^{delta_i} and its standard error.

    ``pairs`` are 1-based and must be fundamentally different, i.e. no two
    coincide as unordered pairs.
    """
    if len(pairs) != len(powers):
        raise ValueError("pairs and powers must have equal length")
    keys = [frozenset(p) for p in pairs]
    if len(set(keys)) != len(keys):
        raise ValueError(f"pairs are not fundamentally different: {pairs}")
    if any(int(d) < 1 for d in powers):
        raise ValueError("powers must be positive integers")
    rows = np.array([p - 1 for p, _ in pairs])
    cols = np.array([q - 1 for _, q in pairs])
    pw = np.asarray(powers)
    vals = np.empty(replicas)
    for r in range(replicas):
        a = sampler(rng).entries
        vals[r] = np.prod(a[rows, cols] ** pw)
    stderr = vals.std(ddof=1) / np.sqrt(replicas) if replicas > 1 else float("nan")
    return float(vals.mean()), float(stderr)
