"""Limiting moments of weighted band matrices.

For a weight w the limit law is determined by

    phi(x) = int_0^1 w^2(|x - y|) dy,     phi_0 = int phi = 2 int_0^1 (1 - x) w^2(x) dx,

and the k-th moment is a sum over non-crossing pair partitions of tree
integrals J_w(pi). Tree integrals are evaluated by message passing with a
discretized kernel on a uniform grid of m cells.

Two discretizations are offered. ``"midpoint"`` samples w^2 at node
differences. ``"galerkin"`` (the default) replaces each kernel entry by
the exact average of w^2(|x - y|) over the corresponding pair of cells,
which makes integrals of phi exact and removes the O(jumps/m) error that
indicator weights otherwise incur.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import prod

import numpy as np
from scipy.linalg import toeplitz

from .combinat import BacktrackTree, PairPartition, backtracking_path, catalan, enumerate_ncpp
from .rng import RngStream
from .structure import WeightFunction

DEFAULT_GRID_M = 2048
# exact finite-n sums are attempted up to this many terms n^(k/2+1)
EXACT_TERM_LIMIT = 2e8


@dataclass(frozen=True)
class QuadGrid:
    m: int = DEFAULT_GRID_M
    rule: str = "galerkin"

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("grid needs m >= 1")
        if self.rule not in ("galerkin", "midpoint"):
            raise ValueError(f"unknown rule {self.rule!r}")

    @property
    def nodes(self) -> np.ndarray:
        return (np.arange(self.m) + 0.5) / self.m


# --------------------------------------------------------------------------
# exact antiderivatives of w^2
# --------------------------------------------------------------------------

class _Antiderivatives:
    """G1(z) = int_0^z w^2 and M1(z) = int_0^z u w^2(u) du, exact for piecewise-linear w."""

    def __init__(self, w: WeightFunction):
        edges, c0, c1 = w.linear_pieces()
        self.edges = edges
        # w^2 = c0^2 + 2 c0 c1 u + c1^2 u^2 ; antiderivative coefficients (ascending powers)
        g = np.stack([c0 * c0, 2 * c0 * c1, c1 * c1], axis=1)
        self.P = np.stack([np.zeros_like(c0), g[:, 0], g[:, 1] / 2, g[:, 2] / 3], axis=1)
        self.Q = np.stack([np.zeros_like(c0), np.zeros_like(c0), g[:, 0] / 2,
                           g[:, 1] / 3, g[:, 2] / 4], axis=1)
        self.cumP = self._cumulate(self.P)
        self.cumQ = self._cumulate(self.Q)

    def _cumulate(self, coef):
        e = self.edges
        inc = _polyval(coef, e[1:]) - _polyval(coef, e[:-1])
        return np.concatenate([[0.0], np.cumsum(inc)])

    def _eval(self, coef, cum, z):
        z = np.clip(np.asarray(z, dtype=float), 0.0, 1.0)
        idx = np.clip(np.searchsorted(self.edges, z, side="right") - 1, 0, len(self.edges) - 2)
        c = coef[idx]
        return cum[idx] + _polyval(c, z) - _polyval(c, self.edges[idx])

    def G1(self, z):
        return self._eval(self.P, self.cumP, z)

    def M1(self, z):
        return self._eval(self.Q, self.cumQ, z)

    def G2(self, z):
        # int_0^z (z - u) w^2(u) du
        z = np.asarray(z, dtype=float)
        return z * self.G1(z) - self.M1(z)


def _polyval(coef, x):
    # row-wise ascending-power polynomial evaluation
    x = np.asarray(x, dtype=float)
    out = np.zeros(np.broadcast(coef[..., 0], x).shape)
    for j in range(coef.shape[-1] - 1, -1, -1):
        out = out * x + coef[..., j]
    return out


@lru_cache(maxsize=64)
def _antiderivatives(w: WeightFunction) -> _Antiderivatives:
    return _Antiderivatives(w)


# --------------------------------------------------------------------------
# kernels
# --------------------------------------------------------------------------

@lru_cache(maxsize=16)
def lag_kernel(w: WeightFunction, grid: QuadGrid) -> np.ndarray:
    """Kernel value for cells i, j as a function of the lag d = |i - j|."""
    m = grid.m
    d = np.arange(m)
    if grid.rule == "midpoint":
        out = w(d / m) ** 2
    else:
        h = 1.0 / m
        A = _antiderivatives(w)
        g2 = A.G2(np.arange(m + 1) * h)
        out = np.empty(m)
        out[0] = 2.0 * g2[1]
        out[1:] = g2[2:] - 2.0 * g2[1:-1] + g2[:-2]
        out /= h * h
    out.setflags(write=False)
    return out


@lru_cache(maxsize=4)
def kernel_matrix(w: WeightFunction, grid: QuadGrid) -> np.ndarray:
    """K[i, j] = kernel(|i - j|) / m, shared read-only across calls."""
    K = toeplitz(lag_kernel(w, grid)) / grid.m
    K.setflags(write=False)
    return K


# --------------------------------------------------------------------------
# phi and phi_0
# --------------------------------------------------------------------------

def phi(w: WeightFunction, x, grid: QuadGrid | None = None):
    """phi(x); midpoint sum with a grid, exact antiderivatives without."""
    x = np.asarray(x, dtype=float)
    if grid is None:
        A = _antiderivatives(w)
        return A.G1(x) + A.G1(1.0 - x)
    y = grid.nodes
    return (w(np.abs(x[..., None] - y)) ** 2).mean(axis=-1)


def phi_on_grid(w: WeightFunction, grid: QuadGrid) -> np.ndarray:
    """phi at the grid cells as seen by the kernel, i.e. K applied to ones."""
    return kernel_matrix(w, grid).sum(axis=1)


def phi0(w: WeightFunction, grid: QuadGrid | None = None) -> float:
    """phi_0 = 2 int (1 - x) w^2(x) dx.

    Exact unless a midpoint grid is passed, in which case the midpoint sum
    is returned.
    """
    if grid is not None and grid.rule == "midpoint":
        x = grid.nodes
        return float(np.mean(2.0 * (1.0 - x) * w(x) ** 2))
    A = _antiderivatives(w)
    return float(2.0 * (A.G1(1.0) - A.M1(1.0)))


def phi_integral(w: WeightFunction, grid: QuadGrid) -> float:
    """int phi dx on the grid, summed from the lag kernel without forming K."""
    kd = lag_kernel(w, grid)
    m = grid.m
    total = m * kd[0] + 2.0 * np.dot(m - np.arange(1, m), kd[1:])
    return float(total / (m * m))


# --------------------------------------------------------------------------
# tree integrals
# --------------------------------------------------------------------------

def _adjacency(tree: BacktrackTree) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(tree.num_vertices)]
    for a, b in sorted(tree.edges):
        adj[a - 1].append(b - 1)
        adj[b - 1].append(a - 1)
    return adj


def tree_integral(tree: BacktrackTree, K: np.ndarray, root: int = 1) -> float:
    """(1/m) sum of the root message; leaves send ones, inner vertices the
    elementwise product of K applied to their children's messages."""
    adj = _adjacency(tree)
    m = K.shape[0]
    r = root - 1
    order, parent = [r], {r: -1}
    for v in order:
        for u in adj[v]:
            if u != parent[v]:
                parent[u] = v
                order.append(u)
    msg: dict[int, np.ndarray] = {}
    for v in reversed(order):
        out = np.ones(m)
        for u in adj[v]:
            if u != parent[v]:
                out *= K @ msg.pop(u)
        msg[v] = out
    return float(msg[r].sum() / m)


def jw(pp: PairPartition, w: WeightFunction, grid: QuadGrid | None = None,
       root: int = 1) -> float:
    """J_w(pi) on the grid; ``root`` selects the vertex the recursion starts from."""
    grid = grid or QuadGrid()
    tree = backtracking_path(pp)
    return tree_integral(tree, kernel_matrix(w, grid), root)


def limit_moment(k: int, w: WeightFunction, grid: QuadGrid | None = None) -> float:
    if k < 1:
        raise ValueError("moment order must be >= 1")
    if k % 2:
        return 0.0
    grid = grid or QuadGrid()
    K = kernel_matrix(w, grid)
    return float(sum(tree_integral(backtracking_path(pp), K) for pp in enumerate_ncpp(k)))


@dataclass(frozen=True)
class LimitMoments:
    w: WeightFunction
    kmax: int
    values: dict[int, float] = field(default_factory=dict)

    @property
    def phi0(self) -> float:
        return self.values[2]

    def normalized(self, k: int) -> float:
        """Moment of the law rescaled to unit variance."""
        p0 = self.values[2]
        return self.values[k] / p0 ** (k / 2) if p0 > 0 else float("nan")


def limit_moments(w: WeightFunction, kmax: int = 8, grid: QuadGrid | None = None) -> LimitMoments:
    if kmax < 2 or kmax % 2:
        raise ValueError("kmax must be an even integer >= 2")
    grid = grid or QuadGrid()
    return LimitMoments(w, kmax, {k: limit_moment(k, w, grid) for k in range(1, kmax + 1)})


@dataclass(frozen=True)
class SemicircleVerdict:
    verdict: bool
    max_asymmetry: float
    phi_range: float


def is_semicircle(w: WeightFunction, grid: QuadGrid | None = None,
                  tol: float = 1e-8) -> SemicircleVerdict:
    """Check both w^2(x) = w^2(1 - x) and constancy of phi on the grid."""
    grid = grid or QuadGrid()
    x = grid.nodes
    asym = float(np.max(np.abs(w(x) ** 2 - w(1.0 - x) ** 2)))
    ph = phi_on_grid(w, grid)
    rng_phi = float(ph.max() - ph.min())
    W2 = w.bound ** 2
    ok = asym <= tol and rng_phi <= tol * W2
    return SemicircleVerdict(bool(ok), asym, rng_phi)


# --------------------------------------------------------------------------
# finite-n sums
# --------------------------------------------------------------------------

def _falling(n: int, r: int) -> int:
    return prod(range(n - r + 1, n + 1))


def jw_finite_n(pp: PairPartition, w: WeightFunction, n: int, mode: str = "auto",
                samples: int = 10**6, rng: RngStream | None = None) -> float:
    """(1/n^(k/2+1)) sum over injective labelings g of prod w^2(|g(u) - g(v)|/n).

    ``mode`` is "exact", "mc" or "auto" (exact when feasible). Monte Carlo
    draws uniform injections and rescales by n(n-1)...(n-k/2) / n^(k/2+1).
    """
    tree = backtracking_path(pp)
    V = tree.num_vertices
    if V > n:
        return 0.0
    lagw2 = w(np.arange(n) / n) ** 2
    edges = [(a - 1, b - 1) for a, b in sorted(tree.edges)]
    feasible = float(n) ** V <= EXACT_TERM_LIMIT
    if mode == "auto":
        mode = "exact" if feasible else "mc"
    if mode == "exact":
        if not feasible:
            raise ValueError(f"exact sum needs n^{V} = {float(n) ** V:.3g} terms; use mode='mc'")
        return _finite_exact(lagw2, edges, V, n) / float(n) ** V
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    rng = rng or RngStream(0)
    return _finite_mc(lagw2, edges, V, n, samples, rng) * (_falling(n, V) / float(n) ** V)


def _finite_exact(lagw2, edges, V, n) -> float:
    # vertex 0 is fixed by the outer loop; the others are broadcast axes
    total = 0.0
    idx = [np.arange(n).reshape((1,) * j + (n,) + (1,) * (V - 2 - j)) for j in range(V - 1)]
    distinct = np.ones((n,) * (V - 1), dtype=bool)
    for i in range(V - 1):
        for j in range(i + 1, V - 1):
            distinct &= idx[i] != idx[j]
    for g0 in range(n):
        coords = [np.array(g0)] + idx
        mask = distinct.copy()
        for c in idx:
            mask &= c != g0
        val = mask.astype(float)
        for a, b in edges:
            val = val * lagw2[np.abs(coords[a] - coords[b])]
        total += float(val.sum())
    return total


def _finite_mc(lagw2, edges, V, n, samples, rng: RngStream) -> float:
    g = rng.generator
    acc = 0.0
    got = 0
    chunk = 1 << 16
    while got < samples:
        take = min(chunk, samples - got)
        lab = g.integers(0, n, size=(2 * take + 16, V))
        srt = np.sort(lab, axis=1)
        ok = np.all(srt[:, 1:] != srt[:, :-1], axis=1)
        lab = lab[ok][:take]
        val = np.ones(lab.shape[0])
        for a, b in edges:
            val *= lagw2[np.abs(lab[:, a] - lab[:, b])]
        acc += float(val.sum())
        got += lab.shape[0]
    return acc / got


def catalan_reference(k: int) -> int:
    return catalan(k // 2) if k % 2 == 0 else 0
