"""Deterministic assembly of band, weighted and block matrices.

Index pairs passed in by users are 1-based, matching how the matrices are
written in formulas; arrays are 0-based internally.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from .ensembles import EnsembleSample


# --------------------------------------------------------------------------
# weight functions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightFunction:
    """Bounded weight w: [0, 1] -> R, piecewise linear between breakpoints.

    Use the constructors; ``data`` holds the defining numbers as tuples so
    that instances hash (kernel matrices are cached per weight).
    """

    kind: str
    data: tuple

    @classmethod
    def indicator_union(cls, intervals: Sequence[Sequence[float]]) -> WeightFunction:
        """Indicator of a union of closed intervals [lo, hi] in [0, 1]."""
        ivs = []
        for iv in intervals:
            lo, hi = float(iv[0]), float(iv[1])
            if not 0.0 <= lo <= hi <= 1.0:
                raise ValueError(f"interval {iv} must satisfy 0 <= lo <= hi <= 1")
            ivs.append((lo, hi))
        return cls("indicator_union", tuple(ivs))

    @classmethod
    def piecewise_constant(cls, breakpoints: Sequence[float],
                           values: Sequence[float]) -> WeightFunction:
        """Value ``values[i]`` on [b_i, b_{i+1}); the last piece includes 1."""
        b = tuple(float(x) for x in breakpoints)
        v = tuple(float(x) for x in values)
        if len(b) != len(v) + 1 or b[0] != 0.0 or b[-1] != 1.0:
            raise ValueError("breakpoints must run from 0 to 1 with len(values) + 1 entries")
        if any(b1 <= b0 for b0, b1 in zip(b, b[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        return cls("piecewise_constant", (b, v))

    @classmethod
    def tabulated(cls, values: Sequence[float]) -> WeightFunction:
        """Linear interpolation of values on a uniform grid of [0, 1]."""
        v = tuple(float(x) for x in values)
        if len(v) < 2:
            raise ValueError("tabulated weight needs at least two grid values")
        return cls("tabulated", (v,))

    @classmethod
    def constant(cls, c: float = 1.0) -> WeightFunction:
        return cls.piecewise_constant([0.0, 1.0], [c])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "indicator_union":
            out = np.zeros(x.shape)
            for lo, hi in self.data:
                out[(x >= lo) & (x <= hi)] = 1.0
            return out
        if self.kind == "piecewise_constant":
            b, v = self.data
            idx = np.clip(np.searchsorted(b, x, side="right") - 1, 0, len(v) - 1)
            out = np.asarray(v)[idx]
            return np.where((x < 0.0) | (x > 1.0), 0.0, out)
        (v,) = self.data
        return np.interp(x, np.linspace(0.0, 1.0, len(v)), v, left=0.0, right=0.0)

    @property
    def bound(self) -> float:
        """W = sup |w|."""
        if self.kind == "indicator_union":
            return 1.0 if any(hi > lo for lo, hi in self.data) else 0.0
        vals = self.data[1] if self.kind == "piecewise_constant" else self.data[0]
        return float(max(abs(x) for x in vals))

    def linear_pieces(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(edges, c0, c1) with w(x) = c0[i] + c1[i] x on [edges[i], edges[i+1]].

        Values at the breakpoints themselves (a null set) are ignored.
        """
        if self.kind == "tabulated":
            (v,) = self.data
            edges = np.linspace(0.0, 1.0, len(v))
            v = np.asarray(v)
            c1 = np.diff(v) / np.diff(edges)
            c0 = v[:-1] - c1 * edges[:-1]
            return edges, c0, c1
        if self.kind == "piecewise_constant":
            b, v = self.data
            return np.asarray(b), np.asarray(v), np.zeros(len(v))
        pts = {0.0, 1.0}
        for lo, hi in self.data:
            pts.update((lo, hi))
        edges = np.array(sorted(pts))
        mids = 0.5 * (edges[1:] + edges[:-1])
        return edges, self(mids), np.zeros(len(mids))

    def describe(self) -> dict:
        if self.kind == "indicator_union":
            return {"kind": self.kind, "intervals": [list(iv) for iv in self.data]}
        if self.kind == "piecewise_constant":
            return {"kind": self.kind, "breakpoints": list(self.data[0]),
                    "values": list(self.data[1])}
        return {"kind": self.kind, "values": list(self.data[0])}


# --------------------------------------------------------------------------
# band matrices
# --------------------------------------------------------------------------

def is_bandwidth(b: int, n: int) -> bool:
    return b == n or (1 <= b < n and b % 2 == 1)


@dataclass(frozen=True)
class BandSpec:
    n: int
    h: int
    periodic: bool = True

    def __post_init__(self):
        if not 1 <= self.h <= self.n:
            raise ValueError(f"halfwidth must lie in 1..n, got h={self.h}, n={self.n}")

    @property
    def b(self) -> int:
        return min(2 * self.h - 1, self.n)

    @classmethod
    def from_bandwidth(cls, n: int, b: int, periodic: bool = True) -> BandSpec:
        if not is_bandwidth(b, n):
            raise ValueError(f"{b} is not a bandwidth for n={n} (odd and < n, or n)")
        h = (b + 1) // 2 if b < n else (n + 2) // 2
        return cls(n, h, periodic)


def band_relevant(p, q, n: int, b: int):
    """Whether (p, q) lies in the periodic band of width b (1-based indices)."""
    if not is_bandwidth(b, n):
        raise ValueError(f"{b} is not a bandwidth for n={n}")
    d = np.abs(np.asarray(p) - np.asarray(q))
    if b == n:
        out = np.ones(d.shape, dtype=bool)
    else:
        half = (b - 1) // 2
        out = (d <= half) | (d >= n - half)
    return bool(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class StructuredMatrix:
    n: int
    values: np.ndarray
    normalization: float
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values.setflags(write=False)


def _lags(n: int) -> np.ndarray:
    i = np.arange(n)
    return np.abs(i[:, None] - i[None, :])


def _check_dims(sample: EnsembleSample, n: int) -> None:
    if sample.n != n:
        raise ValueError(f"sample has dimension {sample.n}, structure expects {n}")


def build_periodic_band(sample: EnsembleSample, spec: BandSpec) -> StructuredMatrix:
    """X = a^b / sqrt(b), a^b keeping only b-relevant entries."""
    if not spec.periodic:
        raise ValueError("build_periodic_band needs a periodic BandSpec")
    _check_dims(sample, spec.n)
    idx = np.arange(1, spec.n + 1)
    mask = band_relevant(idx[:, None], idx[None, :], spec.n, spec.b)
    scale = 1.0 / sqrt(spec.b)
    return StructuredMatrix(spec.n, np.where(mask, sample.entries * scale, 0.0), scale,
                            {"structure": "periodic_band", "h": spec.h, "b": spec.b,
                             "ensemble": sample.ensemble_id})


def build_nonperiodic_band(sample: EnsembleSample, spec: BandSpec) -> StructuredMatrix:
    """Entries with |i - j| <= h - 1, scaled by 1/sqrt(b)."""
    if spec.periodic:
        raise ValueError("build_nonperiodic_band needs a non-periodic BandSpec")
    _check_dims(sample, spec.n)
    mask = _lags(spec.n) <= spec.h - 1
    scale = 1.0 / sqrt(spec.b)
    return StructuredMatrix(spec.n, np.where(mask, sample.entries * scale, 0.0), scale,
                            {"structure": "nonperiodic_band", "h": spec.h, "b": spec.b,
                             "ensemble": sample.ensemble_id})


def build_band(sample: EnsembleSample, spec: BandSpec) -> StructuredMatrix:
    if spec.periodic:
        return build_periodic_band(sample, spec)
    return build_nonperiodic_band(sample, spec)


def build_weighted(sample: EnsembleSample, w: WeightFunction) -> StructuredMatrix:
    """X(i, j) = w(|i - j| / n) a(i, j) / sqrt(n)."""
    n = sample.n
    lagw = w(np.arange(n) / n)
    scale = 1.0 / sqrt(n)
    return StructuredMatrix(n, lagw[_lags(n)] * sample.entries * scale, scale,
                            {"structure": "weighted", "weight": w.describe(),
                             "ensemble": sample.ensemble_id})


# --------------------------------------------------------------------------
# equivalence relations and block matrices
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EquivalenceRelation:
    """Partition of the index pairs of an n x n matrix into classes.

    ``class_of[p, q]`` (0-based) is a compact class id; symmetric by
    construction, so (p, q) ~ (q, p) always.
    """

    n: int
    class_of: np.ndarray
    kind: str
    k: int = 1
    block_n: int = 0

    def __post_init__(self):
        c = self.class_of
        if c.shape != (self.n, self.n):
            raise ValueError("class_of must be n x n")
        if not np.array_equal(c, c.T):
            raise ValueError("equivalence classes must be closed under transposition")
        c.setflags(write=False)

    @classmethod
    def from_classes(cls, labels) -> EquivalenceRelation:
        labels = np.asarray(labels)
        _, inv = np.unique(labels, return_inverse=True)
        return cls(labels.shape[0], inv.reshape(labels.shape), "custom")

    @property
    def num_classes(self) -> int:
        return int(self.class_of.max()) + 1

    def same_class(self, p1: int, q1: int, p2: int, q2: int) -> bool:
        """1-based query (p1, q1) ~ (p2, q2)."""
        return bool(self.class_of[p1 - 1, q1 - 1] == self.class_of[p2 - 1, q2 - 1])

    def representatives(self) -> np.ndarray:
        """First upper-triangle position (row-major) of every class, 0-based."""
        iu = np.triu_indices(self.n)
        _, first = np.unique(self.class_of[iu], return_index=True)
        return np.stack([iu[0][first], iu[1][first]], axis=1)


EQUIVALENCE_KINDS = ("trivial", "toeplitz", "hankel", "homogeneous")


def block_dimension(kind: str, k: int, block_n: int) -> int:
    """Total matrix size; Hankel blocks form a (k+1)/2 x (k+1)/2 grid."""
    if kind == "hankel":
        if k % 2 == 0:
            raise ValueError("Hankel block matrices need an odd number k of blocks")
        return (k + 1) // 2 * block_n
    return k * block_n


def make_equivalence(kind: str, k: int = 1, block_n: int = 1) -> EquivalenceRelation:
    """Relation induced by a block structure on (block index, in-block index) pairs."""
    if kind not in EQUIVALENCE_KINDS:
        raise ValueError(f"unknown equivalence kind {kind!r}; expected one of {EQUIVALENCE_KINDS}")
    if k < 1 or block_n < 1:
        raise ValueError("k and block_n must be positive")
    N = block_dimension(kind, k, block_n)
    P, Q = np.indices((N, N))
    lo, hi = np.minimum(P, Q), np.maximum(P, Q)
    if kind == "trivial":
        key = lo * N + hi
    else:
        I, a = np.divmod(P, block_n)
        J, b = np.divmod(Q, block_n)
        amin, amax = np.minimum(a, b), np.maximum(a, b)
        # in-block entry read off the non-transposed block
        ra = np.where(I <= J, a, b)
        rb = np.where(I <= J, b, a)
        if kind == "toeplitz":
            tag = np.abs(I - J)
            symmetric_block = tag == 0
        elif kind == "hankel":
            tag = I + J
            symmetric_block = tag % 2 == 0  # tag + 1 odd
        else:
            tag = (I != J).astype(int)
            symmetric_block = tag == 0
        ra = np.where(symmetric_block, amin, ra)
        rb = np.where(symmetric_block, amax, rb)
        key = (tag * block_n + ra) * block_n + rb
    _, inv = np.unique(key, return_inverse=True)
    return EquivalenceRelation(N, inv.reshape(N, N), kind, k, block_n)


def apply_equivalence(base, rel: EquivalenceRelation) -> EnsembleSample:
    """Copy one value per class onto every member of the class.

    ``base`` is either an EnsembleSample of matching size, whose entries at
    the class representatives are used, or a 1-D array with one value per
    class in class-id order.
    """
    if isinstance(base, EnsembleSample):
        _check_dims(base, rel.n)
        reps = rel.representatives()
        values = base.entries[reps[:, 0], reps[:, 1]]
        meta = (base.ensemble_id, base.seed, base.replica)
    else:
        values = np.asarray(base, dtype=float)
        if values.ndim != 1 or values.size != rel.num_classes:
            raise ValueError(f"need one value per class ({rel.num_classes}), got shape {values.shape}")
        meta = ("class_values", 0, 0)
    out = values[rel.class_of]
    return EnsembleSample(rel.n, out, f"{meta[0]}|{rel.kind}", meta[1], meta[2])


def _require_symmetric(block: np.ndarray, label: str) -> None:
    if not np.array_equal(block, block.T):
        raise ValueError(f"block {label} must be symmetric")


def build_block_matrix(kind: str, blocks: Sequence[np.ndarray], k: int) -> StructuredMatrix:
    """Assemble a Toeplitz, Hankel or homogeneous block matrix with its scaling.

    toeplitz: blocks A1..Ak, block (I, J) = A_{|J-I|+1} (transposed below
    the diagonal), scale 1/sqrt(k n).
    hankel: k odd, blocks A1..Ak on a (k+1)/2 grid, block (I, J) = A_{I+J+1}
    (transposed below the diagonal), scale 1/sqrt((k+1)/2 n).
    homogeneous: blocks [A, B], A on the diagonal, B above, B^T below,
    scale 1/sqrt(k n).
    """
    blocks = [np.asarray(b, dtype=float) for b in blocks]
    bn = blocks[0].shape[0]
    if any(b.shape != (bn, bn) for b in blocks):
        raise ValueError("all blocks must be square of equal size")
    if kind == "toeplitz":
        if len(blocks) != k:
            raise ValueError(f"toeplitz needs k={k} blocks, got {len(blocks)}")
        _require_symmetric(blocks[0], "A1")
        grid = k

        def pick(I, J):
            return blocks[J - I] if J >= I else blocks[I - J].T
    elif kind == "hankel":
        if k % 2 == 0:
            raise ValueError("Hankel block matrices need odd k")
        if len(blocks) != k:
            raise ValueError(f"hankel needs k={k} blocks, got {len(blocks)}")
        for i in range(0, k, 2):
            _require_symmetric(blocks[i], f"A{i + 1}")
        grid = (k + 1) // 2

        def pick(I, J):
            return blocks[I + J] if I <= J else blocks[I + J].T
    elif kind == "homogeneous":
        if len(blocks) != 2:
            raise ValueError("homogeneous needs blocks [A, B]")
        _require_symmetric(blocks[0], "A")
        grid = k

        def pick(I, J):
            if I == J:
                return blocks[0]
            return blocks[1] if I < J else blocks[1].T
    else:
        raise ValueError(f"unknown block kind {kind!r}")
    full = np.block([[pick(I, J) for J in range(grid)] for I in range(grid)])
    scale = 1.0 / sqrt(grid * bn)
    return StructuredMatrix(grid * bn, full * scale, scale,
                            {"structure": "block", "kind": kind, "k": k, "block_n": bn})


def build_from_relation(sample: EnsembleSample, rel: EquivalenceRelation) -> StructuredMatrix:
    """Block matrix from a base scheme: tie entries per class, scale 1/sqrt(N)."""
    tied = apply_equivalence(sample, rel)
    scale = 1.0 / sqrt(rel.n)
    return StructuredMatrix(rel.n, tied.entries * scale, scale,
                            {"structure": "block", "kind": rel.kind, "k": rel.k,
                             "block_n": rel.block_n, "ensemble": sample.ensemble_id})


# --------------------------------------------------------------------------
# condition checker
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionReport:
    e1_max: int
    e2_max: int
    e3_count: int


def verify_conditions(rel: EquivalenceRelation) -> ConditionReport:
    """Exhaustive counts behind the three structural conditions.

    e1_max   = max_p #{(q, r, s) : (p, q) ~ (r, s)}
    e2_max   = max_{p, q, r} #{s : (p, q) ~ (r, s)}
    e3_count = #{(p, q, r) : (p, q) ~ (q, r), r != p}

    Plain enumeration, O(n^4) time; meant for n up to about 60.
    """
    c = rel.class_of
    n = rel.n
    e1 = e2 = 0
    for p in range(n):
        hits = c[p, :, None, None] == c[None, :, :]  # (q, r, s)
        e1 = max(e1, int(hits.sum()))
        e2 = max(e2, int(hits.sum(axis=2).max()))
    off_diag = ~np.eye(n, dtype=bool)
    e3 = 0
    for q in range(n):
        hits = c[:, q][:, None] == c[q, :][None, :]  # (p, r)
        e3 += int((hits & off_diag).sum())
    return ConditionReport(e1, e2, e3)
