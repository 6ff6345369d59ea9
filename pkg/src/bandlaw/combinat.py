"""Exact combinatorics behind the moment method.

Set partitions are stored as restricted-growth strings, pair partitions as
mate arrays (0-based). Reported blocks are 1-based, which is how index
tuples are written throughout the package.
"""
from __future__ import annotations

from collections import Counter
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from math import comb

import numpy as np

# Enumeration caps. Counts grow as Bell(k), (k-1)!! and Catalan(k/2).
MAX_SET_PARTITION_K = 10
MAX_PAIR_PARTITION_K = 12
MAX_NCPP_K = 16
MAX_WICK_INDICES = 12


def catalan(m: int) -> int:
    return comb(2 * m, m) // (m + 1)


def double_factorial(m: int) -> int:
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


@dataclass(frozen=True)
class SetPartition:
    k: int
    assignment: tuple[int, ...]

    def __post_init__(self):
        a = self.assignment
        if len(a) != self.k or self.k < 1:
            raise ValueError("assignment length must equal k >= 1")
        top = -1
        for label in a:
            if label < 0 or label > top + 1:
                raise ValueError(f"not a restricted-growth string: {a}")
            top = max(top, label)

    @property
    def num_blocks(self) -> int:
        return max(self.assignment) + 1

    def blocks(self) -> list[tuple[int, ...]]:
        """Blocks as 1-based element tuples, ordered by smallest element."""
        out: list[list[int]] = [[] for _ in range(self.num_blocks)]
        for i, label in enumerate(self.assignment):
            out[label].append(i + 1)
        return [tuple(b) for b in out]


@dataclass(frozen=True)
class PairPartition:
    """Perfect matching of {0, ..., k-1}; ``mate[i]`` is the partner of i."""

    k: int
    mate: tuple[int, ...]

    def __post_init__(self):
        if self.k < 2 or self.k % 2 or len(self.mate) != self.k:
            raise ValueError("pair partition needs even k >= 2 and len(mate) == k")
        for i, j in enumerate(self.mate):
            if not 0 <= j < self.k or j == i or self.mate[j] != i:
                raise ValueError(f"mate array is not a perfect matching: {self.mate}")

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[int]]) -> PairPartition:
        """Build from 1-based blocks, e.g. ``[(1, 4), (2, 3)]``."""
        k = 2 * len(blocks)
        mate = [-1] * k
        for blk in blocks:
            if len(blk) != 2:
                raise ValueError(f"block {blk} is not a pair")
            a, b = blk[0] - 1, blk[1] - 1
            if not (0 <= a < k and 0 <= b < k) or mate[a] != -1 or mate[b] != -1:
                raise ValueError(f"invalid blocks {blocks}")
            mate[a], mate[b] = b, a
        return cls(k, tuple(mate))

    def blocks(self) -> list[tuple[int, int]]:
        return [(i + 1, j + 1) for i, j in enumerate(self.mate) if i < j]

    def __str__(self) -> str:
        return "{" + ",".join("{%d,%d}" % b for b in self.blocks()) + "}"


@dataclass(frozen=True)
class Profile:
    k: int
    counts: tuple[int, ...]

    def __post_init__(self):
        if sum((ell + 1) * c for ell, c in enumerate(self.counts)) != self.k:
            raise ValueError("profile violates sum(l * pi_l) = k")


@dataclass(frozen=True)
class BacktrackTree:
    """Canonical backtracking walk of a non-crossing pair partition.

    ``path`` holds 1-based vertex labels. ``parent[v - 1]`` is the parent of
    vertex v in the tree rooted at 1 (0 for the root).
    """

    k: int
    path: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    parent: tuple[int, ...]

    @property
    def num_vertices(self) -> int:
        return self.k // 2 + 1

    def children(self) -> list[list[int]]:
        """children[v - 1] lists the children of vertex v."""
        out: list[list[int]] = [[] for _ in range(self.num_vertices)]
        for v, p in enumerate(self.parent, start=1):
            if p:
                out[p - 1].append(v)
        return out


def _check_range(k: int, lo: int, hi: int, what: str, even: bool = False) -> None:
    if even and k % 2:
        raise ValueError(f"{what} needs an even ground set, got k={k}")
    if not lo <= k <= hi:
        raise ValueError(f"{what}: k={k} outside supported range [{lo}, {hi}]")


def enumerate_set_partitions(k: int) -> list[SetPartition]:
    """All partitions of a k-set as restricted-growth strings, lexicographic."""
    _check_range(k, 1, MAX_SET_PARTITION_K, "enumerate_set_partitions")
    out: list[SetPartition] = []

    def grow(prefix: list[int], top: int) -> None:
        if len(prefix) == k:
            out.append(SetPartition(k, tuple(prefix)))
            return
        for label in range(top + 2):
            prefix.append(label)
            grow(prefix, max(top, label))
            prefix.pop()

    grow([0], 0)
    return out


def enumerate_pair_partitions(k: int) -> list[PairPartition]:
    """All perfect matchings of a k-set.

    The smallest unmatched element is paired with each remaining candidate
    in ascending order, so the listing is deterministic.
    """
    _check_range(k, 2, MAX_PAIR_PARTITION_K, "enumerate_pair_partitions", even=True)
    out: list[PairPartition] = []
    mate = [-1] * k

    def rec() -> None:
        try:
            i = mate.index(-1)
        except ValueError:
            out.append(PairPartition(k, tuple(mate)))
            return
        for j in range(i + 1, k):
            if mate[j] == -1:
                mate[i], mate[j] = j, i
                rec()
                mate[i] = mate[j] = -1

    rec()
    return out


def is_crossing(pp: PairPartition) -> bool:
    # a < b < c < d with {a,c}, {b,d} blocks  <=>  some block has exactly one
    # endpoint strictly inside another block's span
    m = pp.mate
    for a in range(pp.k):
        c = m[a]
        if c < a:
            continue
        for b in range(a + 1, c):
            if m[b] > c:
                return True
    return False


def enumerate_ncpp(k: int) -> list[PairPartition]:
    """Non-crossing pair partitions, generated directly by interval splitting.

    Element 0 of an interval pairs with an element at odd offset; the inside
    and the remainder are filled recursively. No crossing test is needed.
    """
    _check_range(k, 2, MAX_NCPP_K, "enumerate_ncpp", even=True)

    def rec(lo: int, hi: int) -> list[list[tuple[int, int]]]:
        # matchings of the half-open interval [lo, hi)
        if lo >= hi:
            return [[]]
        res = []
        for j in range(lo + 1, hi, 2):
            for inner in rec(lo + 1, j):
                for outer in rec(j + 1, hi):
                    res.append([(lo, j), *inner, *outer])
        return res

    out = []
    for pairs in rec(0, k):
        mate = [0] * k
        for a, b in pairs:
            mate[a], mate[b] = b, a
        out.append(PairPartition(k, tuple(mate)))
    return out


def backtracking_path(pp: PairPartition) -> BacktrackTree:
    """Canonical pi-backtracking walk.

    Start with t_1 = 1, t_2 = 2. Step l (1-based) closes back along its
    earlier partner edge if the partner comes first, otherwise opens a new
    vertex max + 1.
    """
    if is_crossing(pp):
        raise ValueError(f"backtracking path needs a non-crossing partition, got {pp}")
    k = pp.k
    path = [1, 2]
    for ell in range(1, k - 1):  # 0-based edge index of e_{ell+1}
        partner = pp.mate[ell]
        if partner < ell:
            path.append(path[partner])
        else:
            path.append(max(path) + 1)

    walk_edges = [tuple(sorted((path[i], path[(i + 1) % k]))) for i in range(k)]
    for i, j in enumerate(pp.mate):
        if walk_edges[i] != walk_edges[j]:
            raise AssertionError(f"walk {path} does not realise {pp}")
    edges = frozenset(walk_edges)
    nv = k // 2 + 1
    if len(edges) != k // 2 or len(set(path)) != nv:
        raise AssertionError(f"walk {path} is not a doubled tree")

    parent = [0] * nv
    seen = {1}
    for i in range(k):
        a, b = path[i], path[(i + 1) % k]
        if b not in seen:
            parent[b - 1] = a
            seen.add(b)
    return BacktrackTree(k, tuple(path), edges, tuple(parent))


def profile(t: Sequence[int]) -> Profile:
    """Edge-multiplicity profile of the closed walk t_1 -> ... -> t_k -> t_1."""
    k = len(t)
    if k < 1:
        raise ValueError("profile of an empty tuple")
    mult = Counter(frozenset((t[i], t[(i + 1) % k])) for i in range(k))
    counts = [0] * k
    for c in mult.values():
        counts[c - 1] += 1
    return Profile(k, tuple(counts))


def num_vertices(t: Sequence[int]) -> int:
    return len(set(t))


def wick_moment(cov, indices: Sequence) -> float:
    """E[prod Z_i] for a centred Gaussian family, by the Isserlis pairing sum.

    ``cov`` is either a Mapping keyed by index pairs (either order is
    accepted) or a 2-D array indexed by integer labels.
    """
    idx = list(indices)
    if len(idx) % 2:
        return 0.0
    if len(idx) > MAX_WICK_INDICES:
        raise ValueError(f"at most {MAX_WICK_INDICES} indices supported")

    if isinstance(cov, Mapping):
        def c(a, b):
            if (a, b) in cov:
                return cov[(a, b)]
            if (b, a) in cov:
                return cov[(b, a)]
            raise KeyError((a, b))
    else:
        arr = np.asarray(cov)

        def c(a, b):
            return arr[a, b]

    def rec(rest: list) -> float:
        if not rest:
            return 1.0
        head, tail = rest[0], rest[1:]
        total = 0.0
        for j in range(len(tail)):
            total += c(head, tail[j]) * rec(tail[:j] + tail[j + 1:])
        return total

    return float(rec(idx))
