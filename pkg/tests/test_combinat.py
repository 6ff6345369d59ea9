import itertools
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bandlaw.combinat import (
    PairPartition, SetPartition, backtracking_path, catalan, double_factorial,
    enumerate_ncpp, enumerate_pair_partitions, enumerate_set_partitions,
    is_crossing, num_vertices, profile, wick_moment,
)

BELL = [1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975]


def _brute_rgs(k):
    # all label arrays in {0..k-1}^k filtered to restricted-growth form
    out = []
    for a in itertools.product(range(k), repeat=k):
        top, ok = -1, True
        for x in a:
            if x > top + 1:
                ok = False
                break
            top = max(top, x)
        if ok:
            out.append(a)
    return out


def test_set_partitions_small():
    assert [p.assignment for p in enumerate_set_partitions(1)] == [(0,)]
    assert len(enumerate_set_partitions(3)) == 5
    got = [p.assignment for p in enumerate_set_partitions(4)]
    assert got == sorted(_brute_rgs(4))
    assert len(got) == 15


@pytest.mark.parametrize("k", range(1, 11))
def test_bell_counts(k):
    parts = enumerate_set_partitions(k)
    assert len(parts) == BELL[k]
    assert len({p.assignment for p in parts}) == BELL[k]


def test_set_partition_blocks():
    p = SetPartition(4, (0, 1, 0, 2))
    assert p.num_blocks == 3
    assert p.blocks() == [(1, 3), (2,), (4,)]
    with pytest.raises(ValueError):
        SetPartition(3, (0, 2, 1))


def test_set_partition_range_error_names_limit():
    with pytest.raises(ValueError, match="10"):
        enumerate_set_partitions(11)
    with pytest.raises(ValueError):
        enumerate_set_partitions(0)


@pytest.mark.parametrize("k", [2, 4, 6, 8, 10, 12])
def test_pair_partition_counts(k):
    pps = enumerate_pair_partitions(k)
    assert len(pps) == double_factorial(k - 1)
    assert len(set(pps)) == len(pps)


def test_pair_partition_order_and_errors():
    assert [p.blocks() for p in enumerate_pair_partitions(2)] == [[(1, 2)]]
    assert [p.blocks() for p in enumerate_pair_partitions(4)] == [
        [(1, 2), (3, 4)], [(1, 3), (2, 4)], [(1, 4), (2, 3)]]
    with pytest.raises(ValueError):
        enumerate_pair_partitions(5)
    with pytest.raises(ValueError):
        enumerate_pair_partitions(14)
    with pytest.raises(ValueError):
        PairPartition(4, (1, 0, 2, 3))


def test_is_crossing_examples():
    assert not is_crossing(PairPartition.from_blocks([(1, 2), (3, 4)]))
    assert is_crossing(PairPartition.from_blocks([(1, 3), (2, 4)]))
    assert not is_crossing(PairPartition.from_blocks([(1, 4), (2, 3)]))


def _crossing_brute(pp):
    bl = pp.blocks()
    for (a, c), (b, d) in itertools.permutations(bl, 2):
        if a < b < c < d:
            return True
    return False


@pytest.mark.parametrize("k", [2, 4, 6, 8, 10, 12])
def test_ncpp_matches_filtration(k):
    direct = enumerate_ncpp(k)
    filtered = [p for p in enumerate_pair_partitions(k) if not is_crossing(p)]
    assert len(direct) == len(filtered) == catalan(k // 2)
    assert set(direct) == set(filtered)
    if k <= 8:
        assert all(not _crossing_brute(p) for p in direct)
        assert sum(_crossing_brute(p) for p in enumerate_pair_partitions(k)) == (
            double_factorial(k - 1) - catalan(k // 2))


def test_ncpp_large_and_errors():
    assert len(enumerate_ncpp(14)) == catalan(7)
    assert len(enumerate_ncpp(16)) == catalan(8)
    assert len(enumerate_ncpp(4)) == 2
    with pytest.raises(ValueError):
        enumerate_ncpp(3)
    with pytest.raises(ValueError):
        enumerate_ncpp(18)


def test_backtracking_examples():
    t1 = backtracking_path(PairPartition.from_blocks([(1, 2), (3, 4)]))
    t2 = backtracking_path(PairPartition.from_blocks([(1, 4), (2, 3)]))
    assert t1.path == (1, 2, 1, 3)
    assert t2.path == (1, 2, 3, 2)
    t0 = backtracking_path(PairPartition.from_blocks([(1, 2)]))
    assert t0.path == (1, 2)
    assert t0.edges == frozenset({(1, 2)})
    assert t1.parent == (0, 1, 1)
    assert t2.parent == (0, 1, 2)
    with pytest.raises(ValueError):
        backtracking_path(PairPartition.from_blocks([(1, 3), (2, 4)]))


def _is_tree(nv, edges):
    seen, stack = {1}, [1]
    adj = {v: [] for v in range(1, nv + 1)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return len(edges) == nv - 1 and len(seen) == nv


@pytest.mark.parametrize("k", [2, 4, 6, 8, 10])
def test_backtracking_invariants(k):
    for pp in enumerate_ncpp(k):
        tree = backtracking_path(pp)
        assert tree.path[:2] == (1, 2)
        assert num_vertices(tree.path) == k // 2 + 1
        prof = profile(tree.path).counts
        assert prof[1] == k // 2 and sum(prof) == k // 2
        assert _is_tree(tree.num_vertices, tree.edges)
        # parent array agrees with the edge set
        assert {tuple(sorted((v, p))) for v, p in enumerate(tree.parent, 1) if p} == set(tree.edges)


def test_profile_examples():
    assert profile((1, 2)).counts == (0, 1)
    assert profile((1, 2, 3)).counts == (3, 0, 0)
    assert profile((1, 2, 1, 3)).counts == (0, 2, 0, 0)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(1, 6), min_size=1, max_size=8), st.permutations(range(1, 7)))
def test_profile_relabel_invariant(t, perm):
    relabeled = [perm[x - 1] * 7 + 3 for x in t]
    p = profile(t)
    assert profile(relabeled) == p
    assert sum((i + 1) * c for i, c in enumerate(p.counts)) == len(t)


@pytest.mark.parametrize("n,k", [(n, k) for n in range(1, 7) for k in range(1, 5)])
def test_tuple_count_bound(n, k):
    # #{t : #V_t <= l} <= k^k n n^(l-1) with full bandwidth
    nv = np.array([num_vertices(t) for t in itertools.product(range(1, n + 1), repeat=k)])
    for ell in range(1, k + 1):
        assert (nv <= ell).sum() <= k ** k * n * n ** (ell - 1)


def test_wick_examples():
    assert wick_moment({("P", "P"): 1.0}, ["P", "P"]) == 1.0
    assert wick_moment({("P", "P"): 1.0}, ["P"] * 4) == 3.0
    assert wick_moment({("P", "P"): 1.0}, ["P"] * 3) == 0.0
    cov = {(1, 2): 0.3, (3, 4): 0.5, (1, 3): -0.2, (2, 4): 0.7, (1, 4): 0.1, (2, 3): 0.4}
    assert wick_moment(cov, [1, 2, 3, 4]) == pytest.approx(0.3 * 0.5 - 0.2 * 0.7 + 0.1 * 0.4)
    assert wick_moment({(2, 1): 0.3, (3, 4): 0.5, (3, 1): -0.2, (4, 2): 0.7, (1, 4): 0.1,
                        (2, 3): 0.4}, [1, 2, 3, 4]) == pytest.approx(0.15 - 0.14 + 0.04)
    with pytest.raises(KeyError):
        wick_moment({(1, 1): 1.0}, [1, 2])


def test_wick_counts_pairings():
    # all-ones covariance: the sum counts pairings, (2m-1)!!
    ones = np.ones((12, 12))
    for m in range(1, 7):
        assert wick_moment(ones, list(range(2 * m))) == double_factorial(2 * m - 1)
    assert factorial(6) // (2 ** 3 * factorial(3)) == 15


def test_wick_vs_monte_carlo():
    rng = np.random.default_rng(1234)
    A = rng.standard_normal((4, 4))
    C = A @ A.T / 4 + 0.2 * np.eye(4)
    Z = rng.multivariate_normal(np.zeros(4), C, size=10**6)
    for idx in ([0, 1, 2, 3], [0, 0, 1, 1], [2, 2, 2, 2], [0, 0, 0, 3]):
        vals = np.prod(Z[:, idx], axis=1)
        est, se = vals.mean(), vals.std(ddof=1) / np.sqrt(vals.size)
        assert abs(est - wick_moment(C, idx)) <= 4 * se
