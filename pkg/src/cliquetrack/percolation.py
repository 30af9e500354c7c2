"""Overlapping community detection by k-clique percolation.

A community is the node union of one percolation class: the set of k-cliques
reachable from each other through chains of adjacent k-cliques, where two
k-cliques are adjacent when they share exactly k-1 nodes. The detector never
materializes individual k-cliques. It enumerates maximal cliques per
connected component (Bron-Kerbosch with pivoting over bitmasks) and
percolates those directly, which produces the same node communities: any two
k-subsets of a single maximal clique are linked by one-node swaps, and two
maximal cliques of size >= k overlap in at least k-1 nodes precisely when
some k-clique of one is adjacent to some k-clique of the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator

import numpy as np
from sklearn.base import BaseEstimator

from .graphs import Snapshot, threshold
from .validation import check_k, check_snapshot, check_threshold


@dataclass(frozen=True)
class Community:
    """One overlapping community: the node union of a percolation class."""

    members: frozenset[int]
    k: int
    source_t: int | str = 0

    def __len__(self) -> int:
        return len(self.members)

    @property
    def sort_key(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))


@dataclass
class CommunityCover:
    """All communities found in one graph for a given (k, w_star).

    Communities are kept in canonical order (sorted member tuples) and may
    share nodes with each other.
    """

    communities: list[Community] = field(default_factory=list)
    k: int = 3
    w_star: float = 0.0
    t: int | str = 0

    def __len__(self) -> int:
        return len(self.communities)

    def __iter__(self) -> Iterator[Community]:
        return iter(self.communities)

    def __getitem__(self, i: int) -> Community:
        return self.communities[i]

    def member_sets(self) -> list[frozenset[int]]:
        return [c.members for c in self.communities]

    def sizes(self) -> list[int]:
        """Community sizes, largest first."""
        return sorted((len(c) for c in self.communities), reverse=True)


class UnionFind:
    """Disjoint sets over range(n), with path halving and union by size."""

    __slots__ = ("parent", "size")

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra

    def groups(self) -> list[list[int]]:
        """Members per set, ordered by smallest member."""
        by_root: dict[int, list[int]] = {}
        for x in range(len(self.parent)):
            by_root.setdefault(self.find(x), []).append(x)
        return [by_root[r] for r in sorted(by_root)]


def _bits(mask: int) -> Iterator[int]:
    while mask:
        b = mask & -mask
        mask ^= b
        yield b.bit_length() - 1


def maximal_cliques(adj: dict[int, set[int]]) -> list[frozenset[int]]:
    """All maximal cliques of a graph given as {node: neighbor set}.

    Bron-Kerbosch with greedy pivoting; candidate and exclusion sets are int
    bitmasks so the inner loops stay cheap on dense subgraphs. The recursion
    depth is bounded by the largest clique. Enumeration order is
    deterministic (ascending node order)."""
    nodes = sorted(adj)
    if not nodes:
        return []
    if all(len(adj[u]) == len(nodes) - 1 for u in nodes):
        # complete graph: one clique, and skipping it keeps the recursion
        # depth (bounded by the largest clique) small
        return [frozenset(nodes)]
    pos = {u: i for i, u in enumerate(nodes)}
    nbr = [0] * len(nodes)
    for u, vs in adj.items():
        m = 0
        for v in vs:
            m |= 1 << pos[v]
        nbr[pos[u]] = m
    found: list[int] = []

    def expand(r: int, p: int, x: int) -> None:
        if not p and not x:
            found.append(r)
            return
        best = -1
        pivot_nb = 0
        m = p | x
        while m:
            b = m & -m
            m ^= b
            c = (p & nbr[b.bit_length() - 1]).bit_count()
            if c > best:
                best = c
                pivot_nb = nbr[b.bit_length() - 1]
        cand = p & ~pivot_nb
        while cand:
            b = cand & -cand
            cand ^= b
            nb = nbr[b.bit_length() - 1]
            expand(r | b, p & nb, x & nb)
            p ^= b
            x |= b

    expand(0, (1 << len(nodes)) - 1, 0)
    return [frozenset(nodes[i] for i in _bits(r)) for r in found]


def _component_adjacency(g: Snapshot) -> Iterator[dict[int, set[int]]]:
    """Connected components as {node: neighbor set} subgraphs, smallest node first."""
    seen: set[int] = set()
    for start in g.adj:
        if start in seen:
            continue
        seen.add(start)
        comp = [start]
        stack = [start]
        while stack:
            u = stack.pop()
            for v in g.neighbors(u):
                if v not in seen:
                    seen.add(v)
                    comp.append(v)
                    stack.append(v)
        yield {u: set(g.neighbors(u)) for u in sorted(comp)}


def enumerate_k_cliques(g: Snapshot, k: int) -> set[frozenset[int]]:
    """Every complete node set of size exactly k, as a set of frozensets.

    Materialized by expanding maximal cliques into their k-subsets and
    deduplicating subsets that occur in several of them. Intended for
    inspection and small graphs; the detector itself never expands subsets.
    """
    check_k(k)
    check_snapshot(g)
    found: set[frozenset[int]] = set()
    for adj in _component_adjacency(g):
        for clique in maximal_cliques(adj):
            if len(clique) < k:
                continue
            if len(clique) == k:
                found.add(clique)
            else:
                found.update(frozenset(c) for c in combinations(sorted(clique), k))
    return found


def _percolate(cliques: list[frozenset[int]], k: int) -> list[list[int]]:
    """Group indices of maximal cliques chained by >= k-1 node overlaps.

    Two strategies with identical results: pairwise intersection tests, or
    bucketing every (k-1)-subset of every clique (two cliques overlap in at
    least k-1 nodes exactly when they share a (k-1)-subset). The cheaper one
    is picked from the estimated work.
    """
    n = len(cliques)
    dsu = UnionFind(n)
    pair_cost = n * (n - 1) // 2
    subset_cost = sum(math.comb(len(c), k - 1) for c in cliques)
    if pair_cost <= subset_cost:
        for i in range(n):
            ci = cliques[i]
            for j in range(i + 1, n):
                if len(ci & cliques[j]) >= k - 1:
                    dsu.union(i, j)
    else:
        first_with: dict[tuple[int, ...], int] = {}
        for i, clique in enumerate(cliques):
            for sub in combinations(sorted(clique), k - 1):
                owner = first_with.setdefault(sub, i)
                if owner != i:
                    dsu.union(owner, i)
    return dsu.groups()


def cpm_communities(
    g: Snapshot, k: int, *, w_star: float = 0.0, source_t: int | str | None = None
) -> CommunityCover:
    """Extract the full overlapping community cover of one graph.

    The graph is expected to be thresholded already; ``w_star`` is only
    recorded on the cover. A graph without any k-clique yields an empty
    cover. Nodes lying in no k-clique belong to no community, and the output
    is independent of input edge order.
    """
    check_k(k)
    check_snapshot(g)
    where = g.t if source_t is None else source_t
    member_sets: set[frozenset[int]] = set()
    for adj in _component_adjacency(g):
        size = len(adj)
        if size < k:
            continue
        # complete component: a single maximal clique, no enumeration needed
        if all(len(vs) == size - 1 for vs in adj.values()):
            member_sets.add(frozenset(adj))
            continue
        cliques = [c for c in maximal_cliques(adj) if len(c) >= k]
        if not cliques:
            continue
        if len(cliques) == 1:
            member_sets.add(cliques[0])
            continue
        for group in _percolate(cliques, k):
            member_sets.add(frozenset().union(*(cliques[i] for i in group)))
    ordered = sorted(member_sets, key=lambda m: tuple(sorted(m)))
    return CommunityCover(
        [Community(m, k, where) for m in ordered], k=k, w_star=float(w_star), t=where
    )


def detect_communities(g: Snapshot, k: int, w_star: float = 0.0) -> CommunityCover:
    """Threshold a raw snapshot, then extract its cover; records both parameters."""
    w_star = check_threshold(w_star)
    return cpm_communities(threshold(g, w_star), k, w_star=w_star, source_t=g.t)


def select_weight_threshold(
    g: Snapshot, k: int, max_candidates: int | None = None
) -> float:
    """Recommend a weight cutoff by the percolation-point rule.

    Candidate cutoffs are the distinct edge weights, scanned strongest
    first; the recommendation is the largest cutoff whose cover holds at
    least two communities with the largest at most twice the size of the
    second largest. Cutoffs that keep every edge are reported as 0.0 (no
    thresholding), and 0.0 is also returned when no cutoff qualifies.
    ``max_candidates`` caps the scan by subsampling the candidate grid
    evenly.
    """
    check_k(k)
    check_snapshot(g)
    if g.n_edges == 0:
        return 0.0
    distinct = sorted({w for _, _, w in g.edges()}, reverse=True)
    candidates = distinct[:-1]  # thresholding at the minimum weight keeps everything
    if max_candidates is not None and len(candidates) > max_candidates > 0:
        idx = np.unique(np.linspace(0, len(candidates) - 1, max_candidates).round().astype(int))
        candidates = [candidates[i] for i in idx]
    for cut in candidates + [0.0]:
        sizes = cpm_communities(threshold(g, cut), k).sizes()
        if len(sizes) >= 2 and sizes[0] <= 2 * sizes[1]:
            return float(cut)
    return 0.0


class CliquePercolation(BaseEstimator):
    """Overlapping community detector with the scikit-learn estimator API.

    Parameters
    ----------
    k : int, default=4
        Clique size driving the percolation; at least 3.
    w_star : float, default=0.0
        Weight cutoff applied before detection; edges below it are ignored.

    Attributes
    ----------
    cover_ : CommunityCover
        Full cover of the fitted snapshot.
    communities_ : list of frozenset
        Member sets, canonically ordered.
    n_communities_ : int

    Examples
    --------
    >>> est = CliquePercolation(k=3)
    >>> est.fit(Snapshot(0, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]))
    CliquePercolation(k=3)
    >>> est.communities_
    [frozenset({0, 1, 2})]
    """

    def __init__(self, k: int = 4, w_star: float = 0.0):
        self.k = k
        self.w_star = w_star

    def fit(self, X: Snapshot, y=None):
        check_k(self.k)
        check_threshold(self.w_star)
        check_snapshot(X)
        self.cover_ = detect_communities(X, self.k, self.w_star)
        self.communities_ = self.cover_.member_sets()
        self.n_communities_ = len(self.communities_)
        return self

    def fit_predict(self, X: Snapshot, y=None) -> list[frozenset[int]]:
        """Fit and return the member sets of the detected communities."""
        return self.fit(X).communities_
