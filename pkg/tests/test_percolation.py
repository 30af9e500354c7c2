from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cliquetrack import (
    CliquePercolation,
    Snapshot,
    UnionFind,
    cpm_communities,
    detect_communities,
    enumerate_k_cliques,
    maximal_cliques,
    select_weight_threshold,
    threshold,
)
from cpm_oracle import brute_force_cover
from helpers import complete_edges, er_snapshot, random_permutation, relabel, snapshot_of


def cover_sets(cover):
    return set(cover.member_sets())


class TestMaximalCliques:
    def test_triangle_plus_tail(self):
        adj = {0: {1, 2}, 1: {0, 2}, 2: {0, 1, 3}, 3: {2}}
        found = set(maximal_cliques(adj))
        assert found == {frozenset({0, 1, 2}), frozenset({2, 3})}

    def test_empty(self):
        assert maximal_cliques({}) == []

    def test_complete_graph_single_clique(self):
        nodes = range(9)
        adj = {u: set(nodes) - {u} for u in nodes}
        assert set(maximal_cliques(adj)) == {frozenset(nodes)}


class TestEnumerateKCliques:
    def test_triangle(self):
        s = snapshot_of(complete_edges([0, 1, 2]))
        assert enumerate_k_cliques(s, 3) == {frozenset({0, 1, 2})}

    def test_four_cycle_has_no_triangle(self):
        s = Snapshot(0, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)])
        assert enumerate_k_cliques(s, 3) == set()

    def test_k5_expands_to_all_4_subsets(self):
        # expected computed independently: every 4-subset of a complete graph
        expected = {frozenset(c) for c in combinations(range(5), 4)}
        s = snapshot_of(complete_edges(range(5)))
        assert enumerate_k_cliques(s, 4) == expected

    def test_k_below_3_rejected(self):
        with pytest.raises(ValueError, match="k must be"):
            enumerate_k_cliques(Snapshot(0, []), 2)


class TestCpmCommunities:
    def test_single_k4(self):
        s = snapshot_of(complete_edges([0, 1, 2, 3]))
        assert cover_sets(cpm_communities(s, 4)) == {frozenset({0, 1, 2, 3})}

    def test_two_k4_sharing_three_nodes_merge(self):
        # cliques {1,2,3,4} and {1,2,3,5} share 3 = k-1 nodes -> one community
        s = snapshot_of(complete_edges([1, 2, 3, 4]), complete_edges([1, 2, 3, 5]))
        cover = cpm_communities(s, 4)
        assert cover_sets(cover) == {frozenset({1, 2, 3, 4, 5})}
        assert cover_sets(cover) == brute_force_cover(s, 4)

    def test_two_k4_sharing_one_node_overlap(self):
        s = snapshot_of(complete_edges([0, 1, 2, 3]), complete_edges([3, 4, 5, 6]))
        cover = cpm_communities(s, 4)
        assert cover_sets(cover) == {frozenset({0, 1, 2, 3}), frozenset({3, 4, 5, 6})}
        assert cover_sets(cover) == brute_force_cover(s, 4)

    def test_no_k_clique_yields_empty_cover(self):
        s = Snapshot(0, [(0, 1, 1), (1, 2, 1)])
        assert len(cpm_communities(s, 3)) == 0

    def test_nodes_outside_cliques_belong_nowhere(self):
        s = snapshot_of(complete_edges([0, 1, 2]), [(2, 9, 1.0)])
        cover = cpm_communities(s, 3)
        assert cover_sets(cover) == {frozenset({0, 1, 2})}

    def test_nested_communities_match_oracle(self):
        # a percolation class whose node set sits inside another class's node
        # set: clique {0,1,4,5} overlaps two chained K4 blocks by only 2 nodes
        groups = [
            complete_edges([0, 1, 2, 3]),
            complete_edges([4, 5, 6, 7]),
            complete_edges([0, 1, 4, 5]),
            complete_edges([1, 2, 3, 8]),
            complete_edges([2, 3, 8, 9]),
            complete_edges([3, 8, 9, 10]),
            complete_edges([8, 9, 10, 4]),
            complete_edges([9, 10, 4, 5]),
            complete_edges([10, 4, 5, 6]),
        ]
        s = snapshot_of(*groups)
        got = cover_sets(cpm_communities(s, 4))
        assert got == brute_force_cover(s, 4)
        small = frozenset({0, 1, 4, 5})
        assert small in got
        assert any(small < other for other in got)

    def test_deterministic_under_edge_order(self):
        rng = np.random.default_rng(5)
        s = er_snapshot(rng, 14, 0.4)
        edges = list(s.edges())
        scrambled = Snapshot(0, list(reversed(edges)))
        a = cpm_communities(s, 3)
        b = cpm_communities(scrambled, 3)
        assert a.member_sets() == b.member_sets()

    def test_relabeling_maps_cover(self):
        rng = np.random.default_rng(11)
        for seed in range(5):
            rng = np.random.default_rng(seed)
            s = er_snapshot(rng, 12, 0.45)
            mapping = random_permutation(rng, range(12))
            mapped = relabel(s, mapping)
            original = cover_sets(cpm_communities(s, 3))
            expected = {frozenset(mapping[u] for u in c) for c in original}
            assert cover_sets(cpm_communities(mapped, 3)) == expected

    @given(st.integers(0, 10_000), st.integers(4, 14), st.floats(0.15, 0.6))
    @settings(max_examples=40)
    def test_matches_bruteforce_on_random_graphs(self, seed, n, p):
        rng = np.random.default_rng(seed)
        s = er_snapshot(rng, n, p)
        for k in (3, 4):
            assert cover_sets(cpm_communities(s, k)) == brute_force_cover(s, k)

    @given(st.integers(0, 10_000))
    @settings(max_examples=30)
    def test_members_have_k_minus_1_internal_neighbors(self, seed):
        rng = np.random.default_rng(seed)
        s = er_snapshot(rng, 15, 0.4)
        k = 4
        for community in cpm_communities(s, k):
            for node in community.members:
                internal = sum(1 for v in s.neighbors(node) if v in community.members)
                assert internal >= k - 1

    @given(st.integers(0, 10_000))
    @settings(max_examples=30)
    def test_containment_under_edge_growth(self, seed):
        rng = np.random.default_rng(seed)
        big = er_snapshot(rng, 14, 0.5)
        kept = [e for e in big.edges() if rng.random() < 0.6]
        small = Snapshot(0, kept)
        big_cover = cpm_communities(big, 4)
        for community in cpm_communities(small, 4):
            containers = [
                other for other in big_cover if community.members <= other.members
            ]
            assert len(containers) == 1


class TestSelectWeightThreshold:
    def test_weakest_point_reports_zero(self):
        # two plain cliques, sizes 10 and 6, uniform weights: no positive
        # cutoff removes anything, and the full graph already satisfies
        # largest <= 2 * second largest
        s = snapshot_of(complete_edges(range(10)), complete_edges(range(10, 16)))
        assert select_weight_threshold(s, 4) == 0.0

    def test_uniform_weight_graph(self):
        s = snapshot_of(complete_edges(range(5), w=2.0))
        assert select_weight_threshold(s, 4) == 0.0

    def test_empty_graph(self):
        assert select_weight_threshold(Snapshot(0, []), 4) == 0.0

    def test_finds_percolation_point(self):
        # strong K4 pair bridged by weak edges: only the strong cutoff splits
        # the graph into two comparable communities
        strong = complete_edges([0, 1, 2, 3], w=5.0) + complete_edges([4, 5, 6, 7], w=5.0)
        weak = [
            (1, 4, 1.0),
            (2, 4, 1.0),
            (3, 4, 1.0),
            (2, 5, 1.0),
            (3, 5, 1.0),
            (3, 6, 1.0),
        ]
        s = snapshot_of(strong, weak)
        assert cover_sets(cpm_communities(s, 4)) == {frozenset(range(8))}
        assert select_weight_threshold(s, 4) == 5.0

    def test_max_candidates_subsampling(self):
        edges = [(i, i + 1, float(i + 1)) for i in range(40)]
        s = Snapshot(0, edges)
        assert select_weight_threshold(s, 3, max_candidates=5) == 0.0


class TestDetectCommunities:
    def test_threshold_applied_before_detection(self):
        s = snapshot_of(complete_edges([0, 1, 2], w=3.0), [(0, 9, 0.2), (1, 9, 0.2), (2, 9, 0.2)])
        cover = detect_communities(s, 3, w_star=1.0)
        assert cover_sets(cover) == {frozenset({0, 1, 2})}
        assert cover.w_star == 1.0 and cover.k == 3 and cover.t == 0

    def test_equivalent_to_manual_threshold(self):
        rng = np.random.default_rng(3)
        s = er_snapshot(rng, 12, 0.5, weights=(0.2, 3.0))
        direct = detect_communities(s, 3, 1.0)
        manual = cpm_communities(threshold(s, 1.0), 3)
        assert direct.member_sets() == manual.member_sets()


class TestUnionFind:
    def test_groups(self):
        dsu = UnionFind(6)
        dsu.union(0, 1)
        dsu.union(1, 2)
        dsu.union(4, 5)
        assert dsu.find(0) == dsu.find(2)
        assert dsu.find(3) != dsu.find(4)
        assert dsu.groups() == [[0, 1, 2], [3], [4, 5]]


class TestCliquePercolationEstimator:
    def test_fit_exposes_cover(self):
        est = CliquePercolation(k=3, w_star=0.0)
        s = snapshot_of(complete_edges([0, 1, 2]), complete_edges([5, 6, 7]))
        assert est.fit(s) is est
        assert est.n_communities_ == 2
        assert est.fit_predict(s) == [frozenset({0, 1, 2}), frozenset({5, 6, 7})]

    def test_invalid_k_raises_on_fit(self):
        with pytest.raises(ValueError):
            CliquePercolation(k=2).fit(Snapshot(0, []))
