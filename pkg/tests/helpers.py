"""Shared graph builders for the test suite."""

from itertools import combinations

import numpy as np

from cliquetrack import Snapshot


def complete_edges(nodes, w=1.0):
    return [(u, v, w) for u, v in combinations(sorted(nodes), 2)]


def snapshot_of(*edge_groups, t=0):
    edges = {}
    for group in edge_groups:
        for u, v, w in group:
            key = (min(u, v), max(u, v))
            edges.setdefault(key, w)
    return Snapshot(t, [(u, v, w) for (u, v), w in sorted(edges.items())])


def er_snapshot(rng, n, p, t=0, weights=(1.0, 1.0)):
    """Seeded Erdos-Renyi snapshot with uniform random weights."""
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                edges.append((u, v, float(rng.uniform(*weights))))
    return Snapshot(t, edges)


def relabel(snapshot, mapping):
    return Snapshot(snapshot.t, [(mapping[u], mapping[v], w) for u, v, w in snapshot.edges()])


def random_permutation(rng, nodes):
    nodes = sorted(nodes)
    shuffled = list(np.array(nodes)[rng.permutation(len(nodes))])
    return {u: int(v) for u, v in zip(nodes, shuffled)}
