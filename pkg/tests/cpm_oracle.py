"""Independent brute-force clique percolation used to check the detector.

Deliberately takes the direct route: enumerate every k-subset, keep the
complete ones, build the clique adjacency graph explicitly (two k-cliques
are adjacent when they share exactly k-1 nodes) and read communities off
its connected components. Only used on small graphs.
"""

from itertools import combinations


def enumerate_complete_subsets(snapshot, k):
    """All complete k-subsets, found by testing every combination."""
    nodes = sorted(snapshot.nodes)
    n = len(nodes)
    index = {u: i for i, u in enumerate(nodes)}
    masks = [0] * n
    for u, v, _ in snapshot.edges():
        masks[index[u]] |= 1 << index[v]
        masks[index[v]] |= 1 << index[u]
    cliques = []
    for combo in combinations(range(n), k):
        mask = 0
        for i in combo:
            mask |= 1 << i
        if all(masks[i] & (mask ^ (1 << i)) == (mask ^ (1 << i)) for i in combo):
            cliques.append(frozenset(nodes[i] for i in combo))
    return cliques


def brute_force_classes(snapshot, k):
    """Percolation classes: (communities, clique -> class id) by literal search."""
    cliques = enumerate_complete_subsets(snapshot, k)
    adjacency = [[] for _ in cliques]
    for a in range(len(cliques)):
        for b in range(a + 1, len(cliques)):
            if len(cliques[a] & cliques[b]) == k - 1:
                adjacency[a].append(b)
                adjacency[b].append(a)

    class_of = {}
    communities = []
    seen = [False] * len(cliques)
    for start in range(len(cliques)):
        if seen[start]:
            continue
        seen[start] = True
        stack = [start]
        component = set()
        class_id = len(communities)
        while stack:
            c = stack.pop()
            component |= cliques[c]
            class_of[cliques[c]] = class_id
            for other in adjacency[c]:
                if not seen[other]:
                    seen[other] = True
                    stack.append(other)
        communities.append(frozenset(component))
    return communities, class_of


def brute_force_cover(snapshot, k):
    """Set of community node sets (frozensets) by literal percolation."""
    communities, _ = brute_force_classes(snapshot, k)
    return set(communities)
