"""Shared test utilities: independent graph oracles and instance generators.

These deliberately avoid the library's own derived structures (BFS from
adjacency lists only) so they can serve as oracles for them.
"""

from __future__ import annotations

from collections import deque

import numpy as np

import conprop as cp


def random_connected_graph(rng: np.random.Generator, n: int) -> cp.Graph:
    """Random tree plus a few extra random edges; always connected."""
    g = cp.generate_tree(n, shape="random", seed=int(rng.integers(2**31)))
    have = set(g.undirected_edges)
    extra = int(rng.integers(0, n))
    tries = 0
    while extra > 0 and tries < 10 * n:
        i, j = (int(v) for v in rng.integers(0, n, 2))
        key = (min(i, j), max(i, j))
        if i != j and key not in have:
            have.add(key)
            extra -= 1
        tries += 1
    return cp.build_graph(n, sorted(have))


def bfs_distances(adjacency, start: int) -> dict[int, int]:
    dist = {start: 0}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def graph_diameter(graph: cp.Graph) -> int:
    """Exact diameter by BFS from every node (test scale only)."""
    best = 0
    for s in range(graph.n):
        best = max(best, max(bfs_distances(graph.adjacency, s).values()))
    return best


def subtree_size(graph: cp.Graph, i: int, j: int) -> int:
    """Number of nodes reachable from i without crossing the edge (i, j)."""
    seen = {i}
    stack = [i]
    while stack:
        u = stack.pop()
        for v in graph.adjacency[u]:
            if (u == i and v == j) or v in seen:
                continue
            seen.add(v)
            stack.append(v)
    return len(seen)
