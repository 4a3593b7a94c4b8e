"""Undirected graphs with indexed directed edges, plus the graph families
used throughout the experiments (cycles, tori, random regular graphs, trees).

Every undirected edge (i, j) contributes two directed edges, i->j and j->i.
Directed edges are indexed lexicographically by (source, destination), which
makes message vectors reproducible and trace files bit-stable across runs.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Graph",
    "EdgeWeights",
    "build_graph",
    "generate_cycle",
    "generate_torus",
    "generate_random_regular",
    "generate_tree",
    "read_edge_list",
    "write_edge_list",
]


@dataclass(frozen=True)
class Graph:
    """Connected simple undirected graph with a canonical directed-edge index.

    Attributes
    ----------
    n : int
        Number of nodes, labeled 0..n-1.
    undirected_edges : tuple of (int, int)
        Unordered pairs stored as (min, max), sorted.
    adjacency : tuple of tuple of int
        Sorted neighbor list per node.
    src, dst : int64 arrays of length 2|E|
        Endpoints of directed edge e, sorted lexicographically by (src, dst).
    reverse : int64 array
        reverse[e] is the index of the opposite directed edge (dst, src).
    undirected_index : int64 array
        Maps directed edge e to the index of its undirected edge.
    degrees : int64 array of per-node degrees.
    """

    n: int
    undirected_edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False)
    src: np.ndarray = field(repr=False)
    dst: np.ndarray = field(repr=False)
    reverse: np.ndarray = field(repr=False)
    undirected_index: np.ndarray = field(repr=False)
    degrees: np.ndarray = field(repr=False)

    @property
    def num_undirected(self) -> int:
        return len(self.undirected_edges)

    @property
    def num_directed(self) -> int:
        return 2 * len(self.undirected_edges)

    def directed_edge_index(self, i: int, j: int) -> int:
        """Index of directed edge i->j (lexicographic position)."""
        e = int(np.searchsorted(self._edge_keys, i * self.n + j))
        if e >= self.num_directed or self.src[e] != i or self.dst[e] != j:
            raise KeyError(f"no directed edge ({i},{j})")
        return e

    @property
    def _edge_keys(self) -> np.ndarray:
        return self.src * self.n + self.dst

    def is_tree(self) -> bool:
        return self.num_undirected == self.n - 1

    def regular_degree(self) -> int | None:
        """Common degree if the graph is regular, else None."""
        d = int(self.degrees[0])
        return d if bool(np.all(self.degrees == d)) else None

    def is_bipartite(self) -> bool:
        color = np.full(self.n, -1, dtype=np.int64)
        color[0] = 0
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for v in self.adjacency[u]:
                if color[v] == -1:
                    color[v] = 1 - color[u]
                    queue.append(v)
                elif color[v] == color[u]:
                    return False
        return True


def _check_connected(n: int, adjacency: list[list[int]]) -> bool:
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    reached = 1
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if not seen[v]:
                seen[v] = True
                reached += 1
                queue.append(v)
    return reached == n


def build_graph(n: int, edges: list[tuple[int, int]] | tuple[tuple[int, int], ...]) -> Graph:
    """Validate an edge list and build the canonical :class:`Graph`.

    Rejects self-loops, duplicate edges (in either orientation), out-of-range
    nodes, and disconnected graphs; the error message names the offending edge.
    """
    if n < 1:
        raise ValueError(f"node count must be positive, got {n}")
    seen: set[tuple[int, int]] = set()
    normalized: list[tuple[int, int]] = []
    for i, j in edges:
        i, j = int(i), int(j)
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i},{j}) out of range for n={n}")
        if i == j:
            raise ValueError(f"self-loop ({i},{j}) not allowed")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ValueError(f"duplicate edge ({i},{j})")
        seen.add(key)
        normalized.append(key)
    normalized.sort()

    adjacency: list[list[int]] = [[] for _ in range(n)]
    for i, j in normalized:
        adjacency[i].append(j)
        adjacency[j].append(i)
    if n > 1 and not _check_connected(n, adjacency):
        raise ValueError("disconnected graph")

    src_list: list[int] = []
    dst_list: list[int] = []
    und_idx: list[int] = []
    for u, (i, j) in enumerate(normalized):
        src_list.extend((i, j))
        dst_list.extend((j, i))
        und_idx.extend((u, u))
    order = np.lexsort((np.asarray(dst_list), np.asarray(src_list)))
    src = np.asarray(src_list, dtype=np.int64)[order]
    dst = np.asarray(dst_list, dtype=np.int64)[order]
    und = np.asarray(und_idx, dtype=np.int64)[order]

    keys = src * n + dst
    reverse = np.searchsorted(keys, dst * n + src).astype(np.int64)

    degrees = np.asarray([len(a) for a in adjacency], dtype=np.int64)
    for arr in (src, dst, reverse, und, degrees):
        arr.setflags(write=False)

    return Graph(
        n=n,
        undirected_edges=tuple(normalized),
        adjacency=tuple(tuple(sorted(a)) for a in adjacency),
        src=src,
        dst=dst,
        reverse=reverse,
        undirected_index=und,
        degrees=degrees,
    )


def generate_cycle(n: int) -> Graph:
    """Cycle on n >= 3 nodes, edges (i, (i+1) mod n). Every node has degree 2."""
    if n < 3:
        raise ValueError(f"cycle needs n >= 3, got {n}")
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def generate_torus(m: int, side: int) -> Graph:
    """Uniform grid over the m-dimensional discrete torus with side^m nodes.

    Each node has 2m neighbors, one step away (mod side) along each axis.
    side >= 3 is required; smaller sides would collapse +1/-1 neighbors into
    duplicate edges.
    """
    if m < 1:
        raise ValueError(f"torus dimension must be >= 1, got {m}")
    if side < 3:
        raise ValueError(f"torus side must be >= 3, got {side}")
    n = side**m
    strides = [side**k for k in range(m)]

    def node_id(coords: tuple[int, ...]) -> int:
        return sum(c * s for c, s in zip(coords, strides))

    edges = []
    for coords in itertools.product(range(side), repeat=m):
        u = node_id(coords)
        for axis in range(m):
            nb = list(coords)
            nb[axis] = (nb[axis] + 1) % side
            edges.append((u, node_id(tuple(nb))))
    return build_graph(n, edges)


def generate_random_regular(n: int, d: int, seed: int, max_tries: int = 1000) -> Graph:
    """Simple connected d-regular graph via the configuration model.

    Whole instances with self-loops, multi-edges, or disconnected outcomes are
    rejected and resampled; deterministic for a fixed seed.
    """
    if d < 1 or d >= n:
        raise ValueError(f"degree must satisfy 1 <= d < n, got d={d}, n={n}")
    if (n * d) % 2 != 0:
        raise ValueError(f"n*d must be even, got n={n}, d={d}")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        stubs = np.repeat(np.arange(n, dtype=np.int64), d)
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        canon = {(min(a, b), max(a, b)) for a, b in pairs.tolist()}
        if len(canon) != len(pairs):
            continue
        try:
            return build_graph(n, sorted(canon))
        except ValueError:
            continue  # disconnected instance, resample
    raise RuntimeError(
        f"no simple connected {d}-regular graph found in {max_tries} tries; try another seed"
    )


def generate_tree(n: int, shape: str = "random", seed: int = 0, arity: int = 2) -> Graph:
    """Tree on n >= 2 nodes.

    shape is one of "path", "balanced" (complete k-ary by BFS order, see
    `arity`), or "random" (uniform via a random Pruefer sequence).
    """
    if n < 2:
        raise ValueError(f"tree needs n >= 2, got {n}")
    if shape == "path":
        edges = [(i, i + 1) for i in range(n - 1)]
    elif shape == "balanced":
        edges = [(child, (child - 1) // arity) for child in range(1, n)]
    elif shape == "random":
        if n == 2:
            edges = [(0, 1)]
        else:
            rng = np.random.default_rng(seed)
            pruefer = rng.integers(0, n, size=n - 2)
            edges = _tree_from_pruefer(pruefer.tolist(), n)
    else:
        raise ValueError(f"unknown tree shape {shape!r}")
    return build_graph(n, edges)


def _tree_from_pruefer(seq: list[int], n: int) -> list[tuple[int, int]]:
    degree = [1] * n
    for v in seq:
        degree[v] += 1
    edges = []
    leaves = sorted(v for v in range(n) if degree[v] == 1)
    for v in seq:
        leaf = leaves.pop(0)
        edges.append((leaf, v))
        degree[v] -= 1
        if degree[v] == 1:
            # insert keeping the leaf pool sorted (n is small here)
            lo = int(np.searchsorted(np.asarray(leaves), v))
            leaves.insert(lo, v)
    edges.append((leaves[0], leaves[1]))
    return edges


@dataclass(frozen=True)
class EdgeWeights:
    """Positive weight per undirected edge, aligned with Graph.undirected_edges."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if np.any(v <= 0) or not np.all(np.isfinite(v)):
            raise ValueError("edge weights must be positive and finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def uniform(cls, graph: Graph, value: float = 1.0) -> "EdgeWeights":
        return cls(np.full(graph.num_undirected, value))

    @classmethod
    def from_mapping(cls, graph: Graph, mapping: dict[tuple[int, int], float]) -> "EdgeWeights":
        values = np.empty(graph.num_undirected)
        remaining = dict(mapping)
        for u, (i, j) in enumerate(graph.undirected_edges):
            w = remaining.pop((i, j), None)
            if w is None:
                w = remaining.pop((j, i), None)
            if w is None:
                raise ValueError(f"missing weight for edge ({i},{j})")
            values[u] = w
        if remaining:
            bad = next(iter(remaining))
            raise ValueError(f"weight given for non-edge {bad}")
        return cls(values)

    def per_directed_edge(self, graph: Graph) -> np.ndarray:
        return self.values[graph.undirected_index]


def write_edge_list(graph: Graph, path: str | Path) -> None:
    """Write the text format: first line "n <count>", then one "i j" per line."""
    lines = [f"n {graph.n}"]
    lines += [f"{i} {j}" for i, j in graph.undirected_edges]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path: str | Path) -> Graph:
    """Read the edge-list text format produced by :func:`write_edge_list`."""
    text = Path(path).read_text().strip().splitlines()
    if not text or not text[0].startswith("n "):
        raise ValueError(f"{path}: first line must be 'n <count>'")
    n = int(text[0].split()[1])
    edges = []
    for line in text[1:]:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        i, j = line.split()
        edges.append((int(i), int(j)))
    return build_graph(n, edges)
