"""Undirected graph container and graph-theoretic distances."""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from .errors import DisconnectedGraphError

__all__ = [
    "Graph",
    "DistanceMatrix",
    "Component",
    "shortest_path_distances",
    "connected_components",
]


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph over vertices ``0 .. num_vertices - 1``.

    Edges are stored as canonical ``(min, max)`` pairs with no self-loops
    and no duplicates. ``features``, when present, is an ``(n, F)`` float
    array with one row per vertex.
    """

    num_vertices: int
    edges: frozenset[tuple[int, int]]
    features: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.num_vertices < 1:
            raise ValueError("graph must have at least one vertex")
        for u, v in self.edges:
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise ValueError(f"edge ({u},{v}) out of range for n={self.num_vertices}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if u > v:
                raise ValueError(f"edge ({u},{v}) not in canonical (min,max) order")
        if self.features is not None:
            feats = np.asarray(self.features, dtype=np.float64)
            if feats.ndim != 2 or feats.shape[0] != self.num_vertices or feats.shape[1] < 1:
                raise ValueError(
                    f"features must be (n, F) with F >= 1, got shape {feats.shape}"
                )
            object.__setattr__(self, "features", feats)

    @classmethod
    def from_edges(
        cls,
        num_vertices: int,
        edges: Iterable[tuple[int, int]],
        features: np.ndarray | None = None,
    ) -> Graph:
        """Build a graph from an arbitrary edge iterable.

        Edges are canonicalized to ``(min, max)`` and deduplicated, so both
        orientations of the same undirected edge collapse to one entry.
        Self-loops are rejected.
        """
        canonical = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            canonical.add((u, v) if u < v else (v, u))
        return cls(num_vertices, frozenset(canonical), features)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def edge_array(self) -> np.ndarray:
        """Edges as a sorted ``(m, 2)`` int array (deterministic order)."""
        if not self.edges:
            return np.empty((0, 2), dtype=np.int64)
        return np.array(sorted(self.edges), dtype=np.int64)

    def degrees(self) -> np.ndarray:
        """Undirected degree of every vertex as an ``(n,)`` int array."""
        deg = np.zeros(self.num_vertices, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def adjacency(self) -> list[list[int]]:
        """Neighbor lists, sorted ascending per vertex."""
        adj: list[list[int]] = [[] for _ in range(self.num_vertices)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for nbrs in adj:
            nbrs.sort()
        return adj

    def with_features(self, features: np.ndarray) -> Graph:
        return Graph(self.num_vertices, self.edges, features)


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """All-pairs shortest-path hop counts of a connected graph.

    Symmetric with zero diagonal; every off-diagonal entry is at least 1.
    """

    n: int
    d: np.ndarray

    def __post_init__(self) -> None:
        d = np.asarray(self.d, dtype=np.int64)
        if d.shape != (self.n, self.n):
            raise ValueError(f"distance matrix must be ({self.n},{self.n}), got {d.shape}")
        if np.any(np.diag(d) != 0):
            raise ValueError("distance matrix diagonal must be zero")
        if not np.array_equal(d, d.T):
            raise ValueError("distance matrix must be symmetric")
        off = d[~np.eye(self.n, dtype=bool)]
        if off.size and off.min() < 1:
            raise ValueError("off-diagonal distances must be >= 1")
        object.__setattr__(self, "d", d)


@dataclass(frozen=True, eq=False)
class Component:
    """A connected component together with its original vertex indices.

    ``graph`` uses local indices ``0 .. k - 1``; ``original_vertices[i]``
    is the index of local vertex ``i`` in the parent graph.
    """

    graph: Graph
    original_vertices: np.ndarray


def shortest_path_distances(g: Graph) -> DistanceMatrix:
    """All-pairs hop distances by breadth-first search from every source.

    Parameters
    ----------
    g : Graph
        Must be connected.

    Returns
    -------
    DistanceMatrix
        ``d[i, j]`` is the minimum number of edges on any path between
        vertices ``i`` and ``j``.

    Raises
    ------
    DisconnectedGraphError
        If some vertex pair has no connecting path.
    """
    n = g.num_vertices
    adj = g.adjacency()
    d = np.full((n, n), -1, dtype=np.int64)
    for src in range(n):
        dist = d[src]
        dist[src] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            du = dist[u]
            for v in adj[u]:
                if dist[v] < 0:
                    dist[v] = du + 1
                    queue.append(v)
        if dist.min() < 0:
            raise DisconnectedGraphError(
                f"vertex {int(np.argmin(dist >= 0))} unreachable from vertex {src}"
            )
    return DistanceMatrix(n, d)


def connected_components(g: Graph) -> list[Component]:
    """Split a graph into its maximal connected subgraphs.

    Components are returned in ascending order of their smallest original
    vertex; within a component, vertices keep their ascending original
    order. The union of all ``original_vertices`` arrays is a bijection
    onto ``0 .. n - 1``.
    """
    n = g.num_vertices
    adj = g.adjacency()
    label = np.full(n, -1, dtype=np.int64)
    n_comp = 0
    for start in range(n):
        if label[start] >= 0:
            continue
        label[start] = n_comp
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if label[v] < 0:
                    label[v] = n_comp
                    queue.append(v)
        n_comp += 1

    components: list[Component] = []
    for c in range(n_comp):
        members = np.flatnonzero(label == c)
        local = {int(orig): i for i, orig in enumerate(members)}
        edges = [
            (local[u], local[v])
            for u, v in g.edges
            if label[u] == c
        ]
        feats = g.features[members] if g.features is not None else None
        components.append(
            Component(Graph.from_edges(len(members), edges, feats), members)
        )
    return components
