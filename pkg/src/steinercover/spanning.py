"""Minimal spanning trees under a space's intrinsic metric."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .spaces import pairwise_distances


@dataclass(frozen=True)
class Tree:
    """A geometric tree: vertices in some space joined by geodesic edges."""

    vertices: tuple
    roles: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]
    edge_lengths: tuple[float, ...]
    total_length: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total_length", float(sum(self.edge_lengths)))

    @property
    def terminals(self) -> list:
        return [v for v, r in zip(self.vertices, self.roles) if r == "terminal"]

    @property
    def steiner_points(self) -> list:
        return [v for v, r in zip(self.vertices, self.roles) if r == "steiner"]

    def is_tree(self) -> bool:
        n = len(self.vertices)
        if len(self.edges) != n - 1:
            return False
        parent = list(range(n))
        for u, v in self.edges:
            ru, rv = _find(parent, u), _find(parent, v)
            if ru == rv:
                return False
            parent[ru] = rv
        return True


def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def kruskal(dist: np.ndarray) -> list[tuple[int, int]]:
    """Edges of a minimum spanning tree of the complete graph with weights ``dist``.

    Ties are broken by the smaller ``(i, j)`` index pair.
    """
    n = len(dist)
    order = sorted((dist[i, j], i, j) for i in range(n) for j in range(i + 1, n))
    parent = list(range(n))
    edges = []
    for _, i, j in order:
        ri, rj = _find(parent, i), _find(parent, j)
        if ri != rj:
            parent[ri] = rj
            edges.append((i, j))
            if len(edges) == n - 1:
                break
    return edges


def mst_length(dist: np.ndarray) -> float:
    """Length of a minimum spanning tree; duplicates (zero distances) are allowed.

    Prim's algorithm on the dense matrix.
    """
    dist = np.asarray(dist, dtype=float)
    n = len(dist)
    if n < 2:
        return 0.0
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = dist[0].copy()
    total = 0.0
    for _ in range(n - 1):
        cand = np.where(in_tree, np.inf, best)
        j = int(np.argmin(cand))
        total += cand[j]
        in_tree[j] = True
        best = np.minimum(best, dist[j])
    return float(total)


def mst(space, points) -> Tree:
    """Minimal spanning tree of ``points`` (at least two, pairwise distinct)."""
    pts = [space.validate(p) for p in points]
    if len(pts) < 2:
        raise ValueError(f"mst needs at least 2 points, got {len(pts)}")
    if len(set(pts)) != len(pts):
        raise ValueError("mst points must be pairwise distinct")
    dist = pairwise_distances(space, pts)
    edges = kruskal(dist)
    return Tree(
        vertices=tuple(pts),
        roles=("terminal",) * len(pts),
        edges=tuple(edges),
        edge_lengths=tuple(float(dist[i, j]) for i, j in edges),
    )


def brute_force_mst_length(dist: np.ndarray) -> float:
    """Minimum over every labeled spanning tree, enumerated by Pruefer sequence.

    n**(n-2) trees; meant as an oracle for n <= 7.
    """
    n = len(dist)
    if n == 2:
        return float(dist[0, 1])
    best = np.inf
    for seq in itertools.product(range(n), repeat=n - 2):
        best = min(best, sum(dist[u, v] for u, v in _pruefer_edges(seq, n)))
    return float(best)


def _pruefer_edges(seq, n):
    degree = [1] * n
    for s in seq:
        degree[s] += 1
    edges = []
    for s in seq:
        leaf = next(i for i in range(n) if degree[i] == 1)
        edges.append((leaf, s))
        degree[leaf] -= 1
        degree[s] -= 1
    u, v = (i for i in range(n) if degree[i] == 1)
    edges.append((u, v))
    return edges
