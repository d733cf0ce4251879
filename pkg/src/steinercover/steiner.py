"""Steiner minimal trees in the Euclidean plane for small terminal sets.

Every candidate topology is a full Steiner topology: ``n`` terminals of
degree one and ``n - 2`` Steiner vertices of degree three.  Degenerate trees
(Steiner points sliding onto terminals or onto each other) are limits inside
some full topology, so minimizing over full topologies is enough.

For a fixed topology the length is a convex function of the Steiner
positions.  It is minimized by damped Newton steps on the smoothed objective
``sum sqrt(|p_u - p_v|^2 + eps^2)`` while ``eps`` is driven down to
``1e-12 * scale``; each smoothed problem is strictly convex, and the smoothed
minimizer is within ``(2n - 3) * eps`` of the true minimum.  Three terminals
are solved in closed form through the Fermat point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError
from .spaces import PlanePoint
from .spanning import Tree, mst_length

MAX_TERMINALS = 7
MERGE_EPS = 1e-8
MST_SLACK = 1e-6
SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class Topology:
    """Full Steiner topology on terminals ``0..n-1`` and Steiner nodes ``n..2n-3``."""

    n: int
    edges: tuple[tuple[int, int], ...]

    @property
    def steiner_count(self) -> int:
        return self.n - 2

    def degrees(self) -> list[int]:
        deg = [0] * (2 * self.n - 2)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg


@lru_cache(maxsize=None)
def _topologies(n: int) -> tuple[Topology, ...]:
    if n == 3:
        return (Topology(3, ((0, 3), (1, 3), (2, 3))),)
    return tuple(child for topo in _topologies(n - 1) for child in _children(topo))


def enumerate_full_topologies(n: int) -> list[Topology]:
    """All (2n - 5)!! full Steiner topologies on ``n`` labeled terminals, 3 <= n <= 7."""
    if not 3 <= n <= MAX_TERMINALS:
        raise ValueError(f"full topologies are enumerated for 3 <= n <= {MAX_TERMINALS}, got {n}")
    return list(_topologies(n))


def fermat_batch(tri: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fermat points and Steiner lengths of a stack of triangles, shape (m, 3, 2)."""
    tri = np.asarray(tri, dtype=float)
    A, B, C = tri[:, 0], tri[:, 1], tri[:, 2]
    a = np.hypot(*(B - C).T)
    b = np.hypot(*(C - A).T)
    c = np.hypot(*(A - B).T)
    a2, b2, c2 = a * a, b * b, c * c
    # angle >= 120 degrees at a vertex <=> cos <= -1/2
    at_a = b2 + c2 - a2 <= -b * c
    at_b = ~at_a & (a2 + c2 - b2 <= -a * c)
    at_c = ~at_a & ~at_b & (a2 + b2 - c2 <= -a * b)
    inner = ~(at_a | at_b | at_c)

    cross = (B[:, 0] - A[:, 0]) * (C[:, 1] - A[:, 1]) - (B[:, 1] - A[:, 1]) * (C[:, 0] - A[:, 0])
    area = 0.5 * np.abs(cross)
    length = np.sqrt(np.maximum(0.5 * (a2 + b2 + c2) + 2.0 * SQRT3 * area, 0.0))
    length = np.where(at_a, b + c, np.where(at_b, a + c, np.where(at_c, a + b, length)))

    # barycentrics of the first isogonic centre
    k = 4.0 * SQRT3 * area
    wa = a2 * a2 - 2 * (b2 - c2) ** 2 + a2 * (b2 + c2 + k)
    wb = b2 * b2 - 2 * (c2 - a2) ** 2 + b2 * (c2 + a2 + k)
    wc = c2 * c2 - 2 * (a2 - b2) ** 2 + c2 * (a2 + b2 + k)
    wsum = np.where(inner, wa + wb + wc, 1.0)
    point = (wa[:, None] * A + wb[:, None] * B + wc[:, None] * C) / wsum[:, None]
    point = np.where(at_a[:, None], A, np.where(at_b[:, None], B, np.where(at_c[:, None], C, point)))
    return point, length


def fermat_point(a, b, c) -> tuple[np.ndarray, float]:
    point, length = fermat_batch(np.array([[a, b, c]], dtype=float))
    return point[0], float(length[0])


def _harmonic_start(T: np.ndarray, topo: Topology) -> np.ndarray:
    n, s = topo.n, topo.steiner_count
    L = np.zeros((s, s))
    rhs = np.zeros((s, 2))
    for u, v in topo.edges:
        for a, b in ((u, v), (v, u)):
            if a >= n:
                L[a - n, a - n] += 1
                if b >= n:
                    L[a - n, b - n] -= 1
                else:
                    rhs[a - n] += T[b]
    return np.linalg.solve(L, rhs)


class _SmoothedLength:
    """Smoothed tree length with gradient and Hessian in the Steiner positions."""

    def __init__(self, T: np.ndarray, topo: Topology):
        self.T = T
        self.n = topo.n
        self.s = topo.steiner_count
        e = np.array(topo.edges)
        self.eu, self.ev = e[:, 0], e[:, 1]
        # signed incidence between Steiner nodes and edges
        self.inc = np.zeros((self.s, len(e)))
        for k, (u, v) in enumerate(topo.edges):
            if u >= self.n:
                self.inc[u - self.n, k] += 1.0
            if v >= self.n:
                self.inc[v - self.n, k] -= 1.0

    def positions(self, X):
        return np.vstack([self.T, X.reshape(self.s, 2)])

    def value(self, X, eps):
        P = self.positions(X)
        d = P[self.eu] - P[self.ev]
        return float(np.sqrt((d * d).sum(axis=1) + eps * eps).sum())

    def true_length(self, X):
        P = self.positions(X)
        d = P[self.eu] - P[self.ev]
        return float(np.hypot(d[:, 0], d[:, 1]).sum())

    def derivatives(self, X, eps):
        P = self.positions(X)
        d = P[self.eu] - P[self.ev]
        q = np.sqrt((d * d).sum(axis=1) + eps * eps)
        w = 1.0 / q
        grad = self.inc @ (w[:, None] * d)
        He = w[:, None, None] * np.eye(2) - (w ** 3)[:, None, None] * d[:, :, None] * d[:, None, :]
        H = np.einsum("ie,je,ekl->ikjl", self.inc, self.inc, He).reshape(2 * self.s, 2 * self.s)
        return float(q.sum()), grad.reshape(-1), H


def optimize_fixed_topology(terminals, topo: Topology, tol: float = 1e-10,
                            max_iter: int = 100_000) -> tuple[np.ndarray, float]:
    """Minimize the tree length over Steiner positions for a fixed topology.

    Returns ``(steiner_positions, length)`` with positions of shape (n - 2, 2).
    Raises ``ConvergenceError`` (carrying the best iterate) past ``max_iter``
    Newton steps.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    T = np.asarray(terminals, dtype=float).reshape(-1, 2)
    if len(T) != topo.n:
        raise ValueError(f"topology expects {topo.n} terminals, got {len(T)}")
    if topo.n == 3:
        point, length = fermat_batch(T[None, :, :])
        return point.copy(), float(length[0])

    obj = _SmoothedLength(T, topo)
    scale = float(np.max(np.linalg.norm(T[:, None] - T[None, :], axis=-1)))
    X = _harmonic_start(T, topo).reshape(-1)
    steps = 0
    schedule = [scale * 10.0 ** -k for k in (1, 3, 5, 7, 9, 11, 12)]
    for stage, eps in enumerate(schedule):
        final = stage == len(schedule) - 1
        stop = tol * 1e-2 if final else eps * 1e-2
        while True:
            f, g, H = obj.derivatives(X, eps)
            try:
                step = -np.linalg.solve(H, g)
            except np.linalg.LinAlgError:
                step = -g
            dec = -float(g @ step)
            if dec <= 0:
                step, dec = -g, float(g @ g)
            if 0.5 * dec <= stop:
                break
            t = 1.0
            while t > 1e-12:
                f_new = obj.value(X + t * step, eps)
                if f_new <= f - 0.25 * t * dec:
                    break
                t *= 0.5
            else:
                break
            X = X + t * step
            steps += 1
            if steps >= max_iter:
                raise ConvergenceError(
                    f"fixed-topology solver exceeded {max_iter} steps",
                    best=obj.true_length(X), positions=X.reshape(-1, 2),
                )
            if final and f - f_new < tol:
                break
    return X.reshape(-1, 2), obj.true_length(X)


def _plane_tree(T: np.ndarray, S: np.ndarray, edges, scale: float) -> Tree:
    """Tree on terminals + Steiner points, collapsing near-zero edges onto terminals."""
    n = len(T)
    P = np.vstack([T, S]) if len(S) else T
    N = len(P)
    parent = list(range(N))
    has_terminal = [i < n for i in range(N)]

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for u, v in edges:
        if np.linalg.norm(P[u] - P[v]) < MERGE_EPS * scale:
            ru, rv = find(u), find(v)
            if ru == rv or (has_terminal[ru] and has_terminal[rv]):
                continue
            if has_terminal[rv]:
                ru, rv = rv, ru
            parent[rv] = ru
    index = {}
    verts, roles = [], []
    for i in range(n):
        index[find(i)] = i
        verts.append(P[i])
        roles.append("terminal")
    groups: dict[int, list[int]] = {}
    for i in range(n, N):
        r = find(i)
        if r not in index:
            groups.setdefault(r, []).append(i)
    for r, members in groups.items():
        index[r] = len(verts)
        verts.append(P[members].mean(axis=0))
        roles.append("steiner")
    new_edges, lengths = [], []
    for u, v in edges:
        a, b = index[find(u)], index[find(v)]
        if a != b:
            a, b = min(a, b), max(a, b)
            new_edges.append((a, b))
            lengths.append(float(np.hypot(*(verts[a] - verts[b]))))
    return Tree(
        vertices=tuple(PlanePoint(float(x), float(y)) for x, y in verts),
        roles=tuple(roles),
        edges=tuple(new_edges),
        edge_lengths=tuple(lengths),
    )


def _check_terminals(terminals) -> np.ndarray:
    T = np.asarray([tuple(p) for p in terminals], dtype=float).reshape(-1, 2)
    if len(T) < 2:
        raise ValueError(f"need at least 2 terminals, got {len(T)}")
    if len(T) > MAX_TERMINALS:
        raise ValueError(f"at most {MAX_TERMINALS} terminals are supported, got {len(T)}")
    if not np.all(np.isfinite(T)):
        raise ValueError("terminal coordinates must be finite")
    if len({tuple(p) for p in T}) != len(T):
        raise ValueError("terminals must be pairwise distinct")
    return T


def _children(topo: Topology) -> list[Topology]:
    """Topologies on one more terminal, by inserting it into each edge."""
    n = topo.n + 1
    s = 2 * n - 3
    shifted = [tuple(x + 1 if x >= n - 1 else x for x in e) for e in topo.edges]
    return [
        Topology(n, tuple(shifted[:k] + [(u, s), (s, v), (n - 1, s)] + shifted[k + 1:]))
        for k, (u, v) in enumerate(shifted)
    ]


def smt_plane_solution(terminals, tol: float = 1e-10, upper_bound: float | None = None):
    """Best full topology, its Steiner positions and length (n >= 3).

    Depth-first over terminal insertions with pruning: deleting the last
    terminal from a tree leaves a tree for the others, so the optimum of a
    partial topology bounds every extension from below.  With ``upper_bound``
    given, returns None when no tree shorter than it exists.
    """
    T = _check_terminals(terminals)
    n = len(T)
    dist = np.linalg.norm(T[:, None] - T[None, :], axis=-1)
    # the spanning tree is a degenerate full topology, so some topology
    # reaches its length up to solver accuracy; the slack keeps it in play
    mst_bound = mst_length(dist) * (1 + MST_SLACK)
    bound = mst_bound if upper_bound is None else min(mst_bound, upper_bound)
    best = _branch_and_bound(T, tol, bound)
    if best is None and upper_bound is None:
        best = _branch_and_bound(T, tol, math.inf)
    return best


def _branch_and_bound(T, tol, bound):
    n = len(T)
    best_len, best = bound, None
    stack = list(reversed(_topologies(3)))
    while stack:
        topo = stack.pop()
        S, length = optimize_fixed_topology(T[:topo.n], topo, tol)
        if length >= best_len:
            continue
        if topo.n == n:
            best_len, best = length, (topo, S, length)
        else:
            stack.extend(reversed(_children(topo)))
    return best


def smt_plane(terminals, tol: float = 1e-10) -> Tree:
    """Steiner minimal tree of 2..7 distinct plane terminals."""
    T = _check_terminals(terminals)
    if len(T) == 2:
        return Tree(
            vertices=tuple(PlanePoint(float(x), float(y)) for x, y in T),
            roles=("terminal", "terminal"),
            edges=((0, 1),),
            edge_lengths=(float(np.hypot(*(T[0] - T[1]))),),
        )
    topo, S, _ = smt_plane_solution(T, tol)
    scale = float(np.max(np.linalg.norm(T[:, None] - T[None, :], axis=-1)))
    return _plane_tree(T, S, topo.edges, scale)


def smt_plane_length(terminals, tol: float = 1e-10) -> float:
    """Length of the Steiner minimal tree without building the tree."""
    T = _check_terminals(terminals)
    if len(T) == 2:
        return float(np.hypot(*(T[0] - T[1])))
    if len(T) == 3:
        return float(fermat_batch(T[None])[1][0])
    return smt_plane_solution(T, tol)[2]
