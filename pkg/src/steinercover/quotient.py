"""Steiner minimal trees on plane quotients by lifting terminals.

For a cone of angle 2*pi/k or a disphenoid, a shortest tree in the base
avoids the singular points except at terminals (a junction or bend at a cone
point of angle <= pi can always be shortened), so it lifts to a plane tree of
the same length whose terminals are lifts of the base terminals.  Conversely
any plane tree projects to a base tree of the same length.  Hence

    smt_base(N) = min over sheet assignments of smt_plane(lifted terminals),

with the first terminal pinned to one lift.  A lifted tree of length at most
``L`` keeps every terminal within ``L`` of the pinned one; taking ``L`` as
the base spanning tree length bounds the assignments that need checking.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .coverings import DeckElement, covering_for
from .errors import EnumerationLimitError, UnsupportedSpaceError
from .spaces import Cone, Plane, pairwise_distances
from .spanning import Tree, mst_length
from .steiner import fermat_batch, smt_plane, smt_plane_solution

MAX_QUOTIENT_TERMINALS = 5
MAX_ASSIGNMENTS = 10_000


@dataclass(frozen=True)
class SheetAssignment:
    """Deck element chosen for each terminal; the first is the identity."""

    elements: tuple[DeckElement, ...]


@dataclass(frozen=True)
class LiftedSolution:
    length: float
    lifted: np.ndarray  # (n, 2) plane terminals of the best assignment
    assignment: SheetAssignment
    candidates: int


def _deck_element(cover, rep: np.ndarray, lift: np.ndarray) -> DeckElement:
    if hasattr(cover, "k"):
        if not np.any(rep):
            return DeckElement(rotation=0, order=cover.k)
        turn = math.atan2(lift[1], lift[0]) - math.atan2(rep[1], rep[0])
        j = round(turn / (2 * math.pi / cover.k)) % cover.k
        return DeckElement(rotation=j, order=cover.k)
    basis = np.column_stack([cover.u, cover.v])
    for sign in (1, -1):
        t = lift - sign * rep
        ab = np.linalg.solve(basis, t)
        if np.allclose(ab, np.round(ab), atol=1e-9):
            return DeckElement(sign=sign, translation=(float(t[0]), float(t[1])))
    raise AssertionError("lift is not a deck image of the representative")


def _check(space, terminals):
    if isinstance(space, Cone) and space.sheets is None:
        raise UnsupportedSpaceError(
            f"no plane covering for a cone of angle {space.total_angle}; "
            "use smt_upper_star for an upper bound"
        )
    pts = [space.validate(p) for p in terminals]
    if not 2 <= len(pts) <= MAX_QUOTIENT_TERMINALS:
        raise ValueError(f"smt_quotient supports 2..{MAX_QUOTIENT_TERMINALS} terminals, got {len(pts)}")
    if len(set(pts)) != len(pts):
        raise ValueError("terminals must be pairwise distinct")
    return pts


def lift_candidates(cover, pts, bound: float) -> list[np.ndarray]:
    """Per-terminal lifts within ``bound`` of the pinned lift of the first terminal."""
    rep0 = cover.representative(pts[0])
    out = [rep0[None, :]]
    reach = bound * (1 + 1e-9) + 1e-12
    for p in pts[1:]:
        out.append(cover.lifts(p, reach, center=rep0))
    return out


def _min_over_assignments(cands, tol):
    counts = [len(c) for c in cands]
    total = math.prod(counts)
    if total > MAX_ASSIGNMENTS:
        raise EnumerationLimitError(f"{total} sheet assignments exceed the cap of {MAX_ASSIGNMENTS}")
    if total == 0:
        raise AssertionError("a terminal has no lift within the spanning-tree bound")
    grids = np.meshgrid(*[np.arange(c) for c in counts], indexing="ij")
    idx = np.stack([g.reshape(-1) for g in grids], axis=1)
    configs = np.stack([cands[i][idx[:, i]] for i in range(len(cands))], axis=1)
    n = configs.shape[1]
    if n == 2:
        lengths = np.linalg.norm(configs[:, 1] - configs[:, 0], axis=1)
    elif n == 3:
        lengths = fermat_batch(configs)[1]
    else:
        lengths = _lengths_with_pruning(configs, tol)
    i = int(np.argmin(lengths))
    return float(lengths[i]), configs[i], total


def _lengths_with_pruning(configs: np.ndarray, tol: float) -> np.ndarray:
    """Plane smt lengths, inf for configurations that cannot beat the best.

    Any tree on a configuration is at least as long as the Steiner tree of
    each terminal triple, so candidates are visited in order of that bound.
    """
    n = configs.shape[1]
    bound = np.zeros(len(configs))
    for tri in itertools.combinations(range(n), 3):
        bound = np.maximum(bound, fermat_batch(configs[:, tri])[1])
    lengths = np.full(len(configs), np.inf)
    best = np.inf
    for i in np.argsort(bound, kind="stable"):
        if bound[i] >= best:
            break
        sol = smt_plane_solution(configs[i], tol, upper_bound=None if best == np.inf else best)
        if sol is not None:
            lengths[i] = sol[2]
            best = min(best, sol[2])
    return lengths


def smt_quotient_solution(space, terminals, tol: float = 1e-10) -> LiftedSolution:
    pts = _check(space, terminals)
    cover = covering_for(space)
    bound = mst_length(pairwise_distances(space, pts))
    cands = lift_candidates(cover, pts, bound)
    length, lifted, total = _min_over_assignments(cands, tol)
    elements = tuple(_deck_element(cover, cover.representative(p), q) for p, q in zip(pts, lifted))
    return LiftedSolution(length, lifted, SheetAssignment(elements), total)


def smt_quotient(space, terminals, tol: float = 1e-10) -> Tree:
    """Steiner minimal tree on a cone of angle 2*pi/k or on a disphenoid.

    The tree is the projection of the best lifted plane tree; its edges are
    the projected segments and keep their plane lengths.
    """
    if isinstance(space, Plane):
        return smt_plane(terminals, tol)
    pts = _check(space, terminals)
    sol = smt_quotient_solution(space, pts, tol)
    cover = covering_for(space)
    plane_tree = smt_plane(sol.lifted, tol)
    n = len(pts)
    verts = tuple(pts) + tuple(cover.project(v) for v in plane_tree.vertices[n:])
    return Tree(
        vertices=verts,
        roles=plane_tree.roles,
        edges=plane_tree.edges,
        edge_lengths=plane_tree.edge_lengths,
    )


def smt_upper_star(space: Cone, terminals) -> float:
    """Length of the star joining every terminal to the apex: an upper bound for smt."""
    if not isinstance(space, Cone):
        raise UnsupportedSpaceError("the apex star is defined on cones only")
    return float(sum(space.validate(p).r for p in terminals))


def smt_quotient_length(space, terminals, tol: float = 1e-10) -> float:
    return smt_quotient_solution(space, terminals, tol).length


def assignment_configurations(space, terminals) -> list[np.ndarray]:
    """Every lifted configuration with the first terminal pinned (no pruning)."""
    pts = _check(space, terminals)
    cover = covering_for(space)
    if hasattr(cover, "k"):
        cands = [cover.representative(pts[0])[None, :]] + [cover.lifts(p) for p in pts[1:]]
    else:
        bound = mst_length(pairwise_distances(space, pts))
        cands = lift_candidates(cover, pts, bound)
    return [np.array(c) for c in itertools.product(*cands)]
