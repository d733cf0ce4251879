import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import coord, random_points
from oracles import fold_by_deck, tiling_lift_count
from steinercover import (
    Cone,
    ConeCovering,
    ConePoint,
    Disphenoid,
    DisphenoidCovering,
    Plane,
    UnsupportedSpaceError,
    covering_for,
    distance,
    lifts,
    project,
    verify_covering,
)
from steinercover.coverings import projected_length

REGULAR = Disphenoid.regular()
SCALENE = Disphenoid((1.0, 1.2, 1.3))
COVERS = [ConeCovering(1), ConeCovering(2), ConeCovering(3), ConeCovering(6),
          DisphenoidCovering(REGULAR), DisphenoidCovering(SCALENE)]


def test_covering_for():
    assert isinstance(covering_for(Cone.from_k(4)), ConeCovering)
    assert isinstance(covering_for(REGULAR), DisphenoidCovering)
    with pytest.raises(UnsupportedSpaceError):
        covering_for(Cone(3.0))
    with pytest.raises(UnsupportedSpaceError):
        covering_for(Plane())


def test_cone_projection_examples():
    c3 = ConeCovering(3)
    p = (math.cos(4 * math.pi / 3), math.sin(4 * math.pi / 3))
    assert project(c3, p) == ConePoint(1.0, 0.0)
    assert project(ConeCovering(2), (0.0, 0.0)) == ConePoint(0.0, 0.0)


def test_cone_lift_examples():
    c2 = ConeCovering(2)
    L = lifts(c2, ConePoint(1.0, math.pi / 2), 5.0)
    assert np.allclose(L, [[0, 1], [0, -1]], atol=1e-15)
    c1 = ConeCovering(1)
    assert np.allclose(lifts(c1, ConePoint(2.0, 1.0), 5.0), [[2 * math.cos(1), 2 * math.sin(1)]])


def test_disphenoid_vertex_image_projects_to_vertex():
    cov = DisphenoidCovering(REGULAR)
    B, C = REGULAR.frame
    for i, j in [(0, 0), (1, 0), (0, 1), (1, 1), (3, -2), (-1, 4)]:
        x = project(cov, i * B + j * C)
        assert cov.is_singular(x)
        assert x == REGULAR.vertex((i % 2) + 2 * (j % 2))


@pytest.mark.parametrize("space", [REGULAR, SCALENE], ids=["regular", "scalene"])
def test_projection_matches_folding_oracle(space, rng):
    cov = DisphenoidCovering(space)
    for _ in range(300):
        p = rng.uniform(-6, 6, 2)
        face, w = fold_by_deck(space.sides, p)
        assert distance(space, cov.project(p), space.point(face, w)) <= 1e-9


@pytest.mark.parametrize("space", [REGULAR, SCALENE], ids=["regular", "scalene"])
def test_lift_count_matches_tiling(space):
    cov = DisphenoidCovering(space)
    for face, bary, radius in [(0, (1 / 3, 1 / 3, 1 / 3), 3.0), (2, (0.2, 0.3, 0.5), 4.0),
                               (3, (0.5, 0.5, 0.0), 2.5), (1, (1.0, 0.0, 0.0), 3.0)]:
        x = space.point(face, bary)
        expected = tiling_lift_count(space.sides, face, space.point(face, bary).bary, radius) \
            if x.face == face else None
        got = cov.lifts(x, radius)
        if expected is not None:
            assert len(got) == expected
        assert len({tuple(np.round(p, 9)) for p in got}) == len(got)


@pytest.mark.parametrize("cover", COVERS, ids=repr)
def test_project_lift_identity(cover, rng):
    pts = random_points(cover.base, rng, 50) + list(cover.singular_values)
    for x in pts:
        L = cover.lifts(x, 8.0)
        assert len(L) >= 1 or isinstance(cover, DisphenoidCovering)
        for p in L:
            assert np.linalg.norm(p) <= 8.0 + 1e-12
            assert distance(cover.base, cover.project(p), x) <= 1e-12


@pytest.mark.parametrize("k", [1, 2, 3, 6])
def test_cone_fiber_cardinality(k, rng):
    cover = ConeCovering(k)
    for x in random_points(cover.base, rng, 20):
        assert len(cover.lifts(x)) == k
    assert len(cover.lifts(ConePoint(0.0, 0.0))) == 1


@pytest.mark.parametrize("cover", COVERS, ids=repr)
def test_deck_elements_are_isometries_commuting_with_projection(cover, rng):
    P = rng.uniform(-5, 5, (100, 2))
    Q = rng.uniform(-5, 5, (100, 2))
    for g in cover.deck_elements(6.0):
        gp, gq = g(P), g(Q)
        assert np.allclose(np.linalg.norm(gp - gq, axis=1), np.linalg.norm(P - Q, axis=1), atol=1e-12)
        for p, q in zip(P[:5], gp[:5]):
            assert distance(cover.base, cover.project(p), cover.project(q)) <= 1e-12


@pytest.mark.parametrize("space", [REGULAR, SCALENE], ids=["regular", "scalene"])
def test_disphenoid_distance_radius_stable(space, rng):
    cov = DisphenoidCovering(space)
    for x, y in zip(random_points(space, rng, 100), random_points(space, rng, 100)):
        assert cov.distance(x, y, radius_scale=2.0) == cov.distance(x, y)


@pytest.mark.parametrize("cover", COVERS, ids=repr)
def test_nonexpansive_on_random_pairs(cover, rng):
    P = rng.uniform(-10, 10, (10_000, 2))
    Q = rng.uniform(-10, 10, (10_000, 2))
    a, b = cover.chart(P), cover.chart(Q)
    base = cover.chart_distance(a, b)
    assert np.all(base <= np.linalg.norm(P - Q, axis=1) + 1e-12)


def test_same_fiber_example():
    c3 = ConeCovering(3)
    p, q = (1.0, 0.0), (math.cos(4 * math.pi / 3), math.sin(4 * math.pi / 3))
    assert cover_distance(c3, p, q) == 0.0
    assert math.dist(p, q) == pytest.approx(math.sqrt(3))


def cover_distance(cover, p, q):
    return distance(cover.base, cover.project(p), cover.project(q))


@given(x1=coord, y1=coord, x2=coord, y2=coord, k=st.sampled_from([1, 2, 3, 5]))
def test_projected_segment_length(x1, y1, x2, y2, k):
    cover = ConeCovering(k)
    a, b = np.array([x1, y1]), np.array([x2, y2])
    if min(np.linalg.norm(a), np.linalg.norm(b)) < 1e-3:
        return  # the injectivity radius vanishes at the apex
    assert projected_length(cover, a, b) == pytest.approx(np.linalg.norm(b - a), abs=1e-11)


def test_verify_covering_identity_equalities():
    rep = verify_covering(ConeCovering(1), samples=200, seed=0)
    assert rep.passed
    assert rep.max_length_error <= 1e-12
    assert abs(rep.max_distance_excess) <= 1e-12


def test_verify_covering_cone_k2_seed7():
    rep = verify_covering(ConeCovering(2), samples=1000, seed=7)
    assert rep.passed and rep.witness is None


def test_verify_covering_flags_a_broken_map():
    class Stretch(ConeCovering):
        def chart_distance(self, a, b):
            return 1.5 * super().chart_distance(a, b)

        def distance(self, x, y):
            return 1.5 * super().distance(x, y)

    rep = verify_covering(Stretch(2), samples=5, seed=0)
    assert not rep.passed
    assert rep.witness is not None and rep.witness["sample"] == 0


@pytest.mark.parametrize("cover", COVERS, ids=repr)
def test_segments_through_singular_points_keep_length(cover):
    if isinstance(cover, ConeCovering):
        segs = [((0.0, -1.0), (0.0, 1.0)), ((-3.0, -4.0), (6.0, 8.0)), ((0.0, 0.0), (2.0, 1.0))]
    else:
        B, C = cover.B, cover.C
        segs = [(-B, 3 * B), (-C + 0.0 * B, 2 * C), (B + C, -B - C), (np.zeros(2), B + C), (B, C)]
    for a, b in segs:
        assert projected_length(cover, a, b) == pytest.approx(math.dist(a, b), abs=1e-12)


@pytest.mark.parametrize("sides", [(1.0, 1.0, 1.0), (1.0, 1.2, 1.3)])
@given(x1=coord, y1=coord, x2=coord, y2=coord)
def test_disphenoid_projected_segment_length(sides, x1, y1, x2, y2):
    cover = covering_for(Disphenoid(sides))
    a, b = np.array([x1, y1]), np.array([x2, y2])
    assert projected_length(cover, a, b) == pytest.approx(np.linalg.norm(b - a), abs=1e-11)
