import json
import math

import numpy as np
import pytest

import steinercover.ratio as ratio
from conftest import SPACES, continuity_trial, random_points
from steinercover import (
    Cone,
    ConeCovering,
    Disphenoid,
    DisphenoidCovering,
    Plane,
    VerificationFailure,
    repro,
    search_inf,
    steiner_ratio,
    verify_theorem,
)
from steinercover.ratio import _disphenoid_objective, _objective, _Parametrization

SQRT3_2 = math.sqrt(3) / 2


def test_plane_equilateral():
    P = Plane()
    rep = steiner_ratio(P, [P.point(0, 0), P.point(1, 0), P.point(0.5, math.sqrt(3) / 2)])
    assert rep.sr == pytest.approx(SQRT3_2, abs=1e-12)
    assert rep.mst == 2.0 and rep.flag == "exact"
    d = rep.to_dict()
    assert d["sr"] == 0.8660254 and d["smt"] == 1.73205081


@pytest.mark.parametrize("space", SPACES, ids=lambda s: str(s.describe()))
def test_two_points_ratio_one(space, rng):
    rep = steiner_ratio(space, random_points(space, rng, 2))
    assert rep.sr == 1.0 and rep.flag == "exact"


def test_wide_cones_are_upper_bounds():
    C = Cone(3 * math.pi)
    rep = steiner_ratio(C, [C.point(1, j * math.pi) for j in range(3)])
    assert rep.flag == "upper_bound" and rep.smt == 3.0 and rep.mst == 4.0 and rep.sr == 0.75
    C = Cone(2.5 * math.pi)
    rep = steiner_ratio(C, [C.point(1, j * C.total_angle / 3) for j in range(3)])
    assert rep.sr == pytest.approx(3 / (2 * math.sqrt(2 + math.sqrt(3))), abs=1e-12)
    assert rep.sr < SQRT3_2


@pytest.mark.parametrize("space", SPACES, ids=lambda s: str(s.describe()))
def test_exact_reports_within_half_and_one(space, rng):
    for n in (3, 4, 5):
        rep = steiner_ratio(space, random_points(space, rng, n))
        assert rep.sr <= 1 + 1e-9
        if rep.flag == "exact":
            assert rep.sr >= 0.5 - 1e-9


def test_out_of_range_ratio_raises(monkeypatch):
    monkeypatch.setattr(ratio, "_smt_value", lambda space, pts, tol: (0.1, "exact"))
    P = Plane()
    with pytest.raises(VerificationFailure):
        steiner_ratio(P, [P.point(0, 0), P.point(1, 0), P.point(0, 1)])


def test_ratio_errors():
    P = Plane()
    with pytest.raises(ValueError):
        steiner_ratio(P, [P.point(0, 0)])
    with pytest.raises(ValueError):
        steiner_ratio(P, [P.point(0, 0), P.point(0, 0)])


def test_search_plane_attains_equilateral():
    rep = search_inf(Plane(), 3, 100, seed=1)
    assert SQRT3_2 - 1e-4 <= rep.sr <= SQRT3_2 + 1e-6
    assert max(ratio.pairwise_distances(Plane(), rep.configuration).ravel()) == pytest.approx(1.0)
    assert rep.search["restarts"] == 100 and rep.search["seed"] == 1


def test_search_is_deterministic_and_monotone():
    C = Cone.from_k(3)
    a = search_inf(C, 3, 6, seed=4)
    b = search_inf(C, 3, 6, seed=4)
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())
    wide = search_inf(C, 3, 12, seed=4)
    assert wide.search["best_objective"] <= a.search["best_objective"]


def test_search_seeded_wide_cone():
    C = Cone(2.5 * math.pi)
    start = [C.point(1, j * C.total_angle / 3) for j in range(3)]
    rep = search_inf(C, 3, 3, seed=0, initial=[start])
    assert rep.flag == "upper_bound"
    assert rep.sr <= 3 / (2 * math.sqrt(2 + math.sqrt(3))) + 1e-12


def test_search_disphenoid_small_budget():
    rep = search_inf(Disphenoid.regular(), 3, 4, seed=2)
    assert SQRT3_2 - 1e-3 <= rep.sr <= 1.0


def test_search_arguments():
    with pytest.raises(ValueError):
        search_inf(Plane(), 3, 0)
    with pytest.raises(ValueError):
        search_inf(Plane(), 2, 5)


@pytest.mark.parametrize("space", [Disphenoid.regular(), Disphenoid((1.0, 1.2, 1.3))],
                         ids=["regular", "scalene"])
def test_fast_disphenoid_objective_matches_reports(space, rng):
    for n in (3, 4):
        par = _Parametrization(space, n)
        fast = _disphenoid_objective(par.cover, n, 1e-10)
        for _ in range(10):
            x = par.random(rng)
            pts = par.points(x)
            assert fast(x) == pytest.approx(steiner_ratio(space, pts).sr, abs=1e-9)


def test_gauge_roundtrip(rng):
    for space in (Plane(), Cone.from_k(3), Cone(2.5 * math.pi)):
        par = _Parametrization(space, 4)
        f = _objective(space, par, 1e-10)
        pts = random_points(space, rng, 4)
        assert f(par.params(pts)) == pytest.approx(steiner_ratio(space, pts).sr, abs=1e-9)


def test_verify_theorem_identity_covering():
    rep = verify_theorem(ConeCovering(1), samples=30, seed=0)
    assert rep.passed and rep.max_gap <= 1e-9


@pytest.mark.parametrize("cover", [ConeCovering(2), ConeCovering(3), DisphenoidCovering(Disphenoid.regular())],
                         ids=repr)
def test_verify_theorem(cover):
    rep = verify_theorem(cover, samples=100 if isinstance(cover, ConeCovering) else 20, seed=3)
    assert rep.passed and rep.worst_margin >= -1e-6
    assert rep.to_dict()["passed"]


def test_verify_theorem_four_terminals():
    assert verify_theorem(ConeCovering(2), samples=10, seed=5, n=4).passed


@pytest.mark.parametrize("space", [Plane(), Cone.from_k(2), Cone.from_k(3)], ids=lambda s: str(s.describe()))
def test_continuity(space, rng):
    for _ in range(40):
        assert continuity_trial(space, rng) >= 0


def test_repro_table():
    out = repro(include_search=False)
    assert out["all_passed"]
    rows = {r["k"]: r for r in out["polygon_rows"]}
    assert rows[3]["mst"] == 4.0 and rows[3]["star_bound"] == 3.0 and rows[3]["sr_bound"] == 0.75
    assert rows[8]["sr_bound"] == pytest.approx(4 / 7, abs=1e-7)
    assert all(r["flag"] == "upper_bound" for r in rows.values())
    assert out["plane_equilateral_sr"] == 0.8660254
