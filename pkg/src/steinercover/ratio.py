"""Steiner ratios of configurations, infimum search and the verification suite."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .coverings import covering_for, sample_annulus
from .errors import VerificationFailure
from .quotient import _min_over_assignments, smt_quotient_solution, smt_upper_star
from .spaces import TWO_PI, Cone, Disphenoid, Plane, pairwise_distances
from .spanning import mst_length
from .steiner import fermat_batch, smt_plane_solution

SQRT3_2 = math.sqrt(3.0) / 2.0
SR_SLACK = 1e-9
PENALTY = 2.0


def _round(x, digits):
    return float(f"{x:.{digits}g}")


def encode_point(p) -> list | dict:
    if hasattr(p, "face"):
        return {"face": int(p.face), "bary": [float(w) for w in p.bary]}
    return [float(c) for c in p]


@dataclass
class RatioReport:
    space: dict
    configuration: list
    smt: float
    mst: float
    sr: float
    flag: str  # "exact" or "upper_bound"
    search: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "space": self.space,
            "configuration": [encode_point(p) for p in self.configuration],
            "smt": _round(self.smt, 9),
            "mst": _round(self.mst, 9),
            "sr": _round(self.sr, 7),
            "flag": self.flag,
        }
        if self.search is not None:
            out["search"] = self.search
        return out


def _smt_value(space, pts, tol) -> tuple[float, str]:
    """Steiner tree length (or an upper bound) for validated, distinct points."""
    n = len(pts)
    if n == 2:
        # the geodesic is the shortest tree; reuse the metric so that sr is exactly 1
        return float(pairwise_distances(space, pts)[0, 1]), "exact"
    if isinstance(space, Plane):
        T = np.array(pts, dtype=float)
        if n == 3:
            return float(fermat_batch(T[None])[1][0]), "exact"
        return smt_plane_solution(T, tol)[2], "exact"
    if isinstance(space, Cone) and space.sheets is None:
        bound = min(smt_upper_star(space, pts), mst_length(pairwise_distances(space, pts)))
        return bound, "upper_bound"
    return smt_quotient_solution(space, pts, tol).length, "exact"


def steiner_ratio(space, points, tol: float = 1e-10) -> RatioReport:
    """smt / mst for a finite configuration of at least two distinct points.

    On cones without a plane covering the smt value is the smaller of the
    apex star and the spanning tree, and the report is flagged ``upper_bound``.
    """
    pts = [space.validate(p) for p in points]
    if len(pts) < 2:
        raise ValueError("the Steiner ratio needs at least 2 points")
    if len(set(pts)) != len(pts):
        raise ValueError("points must be pairwise distinct")
    mst = mst_length(pairwise_distances(space, pts))
    smt, flag = _smt_value(space, pts, tol)
    sr = smt / mst
    if sr > 1 + SR_SLACK or (flag == "exact" and sr < 0.5 - SR_SLACK):
        raise VerificationFailure(f"Steiner ratio {sr} outside [1/2, 1] for {pts}")
    return RatioReport(space.describe(), pts, smt, mst, sr, flag)


# -- infimum search ---------------------------------------------------------


class _Parametrization:
    """Unconstrained coordinates for n-point configurations, gauge fixed per space."""

    def __init__(self, space, n):
        self.space, self.n = space, n
        if isinstance(space, Plane):
            self.dim = 2 * n - 3
        elif isinstance(space, Cone):
            self.dim = 2 * n - 2
        else:
            self.cover = covering_for(space)
            self.dim = 2 * n
            fv = space.face_vertices.reshape(-1, 2)
            self.box = (fv.min(axis=0), fv.max(axis=0))

    def random(self, rng) -> np.ndarray:
        if isinstance(self.space, Plane):
            return rng.uniform(0.0, 1.0, self.dim)
        if isinstance(self.space, Cone):
            return rng.uniform(-2.0, 2.0, self.dim)
        lo, hi = self.box
        return rng.uniform(np.tile(lo, self.n), np.tile(hi, self.n))

    def points(self, x):
        space = self.space
        if isinstance(space, Plane):
            xy = np.concatenate([[0.0, 0.0, x[0], 0.0], x[1:]]).reshape(-1, 2)
            return [space.point(a, b) for a, b in xy]
        if isinstance(space, Cone):
            xy = x.reshape(-1, 2)
            scale = space.total_angle / TWO_PI
            pts = [space.point(1.0, 0.0)]
            for a, b in xy:
                pts.append(space.point(math.hypot(a, b), (math.atan2(b, a) % TWO_PI) * scale))
            return pts
        return [self.cover.project(p) for p in x.reshape(-1, 2)]

    def params(self, pts) -> np.ndarray:
        """Inverse of ``points`` up to the gauge symmetries of the space."""
        space = self.space
        if isinstance(space, Plane):
            P = np.array(pts, dtype=float)
            P = P - P[0]
            ang = math.atan2(P[1, 1], P[1, 0])
            c, s = math.cos(-ang), math.sin(-ang)
            P = P @ np.array([[c, s], [-s, c]])
            return np.concatenate([[P[1, 0]], P[2:].reshape(-1)])
        if isinstance(space, Cone):
            r0, phi0 = pts[0]
            out = []
            for r, phi in pts[1:]:
                a = ((phi - phi0) % space.total_angle) * TWO_PI / space.total_angle
                out.extend([r / r0 * math.cos(a), r / r0 * math.sin(a)])
            return np.array(out)
        return np.concatenate([space.develop(p) for p in pts])


def _disphenoid_objective(cover, n, tol):
    """Ratio of a configuration given by plane lifts, without building face points.

    Same quantities as the general path: the quotient distance between
    development representatives and the minimum over lifted assignments within
    the spanning-tree bound of the first representative.
    """
    reach_max = float(np.max(np.linalg.norm(cover._translations, axis=1)))
    rho = max(np.linalg.norm(cover.u), np.linalg.norm(cover.v))
    T = cover._translations

    def f(x):
        reps = cover.chart(x.reshape(-1, 2))
        D = cover._rep_distance(reps[:, None, :], reps[None, :, :])
        iu = np.triu_indices(n, 1)
        if not np.all(np.isfinite(reps)) or np.min(D[iu]) < 1e-12:
            return PENALTY
        mst = mst_length(D)
        bound = mst * (1 + 1e-9) + 1e-12
        if 2 * rho + bound > reach_max:
            return PENALTY
        cands = [reps[:1]]
        for j in range(1, n):
            c = np.vstack([reps[j] + T, -reps[j] + T])
            cands.append(c[np.linalg.norm(c - reps[0], axis=1) <= bound])
        return _min_over_assignments(cands, tol)[0] / mst

    return f


def _objective(space, par, tol):
    if isinstance(space, Disphenoid):
        return _disphenoid_objective(par.cover, par.n, tol)

    def f(x):
        try:
            pts = par.points(x)
            if len(set(pts)) != len(pts):
                return PENALTY
            mst = mst_length(pairwise_distances(space, pts))
            if not mst > 1e-12:
                return PENALTY
            return _smt_value(space, pts, tol)[0] / mst
        except (ValueError, ArithmeticError):
            return PENALTY

    return f


def _normalize(space, pts):
    """Translate and scale a plane or cone configuration to unit diameter."""
    if isinstance(space, Disphenoid):
        return pts
    diam = float(np.max(pairwise_distances(space, pts)))
    if isinstance(space, Plane):
        x0, y0 = pts[0]
        return [space.point((x - x0) / diam, (y - y0) / diam) for x, y in pts]
    return [space.point(r / diam, phi) for r, phi in pts]


def search_inf(space, n: int, restarts: int, seed: int = 0, iterations: int = 500,
               initial=None, tol: float = 1e-10) -> RatioReport:
    """Lowest Steiner ratio found over ``n``-point configurations.

    Each restart runs Nelder-Mead from a random configuration drawn from its
    own stream ``SeedSequence(seed, spawn_key=(i,))``; configurations in
    ``initial`` are tried first.  Lowest value wins, earliest start on ties.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if n < 3:
        raise ValueError("search_inf needs n >= 3")
    par = _Parametrization(space, n)
    f = _objective(space, par, tol)
    starts = [par.params([space.validate(p) for p in cfg]) for cfg in (initial or [])]
    for i in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        starts.append(par.random(rng))
    best_val, best_x, best_idx = math.inf, None, -1
    trace = []
    for idx, x0 in enumerate(starts):
        step = 0.1 * (1.0 if not isinstance(space, Disphenoid) else min(space.sides))
        simplex = np.vstack([x0] + [x0 + step * e for e in np.eye(par.dim)])
        res = minimize(f, x0, method="Nelder-Mead",
                       options={"maxiter": iterations, "xatol": 1e-10, "fatol": 1e-10,
                                "initial_simplex": simplex})
        val, x = float(res.fun), res.x
        f0 = f(x0)
        if f0 < val:
            val, x = f0, x0
        if val < best_val:
            best_val, best_x, best_idx = val, x, idx
        if (idx + 1) & idx == 0 or idx == len(starts) - 1:
            trace.append([idx + 1, _round(best_val, 7)])
    pts = _normalize(space, par.points(best_x))
    report = steiner_ratio(space, pts, tol)
    report.search = {
        "n": n,
        "seed": seed,
        "restarts": restarts,
        "initial_starts": len(initial or []),
        "iterations": iterations,
        "best_start": best_idx,
        "best_objective": best_val,
        "trace": trace,
    }
    return report


# -- theorem check ----------------------------------------------------------


@dataclass
class TheoremReport:
    covering: dict
    samples: int
    seed: int
    n: int
    tolerance: float = 1e-6
    worst_margin: float = math.inf
    max_gap: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "covering": self.covering,
            "samples": self.samples,
            "seed": self.seed,
            "n": self.n,
            "worst_margin": self.worst_margin,
            "max_gap": self.max_gap,
            "passed": self.passed,
            "failures": self.failures,
        }


def verify_theorem(cover, samples: int = 100, seed: int = 0, n: int = 3,
                   tol: float = 1e-10) -> TheoremReport:
    """Sample-level check that a base configuration's ratio is not below its best lift's.

    For each random base configuration N the best sheet assignment M has
    smt_plane(M) = smt_base(N) while mst_plane(M) >= mst_base(N), hence
    sr_plane(M) <= sr_base(N).  ``worst_margin`` is the least
    ``sr_base - sr_plane`` seen; ``max_gap`` the largest ``|sr_base - sr_plane|``.
    """
    rng = np.random.default_rng(seed)
    space = cover.base
    report = TheoremReport(cover.describe(), samples, seed, n)
    done = 0
    while done < samples:
        P = sample_annulus(rng, n)
        N = [cover.project(p) for p in P]
        D = pairwise_distances(space, N)
        if np.min(D[np.triu_indices(n, 1)]) < 1e-9:
            continue  # coincident base points: the ratio needs at least two distinct points
        sol = smt_quotient_solution(space, N, tol)
        sr_base = sol.length / mst_length(D)
        M = sol.lifted
        if n == 2:
            smt_plane = float(np.linalg.norm(M[1] - M[0]))
        elif n == 3:
            smt_plane = float(fermat_batch(M[None])[1][0])
        else:
            smt_plane = smt_plane_solution(M, tol)[2]
        sr_plane = smt_plane / mst_length(np.linalg.norm(M[:, None] - M[None], axis=-1))
        margin = sr_base - sr_plane
        report.worst_margin = min(report.worst_margin, margin)
        report.max_gap = max(report.max_gap, abs(margin))
        if margin < -report.tolerance:
            report.failures.append({"sample": done, "plane_points": P.tolist(),
                                    "sr_base": sr_base, "sr_plane": sr_plane})
        done += 1
    return report


# -- reproduction table -----------------------------------------------------


def regular_polygon_on_cone(cone: Cone, k: int, radius: float = 1.0) -> list:
    """k points at the given radius, equally spaced around the apex."""
    return [cone.point(radius, j * cone.total_angle / k) for j in range(k)]


def repro(include_search: bool = True, search_restarts: int = 20, seed: int = 1) -> dict:
    """Numerical reproduction of the polyhedral and cone examples."""
    checks = []

    def check(name, ok, **values):
        checks.append({"check": name, "passed": bool(ok), **values})

    rows = []
    for k in range(3, 9):
        cone = Cone(math.pi * k)
        pts = regular_polygon_on_cone(cone, k)
        mst = mst_length(pairwise_distances(cone, pts))
        star = smt_upper_star(cone, pts)
        rep = steiner_ratio(cone, pts)
        formula = k / (2 * (k - 1))
        rows.append({"k": k, "total_angle": _round(cone.total_angle, 9), "mst": _round(mst, 9),
                     "star_bound": _round(star, 9), "sr_bound": _round(rep.sr, 7),
                     "formula": _round(formula, 7), "flag": rep.flag})
        check(f"polygon k={k}: mst = 2(k-1)", abs(mst - 2 * (k - 1)) <= 1e-9)
        check(f"polygon k={k}: star = k", star == k)
        check(f"polygon k={k}: sr <= k/(2(k-1))", abs(rep.sr - formula) <= 1e-9)
    check("sr bound decreases toward 1/2",
          all(a["sr_bound"] > b["sr_bound"] > 0.5 for a, b in zip(rows, rows[1:])))

    wide = []
    for label, theta in (("5pi/2", 2.5 * math.pi), ("3pi", 3 * math.pi)):
        cone = Cone(theta)
        pts = regular_polygon_on_cone(cone, 3)
        mst = mst_length(pairwise_distances(cone, pts))
        rep = steiner_ratio(cone, pts)
        wide.append({"total_angle": label, "star_bound": _round(smt_upper_star(cone, pts), 9),
                     "mst": _round(mst, 9), "sr_bound": _round(rep.sr, 7)})
        check(f"cone {label}: mst > 2 sqrt(3) r", mst > 2 * math.sqrt(3))
        check(f"cone {label}: sr < sqrt(3)/2", rep.sr < SQRT3_2)

    plane = Plane()
    tri = [plane.point(0, 0), plane.point(1, 0), plane.point(0.5, math.sqrt(3) / 2)]
    eq = steiner_ratio(plane, tri)
    check("plane equilateral: sr = sqrt(3)/2", abs(eq.sr - SQRT3_2) <= 1e-9, sr=_round(eq.sr, 7))

    floors = []
    if include_search:
        for space in (Cone.from_k(3), Disphenoid.regular()):
            rep = search_inf(space, 3, search_restarts, seed)
            floors.append({"space": space.describe(), "best_sr": _round(rep.sr, 7),
                           "restarts": search_restarts, "seed": seed})
            check(f"search floor {space.describe()}", rep.sr >= SQRT3_2 - 1e-3)

    return {
        "polygon_rows": rows,
        "wide_cones": wide,
        "plane_equilateral_sr": _round(eq.sr, 7),
        "search_floors": floors,
        "checks": checks,
        "all_passed": all(c["passed"] for c in checks),
    }


__all__ = [
    "RatioReport",
    "TheoremReport",
    "steiner_ratio",
    "search_inf",
    "verify_theorem",
    "repro",
    "regular_polygon_on_cone",
]
