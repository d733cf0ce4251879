"""Locally isometric branched coverings of cones and disphenoids by the plane.

Two coverings are provided:

``ConeCovering(k)``
    plane -> cone of angle 2*pi/k, the quotient by rotations through
    multiples of 2*pi/k.  Branched at the origin over the apex.

``DisphenoidCovering(space)``
    plane -> disphenoid surface.  The deck group consists of the maps
    ``z -> +-z + 2*lam`` with ``lam`` in the face lattice ``Z B + Z C``: the
    translations by twice the lattice together with half-turns about every
    lattice point.  Branched at the lattice points, over the four vertices.

Both expose ``project`` (plane point -> base point), ``lifts`` (base point ->
plane points), ``distance`` on the base, and the deck group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import UnsupportedSpaceError
from .spaces import (
    FACE_CLASSES,
    TWO_PI,
    Cone,
    ConePoint,
    Disphenoid,
    FacePoint,
    _canonical_face_point,
    cone_distance_arrays,
)


MAX_WALK_STEPS = 100_000
STEP_FRACTION = 0.9


@dataclass(frozen=True)
class DeckElement:
    """Plane isometry ``z -> sign * rot(z) + translation``.

    ``rot`` turns by ``2*pi*rotation/order``.  Cone deck elements are pure
    rotations; disphenoid ones have ``rotation == 0`` and ``sign = +-1``.
    """

    sign: int = 1
    translation: tuple[float, float] = (0.0, 0.0)
    rotation: int = 0
    order: int = 1

    def __call__(self, pts):
        z = np.asarray(pts, dtype=float)
        if self.rotation % self.order:
            a = TWO_PI * self.rotation / self.order
            c, s = math.cos(a), math.sin(a)
            z = z @ np.array([[c, s], [-s, c]])
        return self.sign * z + np.asarray(self.translation)


def _lattice_points(u: np.ndarray, v: np.ndarray, radius: float, center=(0.0, 0.0)) -> np.ndarray:
    """All integer combinations a*u + b*v within ``radius`` of ``center``."""
    center = np.asarray(center, dtype=float)
    det = abs(u[0] * v[1] - u[1] * v[0])
    basis = np.column_stack([u, v])
    a0, b0 = np.linalg.solve(basis, center)
    da = radius * np.linalg.norm(v) / det + 1
    db = radius * np.linalg.norm(u) / det + 1
    a = np.arange(math.floor(a0 - da), math.ceil(a0 + da) + 1)
    b = np.arange(math.floor(b0 - db), math.ceil(b0 + db) + 1)
    A, Bm = np.meshgrid(a, b, indexing="ij")
    pts = A.reshape(-1, 1) * u + Bm.reshape(-1, 1) * v
    keep = np.linalg.norm(pts - center, axis=1) <= radius
    return pts[keep]


class ConeCovering:
    """The k-sheeted covering of the cone of angle 2*pi/k, branched at the apex."""

    # distance from any point to the apex is its radius
    singular_reach = math.inf

    def __init__(self, k: int):
        self.base = Cone.from_k(k)
        self.k = self.base.sheets
        self.sheet_count = self.k
        self.singular_values = (ConePoint(0.0, 0.0),)

    def __repr__(self):
        return f"ConeCovering(k={self.k})"

    def describe(self) -> dict:
        return {"kind": "cone", "k": self.k}

    def singular_points(self, radius=math.inf, center=(0.0, 0.0)) -> np.ndarray:
        origin = np.zeros((1, 2))
        return origin if np.linalg.norm(np.asarray(center)) <= radius else origin[:0]

    def deck_elements(self, radius=None) -> list[DeckElement]:
        return [DeckElement(rotation=j, order=self.k) for j in range(self.k)]

    def project_arrays(self, xy) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized projection returning cone (r, phi) arrays."""
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        r = np.hypot(xy[:, 0], xy[:, 1])
        phi = np.mod(np.arctan2(xy[:, 1], xy[:, 0]), self.base.total_angle)
        phi = np.where((phi >= self.base.total_angle - 1e-12) | (r == 0), 0.0, phi)
        return r, phi

    def project(self, p) -> ConePoint:
        x, y = (float(c) for c in p)
        r = math.hypot(x, y)
        return self.base.point(r, math.atan2(y, x))

    def representative(self, x: ConePoint) -> np.ndarray:
        """The lift of ``x`` on sheet 0."""
        x = self.base.validate(x)
        return np.array([x.r * math.cos(x.phi), x.r * math.sin(x.phi)])

    def is_singular(self, x) -> bool:
        return self.base.validate(x).r == 0.0

    def lifts(self, x, radius=math.inf, center=(0.0, 0.0)) -> np.ndarray:
        """All pre-images of ``x`` within ``radius`` of ``center``, sheet order."""
        x = self.base.validate(x)
        if x.r == 0.0:
            pts = np.zeros((1, 2))
        else:
            ang = x.phi + TWO_PI * np.arange(self.k) / self.k
            pts = x.r * np.column_stack([np.cos(ang), np.sin(ang)])
        keep = np.linalg.norm(pts - np.asarray(center, dtype=float), axis=1) <= radius
        return pts[keep]

    def injectivity_radius(self, xy) -> float:
        if self.k == 1:
            return math.inf
        return math.hypot(xy[0], xy[1]) * math.sin(math.pi / self.k)

    def chart(self, xy) -> np.ndarray:
        """Base coordinates (r, phi) of projected plane points, shape (m, 2)."""
        return np.column_stack(self.project_arrays(xy))

    def chart_distance(self, a, b) -> np.ndarray:
        return cone_distance_arrays(a[..., 0], a[..., 1], b[..., 0], b[..., 1], self.base.total_angle)

    def distance(self, x, y) -> float:
        x, y = self.base.validate(x), self.base.validate(y)
        if x == y:
            return 0.0
        return float(cone_distance_arrays(x.r, x.phi, y.r, y.phi, self.base.total_angle))

    def distance_matrix(self, pts) -> np.ndarray:
        rp = np.array([self.base.validate(p) for p in pts], dtype=float).reshape(-1, 2)
        d = cone_distance_arrays(rp[:, None, 0], rp[:, None, 1], rp[None, :, 0], rp[None, :, 1],
                                 self.base.total_angle)
        np.fill_diagonal(d, 0.0)
        return d


class DisphenoidCovering:
    """The plane covering a disphenoid surface through the tiling by its face."""

    sheet_count = math.inf

    def __init__(self, space: Disphenoid):
        self.base = space
        self.B, self.C = space.frame
        self.u, self.v = 2 * self.B, 2 * self.C
        self.singular_values = tuple(space.vertex(c) for c in range(4))
        self.shortest_vector = min(space.sides)
        # other lifts of a vertex are at least twice this far from the nearest one
        self.singular_reach = self.shortest_vector
        self._basis = np.column_stack([self.B, self.C])
        self._inverse = tuple(map(tuple, np.linalg.inv(self._basis)))
        # every development point has norm <= rho; the development has diameter 2 * max side
        rho = max(np.linalg.norm(self.u), np.linalg.norm(self.v))
        self._translations = _lattice_points(self.u, self.v, 2 * rho + 2 * max(space.sides) + 1e-9)

    def __repr__(self):
        return f"DisphenoidCovering(sides={self.base.sides})"

    def describe(self) -> dict:
        return {"kind": "disphenoid", "sides": list(self.base.sides)}

    def singular_points(self, radius, center=(0.0, 0.0)) -> np.ndarray:
        return _lattice_points(self.B, self.C, radius, center)

    def deck_elements(self, radius) -> list[DeckElement]:
        """Deck elements whose translation part has norm <= ``radius``."""
        out = []
        for t in _lattice_points(self.u, self.v, radius):
            for sign in (1, -1):
                out.append(DeckElement(sign=sign, translation=(float(t[0]), float(t[1]))))
        return out

    def fold_arrays(self, xy) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized projection: face indices and barycentric weights (face order)."""
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        st = np.linalg.solve(self._basis, xy.T).T
        ij = np.floor(st)
        f = st - ij
        fs, ft = f[:, 0], f[:, 1]
        up = fs + ft <= 1.0
        i, j = ij[:, 0].astype(np.int64), ij[:, 1].astype(np.int64)
        one = np.ones_like(i)
        zero = np.zeros_like(i)
        # lattice vertices of the containing triangle and their weights
        va = np.where(up[:, None], np.column_stack([i, j]), np.column_stack([i + 1, j + 1]))
        vb = np.where(up[:, None], np.column_stack([i + one, j]), np.column_stack([i, j + one]))
        vc = np.where(up[:, None], np.column_stack([i, j + one]), np.column_stack([i + one, j + zero]))
        wa = np.where(up, 1.0 - fs - ft, fs + ft - 1.0)
        wb = np.where(up, fs, 1.0 - fs)
        wc = np.where(up, ft, 1.0 - ft)
        verts = np.stack([va, vb, vc], axis=1)
        classes = (verts[..., 0] % 2) + 2 * (verts[..., 1] % 2)
        weights = np.clip(np.stack([wa, wb, wc], axis=1), 0.0, 1.0)
        face = 3 - (6 - classes.sum(axis=1))
        face_classes = np.array(FACE_CLASSES)[face]
        bary = np.zeros((len(xy), 3))
        for col in range(3):
            match = classes[:, :, None] == face_classes[:, None, :]
            bary += np.where(match[:, col, :], weights[:, col, None], 0.0)
        bary /= bary.sum(axis=1, keepdims=True)
        return face, bary

    def develop_arrays(self, face, bary) -> np.ndarray:
        return np.einsum("nk,nkd->nd", bary, self.base.face_vertices[face])

    def project(self, p) -> FacePoint:
        face, bary = self.fold_arrays(np.asarray(p, dtype=float)[None, :])
        w = np.where(bary[0] <= 1e-12, 0.0, bary[0])
        return _canonical_face_point(int(face[0]), w / w.sum())

    def representative(self, x: FacePoint) -> np.ndarray:
        return self.base.develop(self.base.validate(x))

    def is_singular(self, x) -> bool:
        return max(self.base.validate(x).bary) == 1.0

    def lifts(self, x, radius, center=(0.0, 0.0)) -> np.ndarray:
        """All pre-images of ``x`` within ``radius`` of ``center``."""
        rep = self.representative(x)
        center = np.asarray(center, dtype=float)
        reach = radius + np.linalg.norm(rep) + np.linalg.norm(center)
        t = _lattice_points(self.u, self.v, reach)
        cand = rep + t
        if not self.is_singular(x):
            # singular representatives are half-turn centres: -rep + 2 lam repeats rep + 2 lam'
            cand = np.vstack([cand, -rep + t])
        keep = np.linalg.norm(cand - center, axis=1) <= radius
        return cand[keep]

    def injectivity_radius(self, xy) -> float:
        (p, q), (r, t) = self._inverse
        x, y = float(xy[0]), float(xy[1])
        s0, t0 = math.floor(p * x + q * y), math.floor(r * x + t * y)
        (bx, by), (cx, cy) = self.B, self.C
        best = self.shortest_vector
        # the faces are acute, so the nearest lattice point is a corner of the cell
        for da in (0, 1):
            for db in (0, 1):
                a, b = s0 + da, t0 + db
                best = min(best, math.hypot(x - a * bx - b * cx, y - a * by - b * cy))
        return best

    def chart(self, xy) -> np.ndarray:
        """Development representatives of projected plane points, shape (m, 2)."""
        return self.develop_arrays(*self.fold_arrays(xy))

    def chart_distance(self, a, b) -> np.ndarray:
        return self._rep_distance(a, b)

    def _rep_distance(self, x, y, translations=None) -> np.ndarray:
        """Quotient distance between development representatives (broadcasting)."""
        t = self._translations if translations is None else translations
        x = np.asarray(x, dtype=float)[..., None, :]
        y = np.asarray(y, dtype=float)[..., None, :]
        same = np.linalg.norm(x - y - t, axis=-1).min(axis=-1)
        flip = np.linalg.norm(x + y - t, axis=-1).min(axis=-1)
        return np.minimum(same, flip)

    def distance(self, x, y, radius_scale: float = 1.0) -> float:
        x, y = self.base.validate(x), self.base.validate(y)
        if x == y:
            return 0.0
        xr, yr = self.base.develop(x), self.base.develop(y)
        if radius_scale == 1.0:
            return float(self._rep_distance(xr, yr))
        d0 = np.linalg.norm(xr - yr)
        reach = radius_scale * (np.linalg.norm(xr) + np.linalg.norm(yr) + d0)
        return float(self._rep_distance(xr, yr, _lattice_points(self.u, self.v, reach)))

    def distance_matrix(self, pts) -> np.ndarray:
        reps = np.array([self.representative(p) for p in pts]).reshape(-1, 2)
        d = self._rep_distance(reps[:, None, :], reps[None, :, :])
        np.fill_diagonal(d, 0.0)
        return d


CoveringMap = Union[ConeCovering, DisphenoidCovering]


@lru_cache(maxsize=64)
def covering_for(space) -> ConeCovering | DisphenoidCovering:
    """The plane covering of ``space``; raises for spaces without one."""
    if isinstance(space, Disphenoid):
        return DisphenoidCovering(space)
    if isinstance(space, Cone) and space.sheets is not None:
        return ConeCovering(space.sheets)
    raise UnsupportedSpaceError(
        f"{space!r} is not covered by the plane; only cones of angle 2*pi/k and disphenoids are"
    )


def project(cover, p):
    return cover.project(p)


def lifts(cover, x, radius):
    return cover.lifts(x, radius)


def disphenoid_distance(cover: DisphenoidCovering, x: FacePoint, y: FacePoint) -> float:
    """Intrinsic distance on the disphenoid: the least plane distance between lifts.

    With development representatives ``xr``, ``yr`` and ``d0 = |xr - yr|``,
    any deck image closer than ``d0`` has translation norm at most
    ``|xr| + |yr| + d0``, so enumerating that ball attains the minimum.
    """
    return cover.distance(x, y)


@dataclass
class CoveringReport:
    covering: dict
    samples: int
    seed: int
    max_distance_excess: float = 0.0
    max_length_error: float = 0.0
    max_mst_excess: float = 0.0
    distance_tol: float = 1e-12
    length_tol: float = 1e-12
    mst_tol: float = 1e-9
    witness: dict | None = None

    @property
    def passed(self) -> bool:
        return (self.max_distance_excess <= self.distance_tol
                and self.max_length_error <= self.length_tol
                and self.max_mst_excess <= self.mst_tol)

    def to_dict(self) -> dict:
        return {
            "covering": self.covering,
            "samples": self.samples,
            "seed": self.seed,
            "max_distance_excess": self.max_distance_excess,
            "max_length_error": self.max_length_error,
            "max_mst_excess": self.max_mst_excess,
            "passed": self.passed,
            "witness": self.witness,
        }


def sample_annulus(rng: np.random.Generator, count: int, r_min=0.1, r_max=10.0) -> np.ndarray:
    r = rng.uniform(r_min, r_max, count)
    a = rng.uniform(0.0, TWO_PI, count)
    return np.column_stack([r * np.cos(a), r * np.sin(a)])


def projected_length(cover, a, b) -> float:
    """Length of the projection of the plane segment [a, b], measured in the base.

    The segment is split where it passes through singular points, and each
    piece is walked from its midpoint towards both ends in steps shorter than
    the injectivity radius, where base distance equals plane distance.  The last
    step into a singular end is exact once within ``singular_reach`` of it.
    """
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    total_len = float(np.linalg.norm(b - a))
    if total_len == 0.0:
        return 0.0
    direction = (b - a) / total_len
    hit = 1e-14 * total_len
    breaks = [0.0, total_len]
    for v in cover.singular_points(0.5 * total_len + hit, center=0.5 * (a + b)):
        t = float(np.clip(np.dot(v - a, direction), 0.0, total_len))
        if np.linalg.norm(a + t * direction - v) <= hit:
            breaks.append(t)
    breaks = sorted(set(breaks))

    def singular(t):
        return any(abs(t - tb) <= hit for tb in breaks[1:-1]) or \
            cover.injectivity_radius(a + t * direction) <= hit

    ts = []
    for s0, s1 in zip(breaks[:-1], breaks[1:]):
        mid = 0.5 * (s0 + s1)
        halves = []
        for end in (s0, s1):
            path = [mid]
            t, sign = mid, 1.0 if end > mid else -1.0
            end_singular = singular(end)
            for _ in range(MAX_WALK_STEPS):
                remaining = abs(end - t)
                if remaining == 0.0:
                    break
                if end_singular and remaining <= cover.singular_reach:
                    t = end
                else:
                    h = STEP_FRACTION * cover.injectivity_radius(a + t * direction)
                    t = end if h >= remaining else t + sign * h
                path.append(t)
            else:
                raise RuntimeError("segment walk did not reach its end")
            halves.append(path)
        ts.extend(halves[0][::-1] + halves[1][1:])
    pts = a + np.asarray(ts)[:, None] * direction
    c = cover.chart(pts)
    return float(cover.chart_distance(c[:-1], c[1:]).sum())


def verify_covering(cover, samples: int = 1000, seed: int = 0, points: int = 4) -> CoveringReport:
    """Check the covering's metric properties on random plane point sets.

    Per sample: projection never increases pairwise distances; the projected
    polyline through the points keeps its length; the spanning tree of the
    projected set is no longer than the plane one.
    """
    from .spanning import mst_length

    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    report = CoveringReport(cover.describe(), samples, seed)
    for i in range(samples):
        P = sample_annulus(rng, points)
        base = [cover.project(p) for p in P]
        plane_d = np.linalg.norm(P[:, None] - P[None, :], axis=-1)
        base_d = cover.distance_matrix(base)
        excess = float(np.max(base_d - plane_d))
        plane_len = float(sum(plane_d[j, j + 1] for j in range(points - 1)))
        proj_len = sum(projected_length(cover, P[j], P[j + 1]) for j in range(points - 1))
        len_err = abs(proj_len - plane_len)
        mst_excess = mst_length(base_d) - mst_length(plane_d)
        if report.witness is None and (
            excess > report.distance_tol or len_err > report.length_tol or mst_excess > report.mst_tol
        ):
            report.witness = {"sample": i, "plane_points": P.tolist()}
        report.max_distance_excess = max(report.max_distance_excess, excess)
        report.max_length_error = max(report.max_length_error, len_err)
        report.max_mst_excess = max(report.max_mst_excess, mst_excess)
    return report
