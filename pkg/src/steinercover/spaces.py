"""Flat model spaces: the Euclidean plane, flat cones and disphenoid surfaces.

Points are small named tuples in the chart of their space:

* plane: ``PlanePoint(x, y)``
* cone: ``ConePoint(r, phi)`` with ``0 <= phi < total_angle``
* disphenoid: ``FacePoint(face, bary)`` with barycentric weights on one of
  the four congruent faces

Always build points through ``space.point(...)`` so that they are validated
and put into canonical form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Union

import numpy as np

from .errors import InvalidPointError

TWO_PI = 2.0 * math.pi
SNAP_EPS = 1e-12

# Vertex classes of a disphenoid face, in the order barycentric weights refer
# to. Class c is the coset of the small face lattice modulo twice the lattice:
# 0 -> [0], 1 -> [B], 2 -> [C], 3 -> [B + C]. Face i omits class 3 - i.
FACE_CLASSES = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))


class PlanePoint(NamedTuple):
    x: float
    y: float


class ConePoint(NamedTuple):
    r: float
    phi: float


class FacePoint(NamedTuple):
    face: int
    bary: tuple[float, float, float]


SurfacePoint = Union[PlanePoint, ConePoint, FacePoint]


@dataclass(frozen=True)
class Plane:
    kind = "plane"

    def point(self, x, y) -> PlanePoint:
        x, y = float(x), float(y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise InvalidPointError(f"non-finite plane coordinates ({x}, {y})")
        return PlanePoint(x, y)

    def validate(self, p) -> PlanePoint:
        if not isinstance(p, PlanePoint):
            raise InvalidPointError(f"expected a PlanePoint, got {p!r}")
        return self.point(*p)

    def describe(self) -> dict:
        return {"kind": "plane"}


@dataclass(frozen=True)
class Cone:
    """Flat cone with the given total angle at its apex."""

    total_angle: float

    kind = "cone"

    def __post_init__(self):
        theta = float(self.total_angle)
        if not (math.isfinite(theta) and theta > 0):
            raise ValueError(f"cone total angle must be finite and positive, got {theta}")
        object.__setattr__(self, "total_angle", theta)

    @classmethod
    def from_k(cls, k: int) -> "Cone":
        """The cone of angle 2*pi/k, the quotient of the plane by Z_k."""
        if int(k) != k or k < 1:
            raise ValueError(f"k must be a positive integer, got {k}")
        return cls(TWO_PI / int(k))

    @cached_property
    def sheets(self) -> int | None:
        """k when the total angle is 2*pi/k, otherwise None."""
        k = round(TWO_PI / self.total_angle)
        if k >= 1 and abs(self.total_angle * k - TWO_PI) <= SNAP_EPS * TWO_PI:
            return int(k)
        return None

    def point(self, r, phi=0.0) -> ConePoint:
        r, phi = float(r), float(phi)
        if not (math.isfinite(r) and math.isfinite(phi)):
            raise InvalidPointError(f"non-finite cone coordinates ({r}, {phi})")
        if r < 0:
            raise InvalidPointError(f"cone radius must be >= 0, got {r}")
        if r == 0.0:
            return ConePoint(0.0, 0.0)
        theta = self.total_angle
        phi = math.fmod(phi, theta)
        if phi < 0:
            phi += theta
        if phi >= theta - SNAP_EPS:
            phi = 0.0
        return ConePoint(r, phi)

    def validate(self, p) -> ConePoint:
        if not isinstance(p, ConePoint):
            raise InvalidPointError(f"expected a ConePoint, got {p!r}")
        return self.point(*p)

    def describe(self) -> dict:
        if self.sheets is not None:
            return {"kind": "cone", "total_angle": f"2pi/{self.sheets}"}
        return {"kind": "cone", "total_angle": self.total_angle}


@dataclass(frozen=True)
class Disphenoid:
    """Surface of an isosceles tetrahedron with acute face sides (a, b, c).

    The surface develops onto the triangle with vertices 0, 2B, 2C, where
    A = 0, B, C is one face placed in the plane (|BC| = a, |CA| = b,
    |AB| = c). The development splits into four faces along its midlines.
    """

    sides: tuple[float, float, float]

    kind = "disphenoid"

    def __post_init__(self):
        a, b, c = (float(s) for s in self.sides)
        if not all(math.isfinite(s) and s > 0 for s in (a, b, c)):
            raise ValueError(f"side lengths must be positive, got {self.sides}")
        if not (a + b > c and b + c > a and c + a > b):
            raise ValueError(f"sides {self.sides} violate the triangle inequality")
        if not (a * a + b * b > c * c and b * b + c * c > a * a and c * c + a * a > b * b):
            raise ValueError(f"face triangle {self.sides} is not acute; no disphenoid exists")
        object.__setattr__(self, "sides", (a, b, c))

    @classmethod
    def regular(cls, side: float = 1.0) -> "Disphenoid":
        return cls((side, side, side))

    @cached_property
    def frame(self) -> tuple[np.ndarray, np.ndarray]:
        """Plane positions of the face vertices B and C (A is the origin)."""
        a, b, c = self.sides
        cx = (b * b + c * c - a * a) / (2.0 * c)
        cy = math.sqrt(max(b * b - cx * cx, 0.0))
        return np.array([c, 0.0]), np.array([cx, cy])

    @cached_property
    def face_vertices(self) -> np.ndarray:
        """Array (4, 3, 2): developed positions of each face's vertices."""
        B, C = self.frame
        O = np.zeros(2)
        return np.array([
            [O, B, C],
            [2 * B, B, B + C],
            [2 * C, C, B + C],
            [B, C, B + C],
        ])

    def point(self, face, bary) -> FacePoint:
        face = int(face)
        if face not in (0, 1, 2, 3):
            raise InvalidPointError(f"face index must be 0..3, got {face}")
        w = np.asarray(bary, dtype=float)
        if w.shape != (3,) or not np.all(np.isfinite(w)):
            raise InvalidPointError(f"barycentric coordinates must be 3 finite numbers, got {bary}")
        if np.any(w < -1e-9) or abs(w.sum() - 1.0) > 1e-9:
            raise InvalidPointError(f"barycentric coordinates {tuple(w)} must be >= 0 and sum to 1")
        w = np.where(w <= SNAP_EPS, 0.0, w)
        if abs(w.sum() - 1.0) > 4e-16:
            # renormalize only when needed so that re-validating is a no-op
            w = w / w.sum()
        return _canonical_face_point(face, w)

    def validate(self, p) -> FacePoint:
        if not isinstance(p, FacePoint):
            raise InvalidPointError(f"expected a FacePoint, got {p!r}")
        return self.point(p.face, p.bary)

    def develop(self, p: FacePoint) -> np.ndarray:
        """Position of ``p`` in the development triangle."""
        return np.asarray(p.bary) @ self.face_vertices[p.face]

    def vertex(self, cls: int) -> FacePoint:
        """The tetrahedron vertex of the given class (0..3)."""
        face = next(i for i, fc in enumerate(FACE_CLASSES) if cls in fc)
        w = [1.0 if c == cls else 0.0 for c in FACE_CLASSES[face]]
        return FacePoint(face, tuple(w))

    def describe(self) -> dict:
        return {"kind": "disphenoid", "sides": list(self.sides)}


Space = Union[Plane, Cone, Disphenoid]


def _canonical_face_point(face: int, w: np.ndarray) -> FacePoint:
    support = {c for c, wi in zip(FACE_CLASSES[face], w) if wi > 0}
    weights = dict(zip(FACE_CLASSES[face], w))
    for f, classes in enumerate(FACE_CLASSES):
        if support <= set(classes):
            return FacePoint(f, tuple(float(weights.get(c, 0.0)) for c in classes))
    raise AssertionError("unreachable: every face support lies on some face")


def cone_distance_arrays(r1, phi1, r2, phi2, theta):
    """Vectorized intrinsic distance on the cone of total angle ``theta``."""
    r1, r2 = np.asarray(r1, float), np.asarray(r2, float)
    dphi = np.abs(np.asarray(phi1, float) - np.asarray(phi2, float))
    dphi = np.minimum(dphi, theta - dphi)
    # (r1 - r2)^2 + 4 r1 r2 sin^2(dphi / 2) is the law of cosines without cancellation.
    s = np.sin(0.5 * np.minimum(dphi, math.pi))
    chord = np.sqrt((r1 - r2) ** 2 + 4.0 * r1 * r2 * s * s)
    return np.where(dphi < math.pi, chord, r1 + r2)


def distance(space: Space, p, q) -> float:
    """Intrinsic geodesic distance between two points of ``space``."""
    p, q = space.validate(p), space.validate(q)
    if isinstance(space, Plane):
        return math.hypot(p.x - q.x, p.y - q.y)
    if isinstance(space, Cone):
        if p == q:
            return 0.0
        return float(cone_distance_arrays(p.r, p.phi, q.r, q.phi, space.total_angle))
    from .coverings import disphenoid_distance, covering_for

    return disphenoid_distance(covering_for(space), p, q)


def pairwise_distances(space: Space, points) -> np.ndarray:
    """Symmetric matrix of intrinsic distances between ``points``."""
    pts = [space.validate(p) for p in points]
    n = len(pts)
    if isinstance(space, Plane):
        xy = np.array(pts, dtype=float).reshape(n, 2)
        diff = xy[:, None, :] - xy[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])
    if isinstance(space, Cone):
        rp = np.array(pts, dtype=float).reshape(n, 2)
        d = cone_distance_arrays(rp[:, None, 0], rp[:, None, 1], rp[None, :, 0], rp[None, :, 1],
                                 space.total_angle)
        np.fill_diagonal(d, 0.0)
        return d
    from .coverings import covering_for

    return covering_for(space).distance_matrix(pts)
