import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from steinercover import Cone, Disphenoid, Plane

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

coord = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
radius = st.floats(0.05, 10, allow_nan=False, allow_infinity=False)
angle = st.floats(0, 4 * math.pi, allow_nan=False, allow_infinity=False)


def random_points(space, rng, n):
    if isinstance(space, Plane):
        return [space.point(*rng.uniform(-5, 5, 2)) for _ in range(n)]
    if isinstance(space, Cone):
        return [space.point(rng.uniform(0.1, 5), rng.uniform(0, space.total_angle)) for _ in range(n)]
    return [space.point(rng.integers(4), rng.dirichlet([1, 1, 1])) for _ in range(n)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


SPACES = [Plane(), Cone.from_k(1), Cone.from_k(2), Cone.from_k(3), Cone(math.pi), Cone(3 * math.pi),
          Cone(2.5 * math.pi), Disphenoid.regular(), Disphenoid((1.0, 1.2, 1.3))]


def continuity_trial(space, rng, n=3, scale=0.05):
    """One perturbation trial of the ratio continuity bound; returns the slack (>= 0 passes)."""
    from steinercover import distance, steiner_ratio

    while True:
        pts = random_points(space, rng, n)
        if isinstance(space, Plane):
            moved = [space.point(x + dx, y + dy) for (x, y), (dx, dy) in zip(pts, rng.normal(0, scale, (n, 2)))]
        else:
            moved = [space.point(abs(r + rng.normal(0, scale)), phi + rng.normal(0, scale)) for r, phi in pts]
        if len(set(moved)) == n and len(set(pts)) == n:
            break
    a, b = steiner_ratio(space, pts), steiner_ratio(space, moved)
    shift = sum(distance(space, p, q) for p, q in zip(pts, moved))
    bound = shift * (1 / b.mst + a.smt / (a.mst * b.mst)) + 1e-6
    return bound - abs(a.sr - b.sr)


ACCEPTANCE: dict[int, tuple[str, bool, float, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        name, ok, secs, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {name}  "
                                    f"({secs:.2f} s)  {detail}")
