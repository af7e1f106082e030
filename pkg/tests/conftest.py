import math

import numpy as np
import pytest
from hypothesis import settings

from liouville.domains import GeodesicPolygon
from liouville.hplane import Frame, PlanePoint, PolarCoord, polar_to_cartesian

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def random_polygon(rng: np.random.Generator, n: int, r_max: float = 2.0) -> GeodesicPolygon:
    """Convex polygon with vertices on a circle of random radius about a random center."""
    while True:
        t = np.sort(rng.uniform(0.0, 2.0 * math.pi, n))
        gaps = np.diff(np.append(t, t[0] + 2.0 * math.pi))
        if gaps.min() > 0.25:
            break
    r = rng.uniform(0.3, 0.5 * r_max)
    # center within r_max - r of i keeps every vertex within r_max of i
    c = polar_to_cartesian(PolarCoord(rng.uniform(0.0, r_max - r), rng.uniform(0.0, 2.0 * math.pi)))
    frame = Frame(c, rng.uniform(0.0, 2.0 * math.pi))
    return GeodesicPolygon.from_points([polar_to_cartesian(PolarCoord(r, ti), frame) for ti in t])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def pentagon():
    return GeodesicPolygon.from_points([polar_to_cartesian(PolarCoord(0.8, 2.0 * math.pi * i / 5 + 0.1)) for i in range(5)])


@pytest.fixture
def ideal_triangle():
    return GeodesicPolygon.ideal(0, 1, "inf")


@pytest.fixture
def ideal_quad():
    return GeodesicPolygon.ideal(-1, 0, 1, "inf")


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
