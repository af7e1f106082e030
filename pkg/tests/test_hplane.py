import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import dblquad, quad

from liouville.hplane import (
    DiskPoint,
    Frame,
    Isometry,
    PlanePoint,
    PolarCoord,
    RectCoord,
    cartesian_to_polar,
    cartesian_to_rect,
    cayley,
    cayley_inv,
    disk_geometry,
    disk_to_hyperbolic_radius,
    distance,
    hyperbolic_to_disk_radius,
    hyperboloid_distance,
    hyperboloid_to_uhp,
    mdot,
    polar_to_cartesian,
    rect_to_cartesian,
    uhp_to_hyperboloid,
    volume_density,
)

xs = st.floats(-5.0, 5.0)
ys = st.floats(0.05, 10.0)


def test_distance_along_axis():
    assert distance(PlanePoint(0, 1), PlanePoint(0, math.e)) == pytest.approx(1.0, abs=1e-15)
    p = PlanePoint(0.3, 0.7)
    assert distance(p, p) == 0.0


def test_distance_matches_arclength():
    # geodesic from i to 1+2i is the circle centered at c on the real axis
    a, b = PlanePoint(0, 1), PlanePoint(1, 2)
    c = (abs(b.z) ** 2 - abs(a.z) ** 2) / (2 * (b.x - a.x))
    R = abs(a.z - c)
    ta, tb = np.angle(a.z - c), np.angle(b.z - c)
    # ds = |dz| / y with z = c + R e^{it}
    L, _ = quad(lambda t: R / (R * math.sin(t)), tb, ta, epsabs=1e-13, epsrel=1e-12)
    assert distance(a, b) == pytest.approx(abs(L), abs=1e-9)


def test_distance_nearby_points_is_accurate():
    a = PlanePoint(0.2, 1.3)
    b = PlanePoint(0.2 + 1e-9, 1.3)
    assert distance(a, b) == pytest.approx(1e-9 / 1.3, rel=1e-12)


@given(xs, ys, xs, ys, st.integers(0, 2**32 - 1))
def test_distance_is_isometry_invariant(x1, y1, x2, y2, seed):
    g = Isometry.random(np.random.default_rng(seed))
    a, b = PlanePoint(x1, y1), PlanePoint(x2, y2)
    assert abs(distance(g.apply(a), g.apply(b)) - distance(a, b)) <= 1e-10 * max(1.0, distance(a, b))


@given(xs, ys)
def test_hyperboloid_round_trip(x, y):
    X = uhp_to_hyperboloid(x, y)
    assert float(mdot(X, X)) == pytest.approx(-1.0, abs=1e-9 * X[0] ** 2)
    assert np.allclose(hyperboloid_to_uhp(X), (x, y), rtol=1e-10, atol=1e-12)


def test_hyperboloid_distance_agrees():
    a, b = PlanePoint(-0.4, 0.3), PlanePoint(1.1, 2.5)
    assert float(hyperboloid_distance(a.hyperboloid(), b.hyperboloid())) == pytest.approx(distance(a, b), rel=1e-13)


def test_cayley_examples():
    assert cayley(PlanePoint(0, 1)).bigR == pytest.approx(0.0, abs=1e-16)
    assert cayley(PlanePoint(0, 2)).bigR == pytest.approx(1.0 / 3.0, abs=1e-15)


@given(xs, ys)
def test_cayley_round_trip(x, y):
    p = cayley_inv(cayley(PlanePoint(x, y)))
    assert abs(p.z - complex(x, y)) <= 1e-12 * max(1.0, abs(complex(x, y))) ** 2 / min(1.0, y)


def test_radius_conversions():
    assert disk_to_hyperbolic_radius(0.0) == 0.0
    assert hyperbolic_to_disk_radius(math.log(3.0)) == pytest.approx(0.5, abs=1e-15)
    R = np.linspace(0.0, 0.99, 50)
    r = [disk_to_hyperbolic_radius(v) for v in R]
    assert np.all(np.diff(r) > 0)
    assert np.allclose(r, np.log((1 + R) / (1 - R)), rtol=1e-13)


def test_rect_examples():
    assert rect_to_cartesian(RectCoord(0, 0)) == PlanePoint(0.0, 1.0)
    p = rect_to_cartesian(RectCoord(0.7, 0.0))
    assert p.x == pytest.approx(0.0, abs=1e-15) and p.y == pytest.approx(math.exp(0.7), rel=1e-14)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0, 2 * math.pi))
def test_chart_round_trips(p, q, theta):
    frame = Frame(PlanePoint(0.4, 1.7), theta)
    rc = cartesian_to_rect(rect_to_cartesian(RectCoord(p, q), frame), frame)
    assert rc.p == pytest.approx(p, abs=1e-11) and rc.q == pytest.approx(q, abs=1e-11)
    r = abs(p) + 0.1
    pc = cartesian_to_polar(polar_to_cartesian(PolarCoord(r, theta), frame), frame)
    assert pc.r == pytest.approx(r, abs=1e-11)
    assert math.cos(pc.theta - theta) == pytest.approx(1.0, abs=1e-11)


def test_volume_densities():
    assert volume_density("cartesian", 0.0, 2.0) == 0.25
    assert volume_density("polar", 1.3, 0.2) == pytest.approx(math.sinh(1.3))


def test_disk_area_in_two_charts():
    r = 1.0
    polar, _ = quad(lambda t: 2 * math.pi * volume_density("polar", t, 0.0), 0.0, r, epsabs=1e-14)
    assert polar == pytest.approx(2 * math.pi * (math.cosh(r) - 1), abs=1e-12)
    # disk about i of radius r: center i cosh r, Euclidean radius sinh r
    yc, R = math.cosh(r), math.sinh(r)
    cart, _ = dblquad(lambda y, x: 1.0 / y**2, -R, R,
                      lambda x: yc - math.sqrt(R * R - x * x), lambda x: yc + math.sqrt(R * R - x * x),
                      epsabs=1e-13, epsrel=1e-13)
    assert cart == pytest.approx(polar, abs=1e-8)


def test_disk_geometry():
    L, A = disk_geometry(1.0)
    assert L == pytest.approx(7.3841, abs=1e-4)
    assert A == pytest.approx(2 * math.pi * (math.cosh(1.0) - 1.0), rel=1e-14)
    for r in (1e-6, 0.5, 3.0):
        L, A = disk_geometry(r)
        assert L * L == pytest.approx(4 * math.pi * A + A * A, rel=1e-13)
    assert disk_geometry(1e-8)[0] / (2 * math.pi * 1e-8) == pytest.approx(1.0, rel=1e-12)


def test_isometry_group_laws():
    rng = np.random.default_rng(3)
    f, g, h = (Isometry.random(rng) for _ in range(3))
    assert (f @ g) @ h == f @ (g @ h)
    assert g.inverse() @ g == Isometry.identity()
    p = PlanePoint(0.3, 0.9)
    q = (f @ g).apply(p)
    r = f.apply(g.apply(p))
    assert abs(q.z - r.z) <= 1e-12 * max(1.0, abs(q.z))


def test_isometry_normalization_and_rejection():
    assert Isometry(-1, 0, 0, -1) == Isometry.identity()
    assert Isometry(-2, 0, 0, -0.5).a > 0
    with pytest.raises(ValueError):
        Isometry(1, 0, 0, -1)
    with pytest.raises(ValueError):
        PlanePoint(0.0, 0.0)
    with pytest.raises(ValueError):
        DiskPoint(1.0, 0.0)
