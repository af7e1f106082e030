import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from conftest import random_polygon
from liouville.domains import (
    DegenerateChordError,
    GeodesicPolygon,
    PolygonError,
    SmoothDomain,
    chord_from_edge_points,
    chord_of,
    inscribe_regular_polygon,
    refine,
)
from liouville.geodesics import Geodesic, OrientedGeodesic
from liouville.hplane import (
    Frame,
    Isometry,
    PlanePoint,
    distance,
    hyperboloid_distance,
    mcross,
    mdot,
    rotate_tangent,
    to_plane_point,
)


def _square():
    return GeodesicPolygon.from_points([PlanePoint(-0.5, 0.8), PlanePoint(0.5, 0.8), PlanePoint(0.5, 1.6), PlanePoint(-0.5, 1.6)])


def test_ideal_chord_example(ideal_triangle):
    ch = chord_of(ideal_triangle, Geodesic.from_reals(-1.0, 2.0))
    # circle |z - 1/2| = 3/2 meets x = 0 and x = 1 at height sqrt(2)
    p, q = PlanePoint(0.0, math.sqrt(2.0)), PlanePoint(1.0, math.sqrt(2.0))
    assert ch.rho == pytest.approx(distance(p, q), abs=1e-12)
    assert ch.rho == pytest.approx(distance(ch.entry_point, ch.exit_point), abs=1e-12)


def test_chord_misses_and_degenerate(ideal_triangle, pentagon):
    assert chord_of(ideal_triangle, Geodesic.from_reals(0.2, 0.8)) is None
    with pytest.raises(DegenerateChordError):
        chord_of(ideal_triangle, Geodesic.from_reals(0.0, 3.0))
    # the geodesic from the center through vertex 0
    g = Geodesic.from_normal(mcross(pentagon.center, pentagon.vertices[0].point.hyperboloid()))
    with pytest.raises(DegenerateChordError):
        chord_of(pentagon, g)


def test_midpoint_chord():
    sq = _square()
    e0, e2 = sq.edges[0], sq.edges[2]
    ch = chord_from_edge_points(sq, 2, 0.5 * e2.length, 0, 0.5 * e0.length)
    m0 = e0.point_at(0.5 * e0.length)
    m2 = e2.point_at(0.5 * e2.length)
    assert ch.rho == pytest.approx(float(hyperboloid_distance(m0, m2)), abs=1e-12)


def test_adjacent_chord_tends_to_diagonal():
    sq = _square()
    diag = distance(sq.vertices[0].point, sq.vertices[2].point)
    # edge 1 runs from vertex 1 to 2, edge 0 from 0 to 1
    gaps = [abs(chord_from_edge_points(sq, 1, sq.edges[1].length - t, 0, t).rho - diag) for t in (1e-2, 1e-4, 1e-6)]
    assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 1e-5


def test_perimeter_and_area_examples(ideal_triangle, ideal_quad):
    tri = inscribe_regular_polygon(0.9, 3)
    d = tri.edge_lengths()
    assert np.allclose(d, d[0]) and tri.perimeter() == pytest.approx(3 * d[0])
    assert math.isinf(ideal_triangle.perimeter())
    assert ideal_triangle.area() == pytest.approx(math.pi, abs=1e-14)
    assert ideal_quad.area() == pytest.approx(2 * math.pi, abs=1e-14)


def test_inscribed_limits():
    r = 1.0
    p = inscribe_regular_polygon(r, 3 * 2**6)
    assert p.perimeter() == pytest.approx(2 * math.pi * math.sinh(r), rel=1e-3)
    assert p.area() == pytest.approx(2 * math.pi * (math.cosh(r) - 1), rel=1e-3)


def test_refine_disk():
    dom = SmoothDomain.disk(1.0)
    d3 = dom.inscribed(3)
    d6 = refine(d3, dom)
    assert d6.n == 6
    c = PlanePoint(0.0, 1.0)
    assert all(distance(c, v.point) == pytest.approx(1.0, abs=1e-10) for v in d6.vertices)


def _volume_area(poly):
    """Area as the polar-chart integral of sinh r about the polygon center."""
    axis = OrientedGeodesic.from_frame(Frame(to_plane_point(poly.center), 0.0))
    O, E1 = axis.origin_vector, axis.tangent
    E2 = rotate_tangent(O, E1)

    def R(th):
        T = math.cos(th) * E1 + math.sin(th) * E2
        best = math.inf
        for e in poly.edges:
            a, b = float(mdot(O, e.normal)), float(mdot(T, e.normal))
            if b < 0 and -a / b < 1:
                best = min(best, math.atanh(-a / b))
        return best

    breaks = []
    for v in poly.vertices:
        X = v.point.hyperboloid()
        D = X + mdot(O, X) * O
        breaks.append(math.atan2(float(mdot(D, E2)), float(mdot(D, E1))) % (2 * math.pi))
    pts = sorted(breaks) + [sorted(breaks)[0] + 2 * math.pi]
    return sum(quad(lambda t: math.cosh(R(t)) - 1.0, a, b, epsabs=1e-13, epsrel=1e-13)[0] for a, b in zip(pts[:-1], pts[1:]))


def test_gauss_bonnet_matches_volume(rng):
    for n in (3, 4, 6):
        poly = random_polygon(rng, n)
        assert poly.area() == pytest.approx(_volume_area(poly), abs=1e-7)


def test_chord_consistency_random(rng, pentagon):
    done = 0
    while done < 1000:
        u, v = rng.normal(0, 1.5, 2)
        try:
            ch = chord_of(pentagon, Geodesic.from_reals(u, v))
        except DegenerateChordError:
            continue
        if ch is None:
            continue
        again = chord_from_edge_points(pentagon, ch.entry.edge, ch.entry.l, ch.exit.edge, ch.exit.l)
        assert again.rho == pytest.approx(ch.rho, abs=1e-10)
        assert again.entry.alpha == pytest.approx(ch.entry.alpha, abs=1e-10)
        done += 1


@given(st.integers(0, 2**32 - 1))
def test_chord_isometry_equivariance(seed):
    r = np.random.default_rng(seed)
    poly = random_polygon(r, 5)
    g = Isometry.random(r, 0.5)
    c = to_plane_point(poly.center)
    geo = Geodesic.from_reals(c.x - 0.1, c.x + 0.7)
    try:
        a = chord_of(poly, geo)
    except DegenerateChordError:
        return
    if a is None:
        return
    b = chord_of(poly.transformed(g), geo.transformed(g))
    assert b.rho == pytest.approx(a.rho, abs=1e-10)
    assert sorted([b.entry.alpha, b.exit.alpha]) == pytest.approx(sorted([a.entry.alpha, a.exit.alpha]), abs=1e-9)


def test_length_derivative_is_cos_alpha(pentagon):
    j, k = 3, 1
    lj, lk = 0.3 * pentagon.edges[j].length, 0.6 * pentagon.edges[k].length
    ch = chord_from_edge_points(pentagon, j, lj, k, lk)
    h = 1e-6
    rho = lambda a, b: chord_from_edge_points(pentagon, j, a, k, b).rho
    assert (rho(lj + h, lk) - rho(lj - h, lk)) / (2 * h) == pytest.approx(math.cos(ch.entry.alpha), abs=1e-6)
    assert (rho(lj, lk + h) - rho(lj, lk - h)) / (2 * h) == pytest.approx(-math.cos(ch.exit.alpha), abs=1e-6)


def test_polygon_validation():
    pts = [PlanePoint(-0.5, 0.8), PlanePoint(0.5, 0.8), PlanePoint(0.5, 1.6), PlanePoint(-0.5, 1.6)]
    with pytest.raises(PolygonError, match="reverse"):
        GeodesicPolygon.from_points(pts[::-1])
    with pytest.raises(PolygonError):
        GeodesicPolygon.from_points([pts[0], pts[2], pts[1], pts[3]])


def test_json_round_trip(ideal_triangle):
    p = inscribe_regular_polygon(0.7, 5)
    q = GeodesicPolygon.from_json(json.loads(json.dumps(p.to_json())))
    for a, b in zip(p.vertices, q.vertices):
        assert abs(a.point.z - b.point.z) <= 1e-12
    t = GeodesicPolygon.from_json({"vertices": [{"kind": "ideal", "u": 0}, {"kind": "ideal", "u": 1},
                                                {"kind": "ideal", "u": "inf"}]})
    assert t.n == 3 and t.area() == pytest.approx(math.pi)


def test_json_errors_name_vertex():
    bad = {"vertices": [{"kind": "interior", "x": 0, "y": 1}, {"kind": "interior", "x": 1},
                        {"kind": "interior", "x": 0, "y": 2}]}
    with pytest.raises(PolygonError, match="vertex 1"):
        GeodesicPolygon.from_json(bad)
