import math

import numpy as np
import pytest

from liouville.domains import GeodesicPolygon, chord_from_edge_points
from liouville.hplane import PlanePoint
from liouville.identities import _F, _level_breaks, triangle_chord_length
from liouville.integrate import (
    IntegrationError,
    IntegratorConfig,
    in_chart_measure,
    integrate_unbounded,
    mc_integrate,
    of_length,
    pointwise,
    quad_integrate,
    weighted_samples,
)

CFG = IntegratorConfig(samples=40_000, shards=16)


def test_quad_crofton(pentagon):
    est = quad_integrate(pentagon, of_length(np.ones_like))
    assert est.value == pytest.approx(0.5 * pentagon.perimeter(), abs=1e-9)
    assert sum(est.per_pair.values()) == est.value


def test_quad_zero(pentagon):
    assert quad_integrate(pentagon, of_length(np.zeros_like)).value == 0.0
    assert mc_integrate(pentagon, of_length(np.zeros_like), CFG).value == 0.0


def test_mc_crofton_and_unit_tangent(pentagon):
    est = mc_integrate(pentagon, of_length(np.ones_like), CFG)
    assert abs(est.value - 0.5 * pentagon.perimeter()) <= 3 * est.std_error
    est = mc_integrate(pentagon, of_length(lambda r: 2 * r), CFG)
    assert abs(est.value - math.pi * pentagon.area()) <= 3 * est.std_error


def test_mc_is_deterministic_and_stratified(pentagon):
    a = mc_integrate(pentagon, of_length(np.sinh), CFG)
    b = mc_integrate(pentagon, of_length(np.sinh), CFG)
    assert (a.value, a.std_error) == (b.value, b.std_error)
    assert sum(a.per_pair[p] for p in pentagon.pairs()) == a.value
    c = mc_integrate(pentagon, of_length(np.sinh), IntegratorConfig(seed=1, samples=40_000, shards=16))
    assert c.value != a.value


def test_mc_error_halves_when_samples_quadruple(pentagon):
    ratios = []
    for seed in range(10):
        lo = mc_integrate(pentagon, of_length(np.sinh), IntegratorConfig(seed=seed, samples=8_000, shards=16))
        hi = mc_integrate(pentagon, of_length(np.sinh), IntegratorConfig(seed=seed, samples=32_000, shards=16))
        ratios.append(hi.std_error / lo.std_error)
    assert 0.4 <= np.mean(ratios) <= 0.6


def test_rhs_integrand_is_bounded(pentagon):
    seen = []

    def g(b):
        v = 0.5 * b.cos_j * b.cos_k
        seen.append(np.max(np.abs(v)))
        return v

    quad_integrate(pentagon, in_chart_measure(g))
    assert max(seen) <= 0.5


def test_pointwise_matches_vectorized():
    poly = GeodesicPolygon.from_points([PlanePoint(x, y) for x, y in ((-0.4, 0.8), (0.5, 0.9), (0.1, 2.0))])
    cfg = IntegratorConfig(quad_order=8, tolerance=1e-7)
    a = quad_integrate(poly, pointwise(lambda c: c.rho), cfg)
    b = quad_integrate(poly, of_length(lambda r: r), cfg)
    assert a.value == pytest.approx(b.value, abs=1e-12)


def test_weighted_samples(pentagon):
    s = weighted_samples(pentagon, 200, seed=3)
    assert s and all(w.weight > 0 for w in s)
    c = s[0].chord
    again = chord_from_edge_points(pentagon, c.entry.edge, c.entry.l, c.exit.edge, c.exit.l)
    assert again.rho == pytest.approx(c.rho)


def test_nan_integrand_is_reported(pentagon):
    with pytest.raises(IntegrationError):
        quad_integrate(pentagon, of_length(lambda r: np.full_like(r, np.nan)))


def test_quad_rejects_ideal(ideal_triangle):
    with pytest.raises(ValueError):
        quad_integrate(ideal_triangle, of_length(np.ones_like))


def test_unbounded_measure_box():
    est = integrate_unbounded((-1.0, 0.0), (1.0, math.inf), lambda u, v: 1.0 / (u - v) ** 2)
    assert est.value == pytest.approx(math.log(2.0), abs=1e-9)
    assert integrate_unbounded((-1.0, 0.0), (1.0, math.inf), lambda u, v: 0.0 * u).value == 0.0


def test_unbounded_triangle_window():
    def f(u, v):
        r = triangle_chord_length(u, v)
        return ((r >= 1.0) & (r <= 2.0)) / (u - v) ** 2

    est = integrate_unbounded((-math.inf, 0.0), (1.0, math.inf), f, method="iterated",
                              inner_breaks=lambda u: _level_breaks(
                                  lambda v: triangle_chord_length(np.full_like(v, u), v), (1.0, math.inf), (1.0, 2.0)))
    assert est.value == pytest.approx(_F(2.0) - _F(1.0), abs=1e-9)
