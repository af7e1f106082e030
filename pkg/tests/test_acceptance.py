"""Acceptance suite: one test per criterion, each recording a pass/fail line
that is repeated in the terminal summary."""
import math

import numpy as np
import pytest

from conftest import random_polygon, record_criterion
from liouville.cli import main
from liouville.domains import GeodesicPolygon, SmoothDomain
from liouville.geodesics import (
    IncidenceSample, NonTransversalError, OrientedGeodesic, PolarSample, chart_measures, incidence_endpoint_jacobian,
    polar_incidence_jacobian,
)
from liouville.hplane import Frame, PlanePoint
from liouville.identities import (
    TEST_FUNCTIONS, ap_identity, crofton, disk_defect, ideal_triangle_cdf, ideal_triangle_mc, ideal_triangle_quad,
    isoperimetric, isoperimetric_defect, pleijel_refinement, quad_distribution, quad_opposite_cdf,
    santalo_area_squared, test_function, triangle_density, unit_tangent_check,
)
from liouville.integrate import IntegratorConfig
from liouville.ktrig import (
    EuclideanPolygon, continuity_gap, general_ap_identity, general_isoperimetric, k_disk, sin_k, sin_k_series,
)

pytestmark = pytest.mark.acceptance

# closed forms evaluated once from 3 [log sinh rho - rho coth rho]
PAIR_1_2 = 0.365333855
TRIANGLE_1_2 = 1.096001565


@pytest.fixture(scope="module")
def suite():
    rng = np.random.default_rng(1)
    return [random_polygon(rng, int(rng.integers(3, 7))) for _ in range(20)]


def test_criterion_01_crofton(suite):
    quad_worst, mc_worst = 0.0, 0.0
    for i, poly in enumerate(suite):
        rep = crofton(poly)
        quad_worst = max(quad_worst, rep.residual / rep.rhs.value)
        mc = crofton(poly, IntegratorConfig(samples=1_000_000, seed=100 + i), method="mc")
        mc_worst = max(mc_worst, mc.residual / mc.std_error)
    ok = quad_worst <= 1e-6 and mc_worst <= 3.0
    record_criterion(1, ok, f"quad rel residual max {quad_worst:.2e} (<= 1e-6); MC max |z| {mc_worst:.2f} (<= 3)")
    assert ok


def test_criterion_02_ap_identity(suite):
    worst = 0.0
    for poly in suite:
        for label in ("one", "x", "sinh", "one_minus_exp"):
            worst = max(worst, ap_identity(poly, test_function(label)).residual)
    ok = worst <= 1e-5
    record_criterion(2, ok, f"max residual over 20 polygons x 4 functions {worst:.2e} (<= 1e-5)")
    assert ok


@pytest.mark.slow
def test_criterion_03_pleijel_refinement():
    steps = pleijel_refinement(SmoothDomain.disk(1.0), test_function("one"), 6)
    limit = math.pi * math.sinh(1.0)
    err = abs(steps[-1].boundary_term - limit)
    lhs = np.array([s.report.lhs.value for s in steps])
    rhs = np.array([s.report.rhs.value for s in steps])
    ratios = [np.abs(np.diff(v))[1:] / np.abs(np.diff(v))[:-1] for v in (lhs, rhs)]
    geometric = all(np.all((r > 0.0) & (r < 0.5)) for r in ratios)
    identity = all(s.report.passed for s in steps)
    ok = err <= 1e-3 and geometric and identity
    record_criterion(3, ok, f"boundary error at k=6 {err:.2e} (<= 1e-3); step ratios lhs "
                            f"{np.round(ratios[0], 3).tolist()}; identity holds at every k: {identity}")
    assert ok


def test_criterion_04_isoperimetric():
    rng = np.random.default_rng(4)
    defects = []
    for _ in range(100):
        poly = random_polygon(rng, int(rng.integers(3, 10)))
        defects.append(isoperimetric_defect(poly.perimeter(), poly.area()))
    disk = max(abs(disk_defect(r)) for r in (0.5, 1.0, 2.0))
    _, rep = isoperimetric(SmoothDomain.disk(1.0), n_approx=96)
    ok = min(defects) >= 0.0 and disk <= 1e-12 and rep.residual <= 1e-3
    record_criterion(4, ok, f"min polygon defect {min(defects):.3e} (>= 0); disk {disk:.1e} (<= 1e-12); "
                            f"96-gon two-sided residual {rep.residual:.2e} (<= 1e-3)")
    assert ok


def test_criterion_05_santalo_and_unit_tangent(suite):
    tri = GeodesicPolygon.ideal(0, 1, "inf")
    closed = max(santalo_area_squared(tri).residual, unit_tangent_check(tri).residual)
    z = 0.0
    for i, poly in enumerate(suite[:5]):
        cfg = IntegratorConfig(samples=1_000_000, seed=500 + i)
        for rep in (santalo_area_squared(poly, cfg, "mc"), unit_tangent_check(poly, cfg, "mc")):
            z = max(z, rep.residual / rep.std_error)
    ok = closed <= 1e-8 and z <= 3.0
    record_criterion(5, ok, f"ideal triangle vs pi^2 {closed:.1e} (<= 1e-8); compact MC max |z| {z:.2f} (<= 3)")
    assert ok


def test_criterion_06_ideal_triangle():
    pair = ideal_triangle_quad(1.0, 2.0).value / 3.0
    err = abs(pair - PAIR_1_2)
    b = np.linspace(0.2, 6.0, 20)
    h = 1e-5
    fd = np.array([(ideal_triangle_cdf(0.1, x + h) - ideal_triangle_cdf(0.1, x - h)) / (2 * h) for x in b])
    deriv = float(np.max(np.abs(fd - triangle_density(b))))
    ok = err <= 1e-4 and abs(3 * pair - TRIANGLE_1_2) <= 3e-4 and deriv <= 1e-7
    record_criterion(6, ok, f"per-pair mass {pair:.9f} vs closed form {PAIR_1_2} ({err:.1e} <= 1e-4; "
                            f"the rounded 0.3655 is {abs(pair - 0.3655):.1e} away); derivative check {deriv:.1e}")
    assert ok


@pytest.mark.slow
def test_criterion_07_ideal_quadrilateral():
    quad = GeodesicPolygon.ideal(-1, 0, 1, "inf")
    total = abs(quad_opposite_cdf(quad, "13", math.inf).direct - math.log(2.0))
    gaps = []
    for rho0 in (1.0, 2.0, 3.0):
        m = quad_opposite_cdf(quad, "13", rho0)
        gaps.append(abs(m.paper - m.direct))
    qd = quad_distribution(quad, 1.0, 2.0)
    match = qd.coefficient_match()
    ok = total <= 1e-6 and max(gaps) <= 1e-6 and match is not None
    record_criterion(7, ok, f"M13 total - log 2 {total:.1e}; level-set vs direct at rho0=1,2,3 "
                            f"{[f'{g:.1e}' for g in gaps]}; adjacent coefficient measured "
                            f"{qd.measured_coefficient:.9f} vs stated {qd.paper_coefficient:g} -> matches {match}")
    assert ok


def test_criterion_08_chart_consistency():
    configs = [
        (PlanePoint(-0.3, 1.0), PlanePoint(0.2, 1.3), PlanePoint(-0.1, 2.0), PlanePoint(0.4, 2.4),
         Frame(PlanePoint(0.1, 1.5), 0.3)),
        (PlanePoint(-1.0, 0.5), PlanePoint(-0.6, 1.5), PlanePoint(0.8, 0.7), PlanePoint(1.2, 1.4),
         Frame(PlanePoint(0.0, 1.0), 0.0)),
        (PlanePoint(0.0, 0.3), PlanePoint(0.5, 0.4), PlanePoint(0.1, 3.0), PlanePoint(-0.7, 2.5),
         Frame(PlanePoint(0.2, 1.0), 1.1)),
    ]
    spread = max(chart_measures(*c[:4], frame=c[4]).spread() for c in configs)
    rng = np.random.default_rng(8)
    polar, inc = [], []
    host = OrientedGeodesic.from_frame(Frame(PlanePoint(0.3, 1.2), 0.4))
    while len(polar) < 100:
        try:
            polar.append(abs(polar_incidence_jacobian(PolarSample(rng.uniform(0.01, 1.5), rng.uniform(0, 2 * math.pi)))))
        except NonTransversalError:
            pass
    for _ in range(100):
        inc.append(abs(incidence_endpoint_jacobian(IncidenceSample(rng.uniform(-1, 1), rng.uniform(0.1, 3.0), host))))
    jac = max(max(polar), max(inc))
    ok = spread <= 1e-8 and jac <= 1e-6
    record_criterion(8, ok, f"chart spread over 3 segment pairs {spread:.1e} (<= 1e-8); Jacobian residual {jac:.1e} (<= 1e-6)")
    assert ok


def test_criterion_09_curvature_generalization(pentagon):
    twice = 0.0
    for label in ("x", "sinh", "one_minus_exp"):
        core = ap_identity(pentagon, test_function(label))
        gen = general_ap_identity(-1.0, pentagon, test_function(label))
        twice = max(twice, abs(gen.lhs.value - 2 * core.lhs.value), abs(gen.rhs.value - 2 * core.rhs.value))
    square = EuclideanPolygon([(0, 0), (1, 0), (1, 1), (0, 1)])
    flat = max(general_ap_identity(0.0, square, tf).residual for tf in TEST_FUNCTIONS.values())
    series = 0.0
    for K in (-2.0, -1.0, -0.25, 0.25, 1.0, 2.0):
        x = np.linspace(-3.0, 3.0, 41) / math.sqrt(abs(K))
        series = max(series, float(np.max(np.abs(sin_k_series(K, x) - sin_k(K, x)) / np.maximum(1.0, np.abs(sin_k(K, x))))))
    iso = 0.0
    for K in (1.0, 0.0):
        for r in (0.3, 1.0, 2.0):
            L, _ = k_disk(K, r)
            iso = max(iso, abs(general_isoperimetric(K, r)) / max(1.0, L * L))
    # 50 samples with |K| x^2 <= 1, both signs of K
    rng = np.random.default_rng(9)
    K = rng.uniform(-1.0, 1.0, 50)
    x = rng.uniform(-1.0, 1.0, 50) / np.sqrt(np.abs(K))
    held = [gap <= bound * (1 + 1e-6) for gap, bound in (continuity_gap(k, xi) for k, xi in zip(K, x))]
    held_pos = sum(h for h, k in zip(held, K) if k > 0)
    held_neg = sum(h for h, k in zip(held, K) if k < 0)
    ok = twice <= 1e-9 and flat <= 1e-6 and series <= 1e-12 and iso <= 1e-12 and all(held)
    record_criterion(9, ok, f"K=-1 vs 2x core {twice:.1e}; unit square {flat:.1e}; series {series:.1e}; "
                            f"isoperimetric {iso:.1e}; continuity bound held at {held_pos}/{int(np.sum(K > 0))} "
                            f"K>0 and {held_neg}/{int(np.sum(K < 0))} K<0 samples (sinh x - x exceeds |x|^3/6)")
    assert ok


def test_criterion_10_reproducibility(tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"report{i}.csv"
        main(["tri-dist", "--method", "mc", "--samples", "200000", "--seed", "11", "--no-timing", "--output", str(out)])
        outs.append(out.read_bytes())
    same = outs[0] == outs[1]
    se = [ideal_triangle_mc(1.0, 2.0, IntegratorConfig(samples=n, seed=10)).std_error for n in (250_000, 1_000_000)]
    ratio = se[1] / se[0]
    ok = same and 0.4 <= ratio <= 0.6
    record_criterion(10, ok, f"byte-identical reports: {same}; std error ratio at 4x samples {ratio:.3f} (in [0.4, 0.6])")
    assert ok
