"""
Two-sided numerical checks of the chord identities and chord-length
distributions for convex hyperbolic domains.

Each check returns an :class:`IdentityReport` holding both sides as
:class:`~liouville.integrate.Estimate` values.  All geodesic integrals use
the edge-pair chart; in particular the kernel ``f'(rho) sinh(rho) cot a_j
cot a_k`` against the Liouville measure is always integrated as the bounded
chart density ``1/2 f'(rho) cos a_j cos a_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate as spi
from scipy.optimize import brentq, minimize_scalar

from .domains import GeodesicPolygon, SmoothDomain, pair_chart, refine
from .geodesics import Geodesic, OrientedGeodesic, measure_box
from .hplane import (
    Frame,
    Isometry,
    hyperboloid_distance,
    mcross,
    mdot,
    normalize_spacelike,
    normalize_timelike,
    rotate_tangent,
    tangent_angle,
    to_plane_point,
)
from .integrate import (
    Estimate,
    IntegratorConfig,
    _DEMap,
    in_chart_measure,
    integrate_unbounded,
    mc_integrate,
    of_length,
    quad_integrate,
)

Domain = Union[GeodesicPolygon, SmoothDomain]


class DivergentMassError(ValueError):
    """The requested chord-length mass is infinite."""


class _Divergent:
    """Marker for masses that diverge (chords of ideal polygons near length 0)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "divergent"

    __str__ = __repr__


DIVERGENT = _Divergent()


# ---------------------------------------------------------------- test functions


@dataclass(frozen=True)
class TestFunction:
    f: Callable[[np.ndarray], np.ndarray]
    f_prime: Callable[[np.ndarray], np.ndarray]
    label: str

    __test__ = False  # not a pytest class

    def derivative_residual(self, points: Sequence[float], h: float = 1e-5) -> float:
        x = np.asarray(points, dtype=float)
        fd = (self.f(x + h) - self.f(x - h)) / (2.0 * h)
        return float(np.max(np.abs(fd - self.f_prime(x))))


TEST_FUNCTIONS = {
    "one": TestFunction(lambda x: np.ones_like(np.asarray(x, dtype=float)),
                        lambda x: np.zeros_like(np.asarray(x, dtype=float)), "one"),
    "x": TestFunction(lambda x: np.asarray(x, dtype=float),
                      lambda x: np.ones_like(np.asarray(x, dtype=float)), "x"),
    "sinh": TestFunction(np.sinh, np.cosh, "sinh"),
    "one_minus_exp": TestFunction(lambda x: -np.expm1(-np.asarray(x, dtype=float)),
                                  lambda x: np.exp(-np.asarray(x, dtype=float)), "one_minus_exp"),
    "x2": TestFunction(lambda x: np.asarray(x, dtype=float) ** 2,
                       lambda x: 2.0 * np.asarray(x, dtype=float), "x2"),
}


def test_function(label: str) -> TestFunction:
    try:
        return TEST_FUNCTIONS[label]
    except KeyError:
        raise ValueError(f"unknown test function {label!r}; choose from {sorted(TEST_FUNCTIONS)}") from None


test_function.__test__ = False


# ---------------------------------------------------------------- reports


def exact(value: float) -> Estimate:
    """A closed-form side of an identity."""
    return Estimate(float(value), 0.0, 1, "quad")


@dataclass
class IdentityReport:
    name: str
    lhs: Estimate
    rhs: Estimate
    tolerance: float
    residual: float = field(init=False)
    passed: bool = field(init=False)

    def __post_init__(self):
        self.residual = abs(self.lhs.value - self.rhs.value)
        if "mc" in (self.lhs.method, self.rhs.method):
            bound = 3.0 * math.hypot(self.lhs.std_error, self.rhs.std_error)
            self.passed = bool(self.residual <= max(bound, self.tolerance if self.tolerance else 0.0))
        else:
            self.passed = bool(self.residual <= self.tolerance)

    @property
    def std_error(self) -> float:
        return math.hypot(self.lhs.std_error, self.rhs.std_error)

    @property
    def n(self) -> int:
        return self.lhs.n + self.rhs.n


@dataclass(frozen=True)
class ChordDistribution:
    cdf: Callable[[float, float], float]
    description: str

    def mass(self, a: float, b: float) -> float:
        return self.cdf(a, b)


def _integrate(poly: GeodesicPolygon, integrand, cfg: IntegratorConfig, method: str) -> Estimate:
    if method == "quad":
        return quad_integrate(poly, integrand, cfg)
    if method == "mc":
        return mc_integrate(poly, integrand, cfg)
    raise ValueError(f"unknown method {method!r}")


def _gauss_1d(f, a: float, b: float, n: int = 64) -> float:
    x, w = leggauss(n)
    return 0.5 * (b - a) * float(np.dot(w, f(0.5 * (a + b) + 0.5 * (b - a) * x)))


def _disk_radius(dom: SmoothDomain) -> Optional[float]:
    return getattr(dom, "radius", None)


def disk_integral(r: float, F: Callable[[np.ndarray], np.ndarray]) -> float:
    """``int F(rho) dmu`` over geodesics meeting a disk of radius ``r``.

    In the polar chart about the center a geodesic at distance ``w`` has
    chord ``rho`` with ``cosh(rho / 2) cosh(w) = cosh(r)``.
    """

    def g(w):
        rho = 2.0 * np.arccosh(np.maximum(math.cosh(r) / np.cosh(w), 1.0))
        return F(rho) * np.cosh(w)

    val, _ = spi.quad(lambda w: float(g(np.array(w))), 0.0, r, epsabs=1e-14, epsrel=1e-13, limit=200)
    return math.pi * val


# ---------------------------------------------------------------- polygon identities


def boundary_term(poly: GeodesicPolygon, tf: TestFunction) -> float:
    """``1/2 sum_i int_0^{|a_i|} f``."""
    return 0.5 * sum(_gauss_1d(tf.f, 0.0, L) for L in poly.edge_lengths())


def ap_rhs_integrand(tf: TestFunction):
    """Chart density ``1/2 f'(rho) cos a_j cos a_k`` with its boundedness check."""

    def g(b):
        fp = np.asarray(tf.f_prime(b.rho), dtype=float)
        vals = 0.5 * fp * b.cos_j * b.cos_k
        bound = 0.5 * np.abs(fp) * (1.0 + 1e-12) + 1e-300
        if np.any(np.abs(vals) > bound):
            raise AssertionError("edge-pair kernel exceeds 1/2 |f'(rho)|")
        return vals

    return in_chart_measure(g)


def crofton(domain: Domain, cfg: IntegratorConfig = IntegratorConfig(), method: str = "quad",
            tolerance: float = 1e-6) -> IdentityReport:
    """Measure of the geodesics meeting ``domain`` against half its perimeter."""
    if isinstance(domain, SmoothDomain):
        r = _disk_radius(domain)
        if r is None:
            raise ValueError("smooth domains other than disks: pass a polygonal approximation")
        return IdentityReport("crofton", exact(disk_integral(r, np.ones_like)), exact(0.5 * domain.length), tolerance)
    lhs = _integrate(domain, of_length(np.ones_like), cfg, method)
    tol = tolerance * domain.perimeter() if method == "quad" else tolerance
    return IdentityReport("crofton", lhs, exact(0.5 * domain.perimeter()), tol)


def disk_polar_measure(r: float) -> float:
    """``int int 1/2 cosh(w) dw deta`` over ``w < r``, ``eta`` in ``[0, 2 pi)``."""
    val, _ = spi.dblquad(lambda w, eta: 0.5 * math.cosh(w), 0.0, 2.0 * math.pi, 0.0, r, epsabs=1e-13, epsrel=1e-13)
    return val


def ap_identity(poly: GeodesicPolygon, tf: TestFunction, cfg: IntegratorConfig = IntegratorConfig(),
                method: str = "quad", tolerance: float = 1e-5) -> IdentityReport:
    """Both sides of the chord-length identity for a compact convex polygon."""
    if tf.label == "one":
        rep = crofton(poly, cfg, method, tolerance)
        rep.name = "ap[one]"
        return rep
    lhs = _integrate(poly, of_length(tf.f), cfg, method)
    inner = _integrate(poly, ap_rhs_integrand(tf), cfg, method)
    rhs = Estimate(inner.value + boundary_term(poly, tf), inner.std_error, inner.n, inner.method)
    return IdentityReport(f"ap[{tf.label}]", lhs, rhs, tolerance)


def sinh_two_form(poly: GeodesicPolygon, cfg: IntegratorConfig = IntegratorConfig()) -> Estimate:
    """``1/2 int int sin a_j sin a_k dl_j dl_k`` over all edge pairs."""
    return quad_integrate(poly, in_chart_measure(lambda b: 0.5 * b.sin_j * b.sin_k), cfg)


@dataclass
class RefinementStep:
    k: int
    n_vertices: int
    report: IdentityReport
    boundary_term: float
    boundary_limit: float
    max_edge: float


def pleijel_refinement(dom: SmoothDomain, tf: TestFunction, k_max: int,
                       cfg: IntegratorConfig = IntegratorConfig(), tolerance: float = 1e-5) -> list[RefinementStep]:
    """Run the identity on inscribed polygons with 3, 6, ..., 3 * 2^k_max vertices."""
    poly = dom.inscribed(3)
    limit = 0.5 * float(tf.f(np.array(0.0))) * dom.length
    steps = []
    for k in range(k_max + 1):
        if k:
            poly = refine(poly, dom)
        rep = ap_identity(poly, tf, cfg, "quad", tolerance)
        steps.append(RefinementStep(k, poly.n, rep, boundary_term(poly, tf), limit, max(poly.edge_lengths())))
    return steps


def isoperimetric_defect(L: float, A: float) -> float:
    return L * L - 4.0 * math.pi * A - A * A


def disk_defect(r: float) -> float:
    """Closed-form defect of a disk; zero up to rounding."""
    L = 2.0 * math.pi * math.sinh(r)
    A = 2.0 * math.pi * (math.cosh(r) - 1.0)
    return isoperimetric_defect(L, A)


def isoperimetric(domain: Domain, cfg: IntegratorConfig = IntegratorConfig(), n_approx: int = 96,
                  tolerance: Optional[float] = None) -> tuple[float, IdentityReport]:
    """Isoperimetric defect and the two-sided check of

    ``L^2/4 - sum_{j>k} int int sin^2((a_j - a_k)/2) dl_j dl_k = pi A + A^2/4``

    on ``domain`` (a polygon) or an inscribed ``n_approx``-gon (disk).
    """
    if isinstance(domain, SmoothDomain):
        r = _disk_radius(domain)
        defect = disk_defect(r) if r is not None else math.nan
        poly = domain.inscribed(n_approx)
    else:
        poly = domain
        defect = isoperimetric_defect(poly.perimeter(), poly.area())
    if tolerance is None:
        tolerance = 1e-3 * min(1.0, 10.0 * max(poly.edge_lengths()))
    L, A = poly.perimeter(), poly.area()
    half_gap = quad_integrate(
        poly, in_chart_measure(lambda b: 0.5 * (1.0 - b.cos_j * b.cos_k - b.sin_j * b.sin_k)), cfg
    )
    lhs = Estimate(0.25 * L * L - half_gap.value, half_gap.std_error, half_gap.n, "quad")
    rep = IdentityReport("isoperimetric", lhs, exact(math.pi * A + 0.25 * A * A), tolerance)
    return defect, rep


# ---------------------------------------------------------------- ideal triangle


def _F(rho):
    """Antiderivative of ``rho / sinh(rho)^2``: ``log sinh rho - rho coth rho``."""
    rho = np.asarray(rho, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        em = -np.expm1(-2.0 * rho)
        out = np.log(em) - math.log(2.0) - 2.0 * rho * np.exp(-2.0 * rho) / em
    return np.where(np.isinf(rho), -math.log(2.0), out)


def triangle_pair_cdf(a: float, b: float) -> float:
    """Mass of one edge pair of an ideal triangle, chords in ``[a, b]``."""
    if a <= 0.0:
        raise DivergentMassError("chord-length mass near 0 diverges; need a > 0")
    if b < a:
        raise ValueError("need a <= b")
    if a == b:
        return 0.0
    return float(_F(b) - _F(a))


def ideal_triangle_cdf(a: float, b: float) -> float:
    """``3 [log sinh rho - rho coth rho]_a^b``."""
    return 3.0 * triangle_pair_cdf(a, b)


def ideal_triangle_distribution() -> ChordDistribution:
    return ChordDistribution(ideal_triangle_cdf, "ideal triangle: 3 rho / sinh(rho)^2 drho")


def _csch(rho):
    return 2.0 * np.exp(-rho) / -np.expm1(-2.0 * rho)


def triangle_density(rho):
    rho = np.asarray(rho, dtype=float)
    return 3.0 * rho * _csch(rho) ** 2


def triangle_chord_length(u, v):
    """Chord of the geodesic ``(u, v)``, ``u < 0 < 1 < v``, in the ideal
    triangle ``0, 1, inf`` (it crosses ``x = 0`` at height ``sqrt(-uv)`` and
    ``x = 1`` at height ``sqrt((v-1)(1-u))``)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    y1 = np.sqrt(-u * v)
    y3 = np.sqrt((v - 1.0) * (1.0 - u))
    with np.errstate(divide="ignore"):
        return 2.0 * np.arcsinh(np.hypot(1.0, y1 - y3) / (2.0 * np.sqrt(y1 * y3)))


def triangle_chord_from_heights(l1, l3):
    """``cosh rho = (1 + e^{2 l1} + e^{2 l3}) / (2 e^{l1} e^{l3})``."""
    l1 = np.asarray(l1, dtype=float)
    l3 = np.asarray(l3, dtype=float)
    return np.arccosh(0.5 * (np.exp(-l1 - l3) + np.exp(l1 - l3) + np.exp(l3 - l1)))


def _level_breaks(fun, rng: tuple[float, float], levels: Sequence[float], n_scan: int = 65) -> list[float]:
    """Points in ``rng`` where the scalar function ``fun`` crosses each level."""
    m = _DEMap(rng[0], rng[1], "algebraic")
    t0, t1 = m.span
    y, _ = m(np.linspace(t0, t1, n_scan))
    with np.errstate(all="ignore"):
        vals = fun(y)
    out = []
    for lev in levels:
        if not math.isfinite(lev):
            continue
        s = np.sign(vals - lev)
        for i in np.flatnonzero((s[:-1] * s[1:]) < 0):
            out.append(brentq(lambda x: float(fun(np.array([x]))[0]) - lev, y[i], y[i + 1],
                              xtol=1e-15, rtol=1e-15))
    return out


def _window_mass(rho_fn, u_range, v_range, a: float, b: float, cfg: IntegratorConfig) -> Estimate:
    """``int int 1{a <= rho <= b} du dv / (u - v)^2`` over an arc product."""

    def integrand(u, v):
        r = rho_fn(u, v)
        with np.errstate(divide="ignore"):
            # nodes rounded onto a shared vertex carry no chord in the window
            return np.where((r >= a) & (r <= b), 1.0 / (u - v) ** 2, 0.0)

    def breaks(u):
        return _level_breaks(lambda v: rho_fn(np.full_like(v, u), v), v_range, (a, b))

    return integrate_unbounded(u_range, v_range, integrand, cfg, method="iterated", inner_breaks=breaks)


def ideal_triangle_quad(a: float, b: float, cfg: IntegratorConfig = IntegratorConfig(tolerance=1e-10)) -> Estimate:
    """Endpoint-chart quadrature of the ``[a, b]`` mass, times three."""
    if a <= 0.0:
        raise DivergentMassError("chord-length mass near 0 diverges; need a > 0")
    if a >= b:
        return exact(0.0)
    e = _window_mass(triangle_chord_length, (-math.inf, 0.0), (1.0, math.inf), a, b, cfg)
    return Estimate(3.0 * e.value, 3.0 * e.std_error, e.n, "quad")


def ideal_triangle_mc(a: float, b: float, cfg: IntegratorConfig = IntegratorConfig()) -> Estimate:
    """Monte Carlo of the endpoint-chart mass, times three.

    ``u = -e^s``, ``v = 1 + e^t`` with ``s, t`` drawn from the logistic
    density ``sech^2(l/2)/4``; shard ``i`` uses the Philox stream ``(seed, i, 0)``.
    """
    if a <= 0.0:
        raise DivergentMassError("chord-length mass near 0 diverges; need a > 0")
    if a >= b:
        return Estimate(0.0, 0.0, 0, "mc")
    m = max(1, -(-cfg.samples // cfg.shards))
    vals = np.empty(cfg.shards)
    for i in range(cfg.shards):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([cfg.seed, i, 0])))
        U = rng.random((2, m))
        s = np.log(U[0]) - np.log1p(-U[0])
        t = np.log(U[1]) - np.log1p(-U[1])
        ps = 0.25 / np.cosh(0.5 * s) ** 2
        pt = 0.25 / np.cosh(0.5 * t) ** 2
        u, v = -np.exp(s), 1.0 + np.exp(t)
        r = triangle_chord_length(u, v)
        w = np.exp(s + t) / (u - v) ** 2 / (ps * pt)
        vals[i] = 3.0 * float(np.mean(np.where((r >= a) & (r <= b), w, 0.0)))
    se = float(np.std(vals, ddof=1) / math.sqrt(cfg.shards))
    return Estimate(float(vals.mean()), se, m * cfg.shards, "mc")


def _triangle_moment(g) -> float:
    """``int_0^inf g(rho) 3 rho / sinh(rho)^2 drho``."""
    # the density decays like rho e^{-2 rho}; beyond 700 nothing is left
    val, _ = spi.quad(lambda r: float(g(np.array(r)) * triangle_density(r)), 0.0, 700.0,
                      points=[1.0, 10.0, 50.0], epsabs=1e-14, epsrel=1e-13, limit=400)
    return val


def _is_ideal_triangle(domain) -> bool:
    return isinstance(domain, GeodesicPolygon) and domain.n == 3 and domain.is_ideal


def santalo_area_squared(domain: Domain, cfg: IntegratorConfig = IntegratorConfig(), method: str = "quad",
                         tolerance: float = 1e-5) -> IdentityReport:
    """``A^2`` against ``int 4 (sinh rho - rho) dmu``."""
    F = lambda r: 4.0 * (np.sinh(r) - r)
    if _is_ideal_triangle(domain):
        return IdentityReport("santalo", exact(math.pi**2), exact(_triangle_moment(F)), 1e-8)
    if isinstance(domain, SmoothDomain):
        r = _disk_radius(domain)
        area = 2.0 * math.pi * (math.cosh(r) - 1.0)
        return IdentityReport("santalo", exact(area**2), exact(disk_integral(r, F)), tolerance)
    return IdentityReport("santalo", exact(domain.area() ** 2), _integrate(domain, of_length(F), cfg, method), tolerance)


def unit_tangent_check(domain: Domain, cfg: IntegratorConfig = IntegratorConfig(), method: str = "quad",
                       tolerance: float = 1e-5) -> IdentityReport:
    """``pi A`` against ``int 2 rho dmu``."""
    F = lambda r: 2.0 * r
    if _is_ideal_triangle(domain):
        return IdentityReport("unit-tangent", exact(math.pi**2), exact(_triangle_moment(F)), 1e-8)
    if isinstance(domain, SmoothDomain):
        r = _disk_radius(domain)
        area = 2.0 * math.pi * (math.cosh(r) - 1.0)
        return IdentityReport("unit-tangent", exact(math.pi * area), exact(disk_integral(r, F)), tolerance)
    return IdentityReport("unit-tangent", exact(math.pi * domain.area()), _integrate(domain, of_length(F), cfg, method),
                          tolerance)


# ---------------------------------------------------------------- ideal quadrilateral


def common_perpendicular(g1: Geodesic, g2: Geodesic) -> OrientedGeodesic:
    """The geodesic meeting ``g1`` and ``g2`` at right angles, oriented from
    ``g1`` to ``g2`` with origin at the midpoint between the two feet."""
    F1, F2 = perpendicular_feet(g1, g2)
    Z = normalize_timelike(F1 + F2)
    return OrientedGeodesic.through(to_plane_point(Z), to_plane_point(F2))


def perpendicular_feet(g1: Geodesic, g2: Geodesic):
    N1, N2 = g1.normal(), g2.normal()
    c = float(mdot(N1, N2))
    if abs(c) <= 1.0 + 1e-12:
        raise ValueError("geodesics intersect or share an endpoint; no common perpendicular")
    Np = normalize_spacelike(mcross(N1, N2))
    return normalize_timelike(mcross(N1, Np)), normalize_timelike(mcross(N2, Np))


OPPOSITE_PAIRS = {"13": (2, 0), "24": (3, 1)}


def _arc(poly: GeodesicPolygon, i: int) -> tuple[float, float]:
    """Boundary interval cut off by edge ``i`` of an ideal polygon."""
    a = poly.vertices[i].ideal
    b = poly.vertices[(i + 1) % poly.n].ideal
    if a.is_infinite:
        return -math.inf, b.value
    if b.is_infinite:
        return a.value, math.inf
    if a.value < b.value:
        return a.value, b.value
    raise ValueError("edge arc contains infinity; move the polygon so that infinity is a vertex or outside its arcs")


def _endpoint_normal(u, v):
    """Unit normal of the geodesic with finite endpoints ``u``, ``v``; the
    factor ``v - u`` is divided out analytically."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.stack([-(1.0 + u * v), 1.0 - u * v, -(u + v)], axis=-1) / np.abs(u - v)[..., None]


def ideal_pair_chord_length(poly: GeodesicPolygon, j: int, k: int):
    """Chord length of the geodesic ``(u, v)`` between edges ``j`` and ``k``."""
    Nj, Nk = poly.edges[j].normal, poly.edges[k].normal
    # a geodesic grazing the shared ideal vertex of adjacent edges has a
    # vanishing chord, where the crossing points are lost to rounding
    fallback = 0.0 if poly.adjacent(j, k) else math.inf

    def rho(u, v):
        N = _endpoint_normal(u, v)
        with np.errstate(invalid="ignore", divide="ignore"):
            Xj = normalize_timelike(mcross(N, Nj))
            Xk = normalize_timelike(mcross(N, Nk))
            r = hyperboloid_distance(Xj, Xk)
        return np.where(np.isnan(r), fallback, r)

    return rho


def _cusp_map(shared, spare) -> Isometry:
    """Isometry taking ideal points ``shared`` to 0 and ``spare`` to infinity."""
    if spare.is_infinite:
        return Isometry(1.0, -shared.value, 0.0, 1.0)
    if shared.is_infinite:
        return Isometry(0.0, -1.0, 1.0, -spare.value)
    s, m = shared.value, spare.value
    sg = math.copysign(1.0, s - m)
    return Isometry(sg, -sg * s, 1.0, -m)


def ideal_pair_window_mass(poly: GeodesicPolygon, j: int, k: int, a: float, b: float,
                           cfg: IntegratorConfig = IntegratorConfig(tolerance=1e-10)) -> Estimate:
    """Endpoint-chart mass of the chords of length in ``[a, b]`` between edges j and k."""
    if not poly.is_ideal:
        raise ValueError("endpoint-chart pair masses need an ideal polygon")
    if a <= 0.0 and poly.adjacent(j, k):
        raise DivergentMassError("adjacent-pair mass diverges near length 0")
    if a >= b:
        return exact(0.0)
    # send a vertex off both edges to infinity so the arcs are bounded
    spare = [m for m in range(poly.n) if m not in {j, (j + 1) % poly.n, k, (k + 1) % poly.n}]
    if spare and poly.adjacent(j, k):
        # shared vertex to 0 as well, which keeps the cusp symmetric
        g = _cusp_map(poly.vertices[j if j == k + 1 else 0].ideal, poly.vertices[spare[0]].ideal)
        poly = poly.transformed(g)
    return _window_mass(ideal_pair_chord_length(poly, j, k), _arc(poly, j), _arc(poly, k), max(a, 0.0), b, cfg)


class OppositePairChart:
    """Polar chart about the midpoint of the common perpendicular of two
    opposite edges of an ideal quadrilateral.

    The polar frame points along the perpendicular toward edge ``j``; each
    ``eta`` in ``[0, pi)`` and ``w`` in R gives one geodesic.
    """

    def __init__(self, quad: GeodesicPolygon, pair: str):
        if not (quad.is_ideal and quad.n == 4):
            raise ValueError("need an ideal quadrilateral")
        if pair not in OPPOSITE_PAIRS:
            raise ValueError("pair must be '13' or '24'")
        self.quad = quad
        self.j, self.k = OPPOSITE_PAIRS[pair]
        ej, ek = quad.edges[self.j], quad.edges[self.k]
        self.Nj, self.Nk = ej.normal, ek.normal
        gk, gj = Geodesic.from_normal(self.Nk), Geodesic.from_normal(self.Nj)
        Fk, Fj = perpendicular_feet(gk, gj)
        self.gap = float(hyperboloid_distance(Fk, Fj))
        Z = normalize_timelike(Fk + Fj)
        T = normalize_spacelike(Fj + mdot(Fj, Z) * Z)
        self.frame = Frame(to_plane_point(Z), tangent_angle(Z, T))
        host = OrientedGeodesic.from_frame(self.frame)
        self.O, self.E1 = host.origin_vector, host.tangent
        self.E2 = rotate_tangent(self.O, self.E1)
        self.total = measure_box(quad.vertices[self.j].ideal, quad.vertices[(self.j + 1) % 4].ideal,
                                 quad.vertices[self.k].ideal, quad.vertices[(self.k + 1) % 4].ideal)
        self.warnings: list[str] = []

    def _E(self, eta):
        return math.cos(eta) * self.E1 + math.sin(eta) * self.E2

    def interval(self, eta: float) -> Optional[tuple[float, float]]:
        """Range of ``w`` whose geodesic crosses both edges."""
        iv = self._interval(eta)
        return None if iv is None else iv[:2]

    def _interval(self, eta: float):
        # also reports which edge binds each end, to locate kinks in eta
        E = self._E(eta)
        lo, hi = -math.inf, math.inf
        src = [None, None]
        for idx, N in enumerate((self.Nj, self.Nk)):
            # crossing <=> |a sinh w + b cosh w| < 1; solve in t = e^w
            a, b = float(mdot(self.O, N)), float(mdot(E, N))
            ws = []
            for c in (-1.0, 1.0):
                A, B, C = a + b, -2.0 * c, b - a
                if abs(A) < 1e-300:
                    ts = [-C / B]
                else:
                    disc = B * B - 4.0 * A * C
                    ts = [] if disc < 0.0 else [(-B - math.sqrt(disc)) / (2 * A), (-B + math.sqrt(disc)) / (2 * A)]
                ws += [math.log(t) for t in ts if t > 0.0]
            cuts = [-math.inf] + sorted(ws) + [math.inf]
            inside = []
            for x, y in zip(cuts[:-1], cuts[1:]):
                m = 0.5 * (x + y) if math.isfinite(x) and math.isfinite(y) else (
                    y - 1.0 if math.isfinite(y) else (x + 1.0 if math.isfinite(x) else 0.0))
                if abs(a * math.sinh(m) + b * math.cosh(m)) < 1.0:
                    inside.append((x, y))
            if not inside:
                return None
            if inside[0][0] > lo:
                lo, src[0] = inside[0][0], idx
            if inside[0][1] < hi:
                hi, src[1] = inside[0][1], idx
        if not hi - lo > 1e-12 * max(1.0, abs(lo), abs(hi)):
            return None
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("unbounded crossing interval; edges are not opposite")
        return lo, hi, tuple(src)

    def rho(self, w, eta: float):
        """Chord length only (vectorized in ``w``)."""
        w = np.atleast_1d(np.asarray(w, dtype=float))
        E = self._E(eta)
        N = np.sinh(w)[:, None] * self.O + np.cosh(w)[:, None] * E
        return hyperboloid_distance(normalize_timelike(mcross(N, self.Nj)), normalize_timelike(mcross(N, self.Nk)))

    def chord(self, w, eta: float) -> dict:
        """Chord length, angle cotangents and ``d rho / d w`` (vectorized in ``w``)."""
        w = np.atleast_1d(np.asarray(w, dtype=float))
        E = self._E(eta)
        ch, sh = np.cosh(w)[:, None], np.sinh(w)[:, None]
        N = sh * self.O + ch * E
        dN = ch * self.O + sh * E
        F = ch * self.O + sh * E
        TG = mcross(F, N)
        X = {i: normalize_timelike(mcross(N, Ni)) for i, Ni in ((self.j, self.Nj), (self.k, self.Nk))}
        rho = hyperboloid_distance(X[self.j], X[self.k])
        q, c_cosh, c_sinh = {}, {}, {}
        for i, Ni in ((self.j, self.Nj), (self.k, self.Nk)):
            Xi = X[i]
            qi = np.arcsinh(mdot(Xi, TG))
            eq = np.sinh(qi)[:, None] * F + np.cosh(qi)[:, None] * TG
            nhat = -np.sign(mdot(Xi, dN))[:, None] * N
            d = mcross(Xi, np.broadcast_to(Ni, Xi.shape))
            d = d * np.sign(mdot(d, nhat))[:, None]
            cot = mdot(d, eq) / mdot(d, nhat)
            q[i] = qi
            c_cosh[i] = np.cosh(qi) * cot
            c_sinh[i] = np.sinh(np.abs(qi)) * cot
        s = np.sign(q[self.j] - q[self.k])
        ej, ek = self.quad.edges[self.j], self.quad.edges[self.k]
        pc = pair_chart(self.quad, self.j, self.k, ej.parameter_of(X[self.j]), ek.parameter_of(X[self.k]))
        return {
            "rho": rho,
            "cot_prod": pc["cos_j"] * pc["cos_k"] / (pc["sin_j"] * pc["sin_k"]),
            "drho_dw": s * (c_cosh[self.j] - c_cosh[self.k]),
            "drho_dw_sinh": s * (c_sinh[self.j] - c_sinh[self.k]),
        }

    def _scan(self, eta):
        iv = self.interval(eta)
        if iv is None:
            return None
        lo, hi = iv
        ws = lo + (hi - lo) * np.linspace(0.0, 1.0, 67)[1:-1]
        return lo, hi, ws, self.rho(ws, eta)

    def minimum(self, eta: float):
        """``(w*, rho_min)`` at fixed ``eta``, or ``None`` if no geodesic crosses both edges."""
        sc = self._scan(eta)
        if sc is None:
            return None
        lo, hi, ws, r = sc
        d = np.diff(r)
        if np.count_nonzero(np.diff(np.sign(d[d != 0.0]))) > 1:
            self.warnings.append(f"chord length is not unimodal in w at eta={eta:.6g}")
        i = int(np.argmin(r))
        a, b = ws[max(i - 1, 0)], ws[min(i + 1, len(ws) - 1)]
        res = minimize_scalar(lambda x: float(self.rho(x, eta)[0]), bounds=(a, b), method="bounded",
                              options={"xatol": 1e-14})
        if res.fun <= r[i]:
            return float(res.x), float(res.fun)
        return float(ws[i]), float(r[i])

    def rho_min(self, eta: float, cap: float = 60.0) -> float:
        m = self.minimum(eta)
        return cap if m is None else min(m[1], cap)

    def roots(self, eta: float, rho0: float) -> list[float]:
        """Values of ``w`` with chord length ``rho0``: bisection on each side of the minimum."""
        m = self.minimum(eta)
        if m is None or m[1] >= rho0:
            return []
        lo, hi = self.interval(eta)
        span = hi - lo
        f = lambda x: float(self.rho(x, eta)[0]) - rho0
        out = []
        for end in (lo + 1e-13 * span, hi - 1e-13 * span):
            if not f(end) > 0.0:
                self.warnings.append(f"non-bracketing root search at eta={eta:.6g}")
                continue
            out.append(brentq(f, *sorted((m[0], end)), xtol=1e-12, rtol=1e-15))
        return sorted(out)

    def profile(self, eta: float, rho0: float) -> np.ndarray:
        """Per-``eta`` densities ``(direct, level-set, level-set with sinh)``.

        ``direct`` is ``int 1{rho <= rho0} 1/2 cosh w dw``; the level-set
        densities are ``-1/2 sum_roots cot a_j cot a_k sinh(rho0) cosh(w) / |d rho/d w|``.
        """
        if math.isinf(rho0):
            iv = self.interval(eta)
            d = 0.0 if iv is None else 0.5 * (math.sinh(iv[1]) - math.sinh(iv[0]))
            return np.array([d, math.nan, math.nan])
        rs = self.roots(eta, rho0)
        if len(rs) != 2:
            return np.zeros(3)
        c = self.chord(np.array(rs), eta)
        base = -0.5 * c["cot_prod"] * math.sinh(rho0) * np.cosh(rs)
        return np.array([
            0.5 * (math.sinh(rs[1]) - math.sinh(rs[0])),
            float(np.sum(base / np.abs(c["drho_dw"]))),
            float(np.sum(base / np.abs(c["drho_dw_sinh"]))),
        ])

    def breakpoints(self, rho0: float, n_scan: int = 129) -> list[float]:
        """``eta`` values where the minimal chord length reaches ``rho0`` (or
        where the crossing interval closes, for ``rho0 = inf``)."""
        etas = np.linspace(0.0, math.pi, n_scan)
        if math.isinf(rho0):
            def g(e):
                iv = self.interval(e)
                return -1.0 if iv is None else iv[1] - iv[0]
        else:
            def g(e):
                return self.rho_min(e) - rho0
        vals = np.array([g(e) for e in etas])
        out = []
        if math.isinf(rho0):
            # the width has kinks where the binding edge switches
            def key(e):
                iv = self._interval(e)
                return None if iv is None else iv[2]
            keys = [key(e) for e in etas]
            for i in range(n_scan - 1):
                if keys[i] is None or keys[i + 1] is None or keys[i] == keys[i + 1]:
                    continue
                a, b = etas[i], etas[i + 1]
                for _ in range(60):
                    mid = 0.5 * (a + b)
                    k = key(mid)
                    if k == keys[i]:
                        a = mid
                    elif k == keys[i + 1]:
                        b = mid
                    else:
                        break
                out.append(0.5 * (a + b))
        for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
            if math.isinf(rho0):
                a, b = etas[i], etas[i + 1]
                ga = np.sign(vals[i])
                for _ in range(80):
                    mid = 0.5 * (a + b)
                    if np.sign(g(mid)) == ga:
                        a = mid
                    else:
                        b = mid
                out.append(0.5 * (a + b))
            else:
                out.append(brentq(g, etas[i], etas[i + 1], xtol=1e-15, rtol=1e-15))
        return sorted(out)

    def eta_integral(self, rho0: float, n: int = 128, tol: float = 1e-9,
                     max_n: int = 1024) -> tuple[np.ndarray, np.ndarray]:
        """Integrate :meth:`profile` over ``[0, pi)``.

        Nodes cluster as ``sin^2`` at the breakpoints, which turns the square
        root (direct) and inverse square root (level-set) endpoint behavior
        into smooth integrands.  The order doubles from ``n`` (up to ``max_n``)
        until successive rules agree to ``tol``; returns values and that
        difference.
        """
        pts = [0.0] + self.breakpoints(rho0) + [math.pi]

        def rule(m):
            x, w = leggauss(m)
            s = 0.5 * (x + 1.0)
            total = np.zeros(3)
            for a, b in zip(pts[:-1], pts[1:]):
                if not np.any(self.profile(0.5 * (a + b), rho0)):
                    continue  # no chord of length rho0 anywhere between breakpoints
                eta = a + (b - a) * np.sin(0.5 * math.pi * s) ** 2
                jac = 0.25 * math.pi * (b - a) * np.sin(math.pi * s)
                vals = np.array([self.profile(e, rho0) for e in eta])
                total += (w * jac) @ vals
            return total

        lo = rule(3 * n // 4)
        while True:
            hi = rule(n)
            err = np.abs(hi - lo)
            # the level-set rows are nan at rho0 = inf
            if n >= max_n or not np.nanmax(err) > tol * max(1.0, float(np.nanmax(np.abs(hi)))):
                return hi, err
            lo, n = hi, 2 * n


@dataclass
class OppositeMass:
    rho0: float
    direct: float
    direct_error: float
    paper: Optional[float]
    paper_error: Optional[float]
    paper_literal: Optional[float]
    endpoint_chart: Optional[float]
    total: float
    warnings: list


def quad_opposite_cdf(quad: GeodesicPolygon, pair: str, rho0: float,
                      cfg: IntegratorConfig = IntegratorConfig(tolerance=1e-10), n: int = 128,
                      endpoint_oracle: bool = False) -> OppositeMass:
    """Mass of chords between two opposite edges with length at most ``rho0``.

    ``direct`` integrates ``1/2 cosh w`` over ``{rho <= rho0}`` in the polar
    chart.  ``paper`` evaluates the level-set formula
    ``1/2 int -cot a_j cot a_k sinh(rho0) cosh(w) / |d rho/d w| deta`` with
    ``d rho / d w = cosh(r_j) cot b_j + cosh(r_k) cot b_k`` (``r`` the
    distances from the foot of the polar perpendicular to the crossings);
    ``paper_literal`` uses ``sinh`` in place of ``cosh`` there.
    ``endpoint_chart`` is an independent endpoint-chart quadrature.
    """
    ch = OppositePairChart(quad, pair)
    if rho0 <= ch.gap:
        zero = None if math.isinf(rho0) else 0.0
        return OppositeMass(rho0, 0.0, 0.0, zero, zero, zero, 0.0 if endpoint_oracle else None, ch.total, [])
    vals, errs = ch.eta_integral(rho0, n)
    paper = perr = lit = None
    if math.isfinite(rho0):
        paper, perr, lit = float(vals[1]), float(errs[1]), float(vals[2])
    ep = None
    if endpoint_oracle:
        ep = ideal_pair_window_mass(quad, ch.j, ch.k, 0.0, rho0, cfg).value
    return OppositeMass(rho0, float(vals[0]), float(errs[0]), paper, perr, lit, ep, ch.total, sorted(set(ch.warnings)))


PAPER_ADJACENT_COEFFICIENT = 12.0


@dataclass
class QuadBreakdown:
    a: float
    b: float
    adjacent: dict
    m13: float
    m24: float
    total: object
    per_pair_closed_form: object
    measured_coefficient: Optional[float]
    paper_coefficient: float = PAPER_ADJACENT_COEFFICIENT

    def coefficient_match(self, rel: float = 1e-6) -> Optional[str]:
        """Which candidate adjacent coefficient (4 measured-geometry or the
        paper's 12) the measurement agrees with, if any."""
        if self.measured_coefficient is None:
            return None
        for label, c in (("per-pair", 4.0), ("paper", self.paper_coefficient)):
            if abs(self.measured_coefficient - c) <= rel * c:
                return label
        return None


def quad_distribution(quad: GeodesicPolygon, a: float, b: float,
                      cfg: IntegratorConfig = IntegratorConfig(tolerance=1e-10)) -> QuadBreakdown:
    """Chord-length mass of an ideal quadrilateral on ``[a, b]``, split by edge pair."""
    if not (quad.is_ideal and quad.n == 4):
        raise ValueError("need an ideal quadrilateral")
    if not 0.0 <= a < b:
        raise ValueError("need 0 <= a < b")
    opp = {}
    for name in OPPOSITE_PAIRS:
        hi = quad_opposite_cdf(quad, name, b, cfg).direct
        lo = quad_opposite_cdf(quad, name, a, cfg).direct if a > 0.0 else 0.0
        opp[name] = hi - lo
    adjacent = {}
    if a == 0.0:
        for j, k in quad.pairs():
            if quad.adjacent(j, k):
                adjacent[(j, k)] = DIVERGENT
        return QuadBreakdown(a, b, adjacent, opp["13"], opp["24"], DIVERGENT, DIVERGENT, None)
    for j, k in quad.pairs():
        if quad.adjacent(j, k):
            adjacent[(j, k)] = ideal_pair_window_mass(quad, j, k, a, b, cfg).value
    per_pair = triangle_pair_cdf(a, b)
    adj_total = sum(adjacent.values())
    total = adj_total + opp["13"] + opp["24"]
    return QuadBreakdown(a, b, adjacent, opp["13"], opp["24"], total, per_pair, adj_total / per_pair)
