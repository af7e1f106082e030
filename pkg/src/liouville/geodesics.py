"""
Geodesics of the upper half-plane and the Liouville measure in its charts.

Charts and normalization (Liouville constant 1/2):

* endpoints ``(u, v)``:      ``du dv / (u - v)^2``
* incidence ``(l, alpha)``:  ``1/2 sin(alpha) dl dalpha``
* two hosts ``(l1, l2)``:    ``sin(a1) sin(a2) / (2 sinh rho) dl1 dl2``
* polar ``(w, eta)``:        ``1/2 cosh(w) dw deta``

Angle conventions, in the standard orientation of the half-plane:
``alpha`` on a single host (and ``alpha1`` on a first host) is measured
clockwise from the host direction to the crossing geodesic, ``alpha2`` on a
second host counter-clockwise.  ``eta`` is measured counter-clockwise from
the frame direction.  With these choices the polar relations
``tanh l = tanh w / cos eta``, ``cos alpha = cosh w sin eta`` and the four-case
sign table for the host-to-host partial derivatives hold as stated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hplane import (
    CANONICAL_FRAME,
    TWO_PI,
    Frame,
    Isometry,
    PlanePoint,
    hyperboloid_distance,
    mcross,
    mdot,
    normalize_spacelike,
    normalize_timelike,
    rotate_tangent,
    to_plane_point,
)

DEGENERATE_SIN = 1e-9


class NonTransversalError(ValueError):
    """Raised when a geodesic does not cross a host transversally."""


@dataclass(frozen=True)
class BoundaryPoint:
    """Point ``a/b`` of R u {inf} in homogeneous coordinates."""

    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        n = math.hypot(a, b)
        if n == 0.0 or not math.isfinite(n):
            raise ValueError("boundary point needs a nonzero finite homogeneous pair")
        a, b = a / n, b / n
        if b < 0.0 or (b == 0.0 and a < 0.0):
            a, b = -a, -b
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def real(cls, u: float) -> "BoundaryPoint":
        if math.isinf(u):
            return cls(1.0, 0.0)
        return cls(u, 1.0)

    @classmethod
    def parse(cls, value) -> "BoundaryPoint":
        if isinstance(value, str):
            if value.strip().lower() in ("inf", "infinity", "+inf", "-inf", "∞"):
                return INFINITY
            return cls.real(float(value))
        return cls.real(float(value))

    @property
    def is_infinite(self) -> bool:
        return self.b == 0.0

    @property
    def value(self) -> float:
        return math.inf if self.b == 0.0 else self.a / self.b

    def circle_angle(self) -> float:
        """Position on the boundary circle, in (-pi, pi]; infinity sits at pi."""
        return 2.0 * math.atan2(self.a, self.b) if self.b > 0.0 else math.pi

    def lightlike(self) -> np.ndarray:
        a, b = self.a, self.b
        return np.array([0.5 * (a * a + b * b), 0.5 * (a * a - b * b), a * b])

    def transformed(self, g: Isometry) -> "BoundaryPoint":
        return BoundaryPoint(*g.apply_projective(self.a, self.b))

    def __repr__(self):
        return "BoundaryPoint(inf)" if self.is_infinite else f"BoundaryPoint({self.value:.12g})"


INFINITY = BoundaryPoint(1.0, 0.0)


def boundary_from_lightlike(L) -> BoundaryPoint:
    L = np.asarray(L, dtype=float)
    s = L[0] + L[1]
    t = L[0] - L[1]
    # u = L2 / t = s / L2, pick the better conditioned form
    if abs(t) >= abs(s):
        return BoundaryPoint(L[2], t)
    return BoundaryPoint(s, L[2])


def _cross_det(p: BoundaryPoint, q: BoundaryPoint) -> float:
    return p.a * q.b - q.a * p.b


@dataclass(frozen=True)
class Geodesic:
    """Unoriented complete geodesic given by its two endpoints."""

    u: BoundaryPoint
    v: BoundaryPoint

    def __post_init__(self):
        if abs(_cross_det(self.u, self.v)) < 1e-15:
            raise ValueError("geodesic endpoints must be distinct")

    @classmethod
    def from_reals(cls, u: float, v: float) -> "Geodesic":
        return cls(BoundaryPoint.real(u), BoundaryPoint.real(v))

    @classmethod
    def from_normal(cls, N) -> "Geodesic":
        u, v = _endpoints_of_normal(N)
        return cls(u, v)

    def normal(self) -> np.ndarray:
        """Unit spacelike normal; points ``X`` with ``<X, N> > 0`` lie left of u -> v."""
        return normalize_spacelike(mcross(self.v.lightlike(), self.u.lightlike()))

    def residual(self, p: PlanePoint) -> float:
        """sinh of the distance from ``p`` to the geodesic."""
        return abs(float(mdot(p.hyperboloid(), self.normal())))

    def contains(self, p: PlanePoint, tol: float = 1e-10) -> bool:
        return self.residual(p) <= tol

    def same_as(self, other: "Geodesic", tol: float = 1e-10) -> bool:
        a, b = self.normal(), other.normal()
        return min(np.max(np.abs(a - b)), np.max(np.abs(a + b))) <= tol

    def transformed(self, g: Isometry) -> "Geodesic":
        return Geodesic(self.u.transformed(g), self.v.transformed(g))

    def center_radius(self) -> tuple[float, float]:
        """Euclidean center and radius; ``(nan, inf)`` for vertical lines."""
        if self.u.is_infinite or self.v.is_infinite:
            return math.nan, math.inf
        u, v = self.u.value, self.v.value
        return 0.5 * (u + v), 0.5 * abs(u - v)


def _endpoints_of_normal(N) -> tuple[BoundaryPoint, BoundaryPoint]:
    N = normalize_spacelike(N)
    # timelike unit vector in N-perp, then a spacelike one completing the basis
    e0 = np.array([1.0, 0.0, 0.0])
    P = normalize_timelike(e0 - mdot(e0, N) * N)
    E = normalize_spacelike(mcross(P, N))
    return boundary_from_lightlike(P - E), boundary_from_lightlike(P + E)


@dataclass(frozen=True)
class OrientedGeodesic:
    """Geodesic from ``negative`` to ``positive`` with an arclength origin."""

    negative: BoundaryPoint
    positive: BoundaryPoint
    origin: PlanePoint
    _N: np.ndarray = field(init=False, repr=False, compare=False)
    _O: np.ndarray = field(init=False, repr=False, compare=False)
    _T: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        N = normalize_spacelike(mcross(self.positive.lightlike(), self.negative.lightlike()))
        O = self.origin.hyperboloid()
        if abs(float(mdot(O, N))) > 1e-10 * max(1.0, O[0]):
            raise ValueError("origin does not lie on the geodesic")
        O = normalize_timelike(O - mdot(O, N) * N)
        object.__setattr__(self, "_N", N)
        object.__setattr__(self, "_O", O)
        object.__setattr__(self, "_T", mcross(O, N))

    @classmethod
    def through(cls, p: PlanePoint, q: PlanePoint) -> "OrientedGeodesic":
        """Oriented from ``p`` toward ``q`` with origin ``p``."""
        P, Q = p.hyperboloid(), q.hyperboloid()
        N = normalize_spacelike(mcross(Q, P))
        u, v = _endpoints_of_normal(N)
        # orient: the tangent at p must point toward q
        cand = cls(u, v, p)
        if mdot(cand.tangent, Q) < 0.0:
            cand = cls(v, u, p)
        return cand

    @classmethod
    def from_frame(cls, frame: Frame) -> "OrientedGeodesic":
        """Geodesic through the frame origin along the frame direction."""
        g = frame.isometry()
        return cls(BoundaryPoint(0.0, 1.0).transformed(g), INFINITY.transformed(g), frame.origin)

    @property
    def geodesic(self) -> Geodesic:
        return Geodesic(self.negative, self.positive)

    @property
    def normal(self) -> np.ndarray:
        """Left unit normal."""
        return self._N

    @property
    def origin_vector(self) -> np.ndarray:
        return self._O

    @property
    def tangent(self) -> np.ndarray:
        """Unit tangent at the origin, pointing toward the positive end."""
        return self._T

    def point_at(self, l):
        l = np.asarray(l, dtype=float)
        return np.cosh(l)[..., None] * self._O + np.sinh(l)[..., None] * self._T

    def tangent_at(self, l):
        l = np.asarray(l, dtype=float)
        return np.sinh(l)[..., None] * self._O + np.cosh(l)[..., None] * self._T

    def plane_point(self, l: float) -> PlanePoint:
        return to_plane_point(self.point_at(l))

    def parameter_of(self, X) -> np.ndarray:
        return np.arcsinh(mdot(X, self._T))

    def side(self, X) -> np.ndarray:
        """+1 left, -1 right."""
        return np.sign(mdot(X, self._N))

    def reversed(self) -> "OrientedGeodesic":
        return OrientedGeodesic(self.positive, self.negative, self.origin)

    def transformed(self, g: Isometry) -> "OrientedGeodesic":
        return OrientedGeodesic(self.negative.transformed(g), self.positive.transformed(g), g.apply(self.origin))


# ---------------------------------------------------------------- samples


@dataclass(frozen=True)
class IncidenceSample:
    l: float
    alpha: float
    host: OrientedGeodesic

    def __post_init__(self):
        if not 0.0 < self.alpha < math.pi:
            raise ValueError("incidence angle must lie in (0, pi)")


@dataclass(frozen=True)
class PolarSample:
    w: float
    eta: float
    frame: Frame = CANONICAL_FRAME

    def __post_init__(self):
        if self.w < 0.0:
            raise ValueError("polar distance must be nonnegative")
        object.__setattr__(self, "eta", self.eta % TWO_PI)


@dataclass(frozen=True)
class SigmaSigns:
    sigma1: int
    sigma2: int


# ---------------------------------------------------------------- constructions


def geodesic_through(p: PlanePoint, q: PlanePoint) -> Geodesic:
    if p.z == q.z:
        raise ValueError("points must be distinct")
    return Geodesic.from_normal(mcross(q.hyperboloid(), p.hyperboloid()))


def intersection(N1, N2):
    """Crossing point of two geodesics given by normals, or ``None``."""
    X = mcross(N1, N2)
    if mdot(X, X) >= 0.0:
        return None
    return normalize_timelike(X)


def _cw_angle(T, D, P) -> float:
    """Clockwise angle from unit tangent ``T`` to the line through ``D``, in [0, pi)."""
    a = math.atan2(-float(mdot(D, rotate_tangent(P, T))), float(mdot(D, T)))
    return a % math.pi


def geodesic_from_incidence(s: IncidenceSample) -> Geodesic:
    host = s.host
    P = host.point_at(s.l)
    T = host.tangent_at(s.l)
    # direction = T rotated clockwise by alpha; normal = that rotated by +90
    N = math.cos(s.alpha) * rotate_tangent(P, T) + math.sin(s.alpha) * T
    return Geodesic.from_normal(N)


def incidence_of(g: Geodesic, host: OrientedGeodesic) -> IncidenceSample:
    N = g.normal()
    P = intersection(N, host.normal)
    if P is None:
        raise NonTransversalError("geodesic does not cross the host")
    l = float(host.parameter_of(P))
    D = rotate_tangent(P, N)
    alpha = _cw_angle(host.tangent_at(l), D, P)
    if math.sin(alpha) < DEGENERATE_SIN:
        raise NonTransversalError("geodesic is tangent to the host")
    return IncidenceSample(l, alpha, host)


def polar_normal(w, eta, frame: Frame = CANONICAL_FRAME):
    """Normals of the geodesics with polar parameters ``(w, eta)`` (vectorized)."""
    host = OrientedGeodesic.from_frame(frame)
    O, E1 = host.origin_vector, host.tangent
    E2 = rotate_tangent(O, E1)
    w = np.asarray(w, dtype=float)
    eta = np.asarray(eta, dtype=float)
    E = np.cos(eta)[..., None] * E1 + np.sin(eta)[..., None] * E2
    return np.sinh(w)[..., None] * O + np.cosh(w)[..., None] * E


def geodesic_from_polar(ps: PolarSample) -> Geodesic:
    return Geodesic.from_normal(polar_normal(ps.w, ps.eta, ps.frame))


def polar_of(g: Geodesic, frame: Frame = CANONICAL_FRAME) -> PolarSample:
    host = OrientedGeodesic.from_frame(frame)
    O, E1 = host.origin_vector, host.tangent
    E2 = rotate_tangent(O, E1)
    N = g.normal()
    if mdot(O, N) > 0.0:
        N = -N
    sw = -float(mdot(O, N))
    w = math.asinh(sw)
    E = (N - sw * O) / math.cosh(w)
    eta = math.atan2(float(mdot(E, E2)), float(mdot(E, E1)))
    return PolarSample(w, eta, frame)


# ---------------------------------------------------------------- densities


def endpoint_density(u: float, v: float) -> float:
    if u == v:
        raise ValueError("endpoints must differ")
    if not (math.isfinite(u) and math.isfinite(v)):
        raise ValueError("endpoint density needs finite endpoints; rotate the chart first")
    return 1.0 / (u - v) ** 2


def _on_arc(p: BoundaryPoint, a: BoundaryPoint, b: BoundaryPoint) -> bool:
    """Whether p lies on the closed arc from a to b in the positive direction."""
    ta, tb, tp = a.circle_angle(), b.circle_angle(), p.circle_angle()
    span = (tb - ta) % TWO_PI
    return (tp - ta) % TWO_PI <= span + 1e-15


def measure_box(a: BoundaryPoint, b: BoundaryPoint, c: BoundaryPoint, d: BoundaryPoint) -> float:
    """Liouville measure of geodesics with one end in [a, b] and one in [c, d].

    Intervals are arcs traversed in the positive direction of R u {inf}.
    """
    if _cross_det(a, b) == 0.0 or _cross_det(c, d) == 0.0:
        return 0.0
    if _on_arc(c, a, b) or _on_arc(d, a, b) or _on_arc(a, c, d) or _on_arc(b, c, d):
        raise ValueError("boundary intervals must be disjoint")
    cr = (_cross_det(a, c) * _cross_det(b, d)) / (_cross_det(a, d) * _cross_det(b, c))
    return abs(math.log(abs(cr)))


def incidence_density(alpha: float) -> float:
    if not 0.0 < alpha < math.pi:
        raise ValueError("angle must lie in (0, pi)")
    return 0.5 * math.sin(alpha)


def pair_density(alpha1: float, alpha2: float, rho: float) -> float:
    if rho <= 0.0:
        raise ValueError("chord length must be positive")
    if not (0.0 < alpha1 < math.pi and 0.0 < alpha2 < math.pi):
        raise ValueError("angles must lie in (0, pi)")
    return math.sin(alpha1) * math.sin(alpha2) / (2.0 * math.sinh(rho))


def polar_density(w: float) -> float:
    return 0.5 * math.cosh(w)


# ---------------------------------------------------------------- chart maps


def incidence_from_polar(ps: PolarSample) -> IncidenceSample:
    """Incidence parameters relative to the frame axis (origin at the frame point)."""
    w, eta = ps.w, ps.eta
    ce = math.cos(eta)
    # cos(alpha) = cosh(w) sin(eta) on the half cos(eta) > 0; (w, eta) and
    # (w, eta + pi) meet the axis on opposite sides, which flips the sign
    c = math.copysign(1.0, ce) * math.cosh(w) * math.sin(eta)
    if abs(c) >= 1.0 - 1e-15 or abs(ce) <= math.tanh(w):
        raise NonTransversalError("geodesic does not cross the frame axis")
    l = math.atanh(math.tanh(w) / ce)
    return IncidenceSample(l, math.acos(c), OrientedGeodesic.from_frame(ps.frame))


def polar_from_incidence(s: IncidenceSample, frame: Frame = CANONICAL_FRAME) -> PolarSample:
    """Inverse of :func:`incidence_from_polar`; ``s.host`` must be the frame axis."""
    w = math.asinh(abs(math.sinh(s.l)) * math.sin(s.alpha))
    sin_eta = math.cos(s.alpha) / math.cosh(w)
    if s.l == 0.0:
        cos_eta = math.sqrt(max(0.0, 1.0 - sin_eta**2))
    else:
        cos_eta = math.tanh(w) / math.tanh(s.l)
        sin_eta *= math.copysign(1.0, cos_eta)
    return PolarSample(w, math.atan2(sin_eta, cos_eta), frame)


def sigma_signs(chord_left_of_first: bool, chord_left_of_second: bool) -> SigmaSigns:
    """Sign table for the host-to-host partial derivatives."""
    table = {
        (True, True): SigmaSigns(-1, 1),
        (True, False): SigmaSigns(1, 1),
        (False, True): SigmaSigns(-1, -1),
        (False, False): SigmaSigns(1, -1),
    }
    return table[(bool(chord_left_of_first), bool(chord_left_of_second))]


@dataclass(frozen=True)
class HostPairConfig:
    """Chord between two oriented hosts, at parameters ``l1`` and ``l2``."""

    host1: OrientedGeodesic
    host2: OrientedGeodesic
    l1: float
    l2: float

    def points(self):
        return self.host1.point_at(self.l1), self.host2.point_at(self.l2)

    def geometry(self) -> dict:
        P1, P2 = self.points()
        rho = float(hyperboloid_distance(P1, P2))
        if rho < DEGENERATE_SIN:
            raise NonTransversalError("chord length vanishes")
        N = normalize_spacelike(mcross(P2, P1))
        a1 = _cw_angle(self.host1.tangent_at(self.l1), rotate_tangent(P1, N), P1)
        # counter-clockwise angle for the second host
        a2 = math.pi - _cw_angle(self.host2.tangent_at(self.l2), rotate_tangent(P2, N), P2)
        a2 = a2 % math.pi
        if min(math.sin(a1), math.sin(a2)) < DEGENERATE_SIN:
            raise NonTransversalError("chord is tangent to a host")
        left1 = bool(self.host1.side(P2) > 0)
        left2 = bool(self.host2.side(P1) > 0)
        return {"rho": rho, "alpha1": a1, "alpha2": a2, "left1": left1, "left2": left2}


def incidence_partials(cfg: HostPairConfig) -> tuple[float, float]:
    """``(d alpha1 / d l2, d alpha2 / d l1)`` from the sign table."""
    g = cfg.geometry()
    s = sigma_signs(g["left1"], g["left2"])
    sh = math.sinh(g["rho"])
    return s.sigma1 * math.sin(g["alpha2"]) / sh, s.sigma2 * math.sin(g["alpha1"]) / sh


def host_parameters(g: Geodesic, host1: OrientedGeodesic, host2: OrientedGeodesic) -> tuple[float, float]:
    """Crossing parameters of ``g`` on two hosts."""
    return incidence_of(g, host1).l, incidence_of(g, host2).l


# ---------------------------------------------------------------- chart consistency


@dataclass(frozen=True)
class ChartMeasures:
    """Measure of the geodesics crossing two segments, in each chart."""

    endpoint: float
    incidence: float
    polar: float
    crossed_diagonals: float

    def spread(self) -> float:
        v = (self.endpoint, self.incidence, self.polar)
        return max(v) - min(v)


def _pieces(fun, breaks, lo: float, hi: float, tol: float) -> float:
    from scipy.integrate import quad

    pts = sorted({lo, hi, *(b for b in breaks if lo < b < hi)})
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        total += quad(fun, a, b, epsabs=tol, epsrel=tol, limit=200)[0]
    return total


def _check_segments(p1, q1, p2, q2):
    P = [x.hyperboloid() for x in (p1, q1, p2, q2)]
    N1 = mcross(P[1], P[0])
    N2 = mcross(P[3], P[2])
    if float(mdot(N1, P[2])) * float(mdot(N1, P[3])) <= 0.0:
        raise ValueError("the second segment must lie on one side of the first segment's geodesic")
    if float(mdot(N2, P[0])) * float(mdot(N2, P[1])) <= 0.0:
        raise ValueError("the first segment must lie on one side of the second segment's geodesic")
    return P


def chart_measures(p1: PlanePoint, q1: PlanePoint, p2: PlanePoint, q2: PlanePoint,
                   frame: Frame = CANONICAL_FRAME, tol: float = 1e-14) -> ChartMeasures:
    """Liouville measure of the geodesics meeting segments ``[p1, q1]`` and
    ``[p2, q2]``, computed independently in the endpoint, incidence and polar
    charts, plus the crossed-diagonals formula as a reference.

    Each chart integrates an exact inner integral over one coordinate and
    runs adaptive quadrature over the other, split where the inner limits
    swap order.
    """
    P = _check_segments(p1, q1, p2, q2)
    pts = (p1, q1, p2, q2)

    # endpoint chart.  With phi = 1 / (u - v), du dv / (u - v)^2 = du dphi,
    # and the geodesics from u through a point (x, y) sit at
    # phi = (u - x) / ((u - x)^2 + y^2).  u = tan(theta) keeps the range finite.
    def phis(u):
        return [(u - p.x) / ((u - p.x) ** 2 + p.y**2) for p in pts]

    def endpoint_inner(theta):
        u = math.tan(theta)
        f = phis(u)
        lo = max(min(f[0], f[1]), min(f[2], f[3]))
        hi = min(max(f[0], f[1]), max(f[2], f[3]))
        return max(hi - lo, 0.0) / math.cos(theta) ** 2

    breaks = []
    for i in range(4):
        for j in range(i + 1, 4):
            g = geodesic_through(pts[i], pts[j])
            breaks += [math.atan(e.value) if not e.is_infinite else 0.5 * math.pi for e in (g.u, g.v)]
    # each geodesic is counted once from either end
    endpoint = 0.5 * _pieces(endpoint_inner, breaks, -0.5 * math.pi, 0.5 * math.pi, tol)

    # incidence chart on the first segment
    host = OrientedGeodesic.through(p1, q1)
    length1 = float(hyperboloid_distance(P[0], P[1]))

    def incidence_inner(l):
        X = host.point_at(l)
        T = host.tangent_at(l)
        c = []
        for Y in (P[2], P[3]):
            D = normalize_spacelike(Y + mdot(X, Y) * X)
            c.append(math.cos(_cw_angle(T, D, X)))
        return 0.5 * abs(c[0] - c[1])

    incidence = _pieces(incidence_inner, [], 0.0, length1, tol)

    # polar chart: w >= 0, eta in [0, 2 pi); <N, X> vanishes at tanh w = <E, X> / -<O, X>
    axis = OrientedGeodesic.from_frame(frame)
    O, E1 = axis.origin_vector, axis.tangent
    E2 = rotate_tangent(O, E1)
    a = [float(-mdot(O, X)) for X in P]
    b1 = [float(mdot(E1, X)) for X in P]
    b2 = [float(mdot(E2, X)) for X in P]

    def polar_inner(eta):
        t = [(math.cos(eta) * b1[i] + math.sin(eta) * b2[i]) / a[i] for i in range(4)]
        lo = max(min(t[0], t[1]), min(t[2], t[3]), 0.0)
        hi = min(max(t[0], t[1]), max(t[2], t[3]))
        if hi <= lo:
            return 0.0
        # sinh(atanh t) = t / sqrt(1 - t^2)
        return 0.5 * (hi / math.sqrt(1.0 - hi * hi) - lo / math.sqrt(1.0 - lo * lo))

    pbreaks = []
    for i in range(4):
        e0 = math.atan2(-b1[i], b2[i])
        pbreaks += [e0 % TWO_PI, (e0 + math.pi) % TWO_PI]
        for j in range(i + 1, 4):
            # t_i = t_j is linear in (cos eta, sin eta)
            e0 = math.atan2(-(b1[i] / a[i] - b1[j] / a[j]), b2[i] / a[i] - b2[j] / a[j])
            pbreaks += [e0 % TWO_PI, (e0 + math.pi) % TWO_PI]
    polar = _pieces(polar_inner, pbreaks, 0.0, TWO_PI, tol)

    d = lambda i, j: float(hyperboloid_distance(P[i], P[j]))
    # the segments' endpoints in convex position: crossed minus uncrossed pairs
    pairs = sorted([(d(0, 2) + d(1, 3), 0), (d(0, 3) + d(1, 2), 1)])
    crossed = 0.5 * (pairs[1][0] - pairs[0][0])
    return ChartMeasures(endpoint, incidence, polar, crossed)


def _stencil(f, h: float):
    # five-point central difference
    return (8.0 * (f(h) - f(-h)) - (f(2 * h) - f(-2 * h))) / (12.0 * h)


def polar_incidence_jacobian(ps: PolarSample, h: float = 1e-5) -> float:
    """Finite-difference ``|d(l, alpha)/d(w, eta)| * 1/2 sin alpha - 1/2 cosh w``."""
    def f(w, eta):
        s = incidence_from_polar(PolarSample(w, eta, ps.frame))
        return np.array([s.l, s.alpha])

    # near-tangent crossings vary fast; shrink the step with sin(alpha)
    h *= min(1.0, math.sin(incidence_from_polar(ps).alpha))
    dw = _stencil(lambda t: f(ps.w + t, ps.eta), h)
    de = _stencil(lambda t: f(ps.w, ps.eta + t), h)
    jac = abs(dw[0] * de[1] - dw[1] * de[0])
    alpha = incidence_from_polar(ps).alpha
    return jac * incidence_density(alpha) - polar_density(ps.w)


def incidence_endpoint_jacobian(s: IncidenceSample, h: float = 1e-5) -> float:
    """Finite-difference ``|d(u, v)/d(l, alpha)| / (u - v)^2 - 1/2 sin alpha``."""
    def f(l, alpha):
        g = geodesic_from_incidence(IncidenceSample(l, alpha, s.host))
        return np.array([g.u.value, g.v.value])

    base = f(s.l, s.alpha)
    def aligned(x):
        # endpoints come back unordered; match them to the base pair
        return x if np.sum(np.abs(x - base)) <= np.sum(np.abs(x[::-1] - base)) else x[::-1]

    dl = _stencil(lambda t: aligned(f(s.l + t, s.alpha)), h)
    da = _stencil(lambda t: aligned(f(s.l, s.alpha + t)), h)
    jac = abs(dl[0] * da[1] - dl[1] * da[0])
    return jac * endpoint_density(*base) - incidence_density(s.alpha)
