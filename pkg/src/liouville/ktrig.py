"""
Constant curvature K: generalized sine, trigonometric rules, the chord
identity and the isoperimetric inequality.

Measures on the space of geodesics of the model surface ``X_K`` are
normalized with constant 1 here (``sin(alpha) dl dalpha``), twice the
hyperbolic convention used elsewhere in the package.  Negative curvature is
reduced to the ``K = -1`` core by scaling lengths with ``s = sqrt(-K)``;
``K = 0`` uses Euclidean chords directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import root

from .domains import GeodesicPolygon
from .hplane import CANONICAL_FRAME, Frame, PolarCoord, polar_to_cartesian
from .identities import Estimate, IdentityReport, IntegratorConfig, TestFunction, ap_identity

#: measure normalization here relative to the hyperbolic core
NORMALIZATION_RATIO = 2.0

K_BOUND = 1e6


@dataclass(frozen=True)
class Curvature:
    K: float

    def __post_init__(self):
        if not math.isfinite(self.K) or abs(self.K) > K_BOUND:
            raise ValueError(f"curvature must be finite with |K| <= {K_BOUND:g}")

    @property
    def scale(self) -> float:
        """``sqrt(|K|)``."""
        return math.sqrt(abs(self.K))


KLike = Union[float, Curvature]


def _K(K: KLike) -> float:
    return (K if isinstance(K, Curvature) else Curvature(float(K))).K


def _out(x, like):
    return float(x) if np.ndim(like) == 0 else x


def sin_k(K: KLike, x):
    """Solution of ``u'' + K u = 0`` with ``u(0) = 0``, ``u'(0) = 1``."""
    K = _K(K)
    xa = np.asarray(x, dtype=float)
    if K == 0.0:
        return _out(xa.copy(), x)
    s = math.sqrt(abs(K))
    y = np.sin(s * xa) / s if K > 0.0 else np.sinh(s * xa) / s
    return _out(y, x)


def cos_k(K: KLike, x):
    """Derivative of :func:`sin_k` in ``x``."""
    K = _K(K)
    xa = np.asarray(x, dtype=float)
    if K == 0.0:
        return _out(np.ones_like(xa), x)
    s = math.sqrt(abs(K))
    y = np.cos(s * xa) if K > 0.0 else np.cosh(s * xa)
    return _out(y, x)


def sin_k_series(K: KLike, x, terms: int = 20):
    """Power series ``x - K x^3/3! + K^2 x^5/5! - ...`` truncated after ``terms`` terms."""
    K = _K(K)
    xa = np.asarray(x, dtype=float)
    term = xa.copy()
    total = xa.copy()
    for n in range(1, terms):
        term = term * (-K) * xa * xa / ((2 * n) * (2 * n + 1))
        total = total + term
    return _out(total, x)


def acos_k(K: KLike, c: float) -> float:
    """Length ``x >= 0`` with ``cos_k(K, x) = c``."""
    K = _K(K)
    if K == 0.0:
        raise ValueError("cos_k is constant for K = 0")
    s = math.sqrt(abs(K))
    if K > 0.0:
        if abs(c) > 1.0 + 1e-12:
            raise ValueError("no length with this cosine at K > 0")
        return math.acos(max(-1.0, min(1.0, c))) / s
    if c < 1.0 - 1e-12:
        raise ValueError("no length with this cosine at K < 0")
    return math.acosh(max(1.0, c)) / s


def continuity_gap(K: KLike, x: float) -> tuple[float, float]:
    """``|sin_k(K, x) - x|`` and the cubic bound ``|K| |x|^3 / 6``."""
    K = _K(K)
    return abs(sin_k(K, x) - x), abs(K) * abs(x) ** 3 / 6.0


# ---------------------------------------------------------------- triangles


def k_cosine_rule(K: KLike, B: float, C: float, a: float) -> float:
    """Angle ``A`` from ``cos A = -cos B cos C + sin B sin C cos_k(a)``."""
    c = -math.cos(B) * math.cos(C) + math.sin(B) * math.sin(C) * cos_k(K, a)
    if abs(c) > 1.0 + 1e-12:
        raise ValueError(f"no triangle: cos A = {c:.6g} is outside [-1, 1]")
    return math.acos(max(-1.0, min(1.0, c)))


@dataclass(frozen=True)
class KTriangle:
    """Triangle in ``X_K``; side ``a`` is opposite angle ``A``."""

    K: float
    A: float
    B: float
    C: float
    a: float
    b: float
    c: float

    def __post_init__(self):
        _K(self.K)
        if min(self.A, self.B, self.C) <= 0.0 or max(self.A, self.B, self.C) >= math.pi:
            raise ValueError("angles must lie in (0, pi)")
        if min(self.a, self.b, self.c) <= 0.0:
            raise ValueError("sides must be positive")
        if self.K > 0.0 and max(self.a, self.b, self.c) >= math.pi / math.sqrt(self.K):
            raise ValueError("sides must be shorter than pi / sqrt(K)")

    @classmethod
    def from_angles(cls, K: KLike, A: float, B: float, C: float) -> "KTriangle":
        K = _K(K)
        sides = []
        for X, Y, Z in ((A, B, C), (B, C, A), (C, A, B)):
            sides.append(acos_k(K, (math.cos(X) + math.cos(Y) * math.cos(Z)) / (math.sin(Y) * math.sin(Z))))
        return cls(K, A, B, C, *sides)

    @classmethod
    def from_sides(cls, K: KLike, a: float, b: float, c: float) -> "KTriangle":
        """Angles by solving the three angle cosine rules for the given sides."""
        K = _K(K)
        if not (a < b + c and b < a + c and c < a + b):
            raise ValueError("sides violate the triangle inequality")

        def eq(ang):
            A, B, C = ang
            return [math.cos(A) + math.cos(B) * math.cos(C) - math.sin(B) * math.sin(C) * cos_k(K, a),
                    math.cos(B) + math.cos(C) * math.cos(A) - math.sin(C) * math.sin(A) * cos_k(K, b),
                    math.cos(C) + math.cos(A) * math.cos(B) - math.sin(A) * math.sin(B) * cos_k(K, c)]

        A0 = math.acos((b * b + c * c - a * a) / (2 * b * c))
        B0 = math.acos((a * a + c * c - b * b) / (2 * a * c))
        if K == 0.0:
            # the angle rules only say A + B + C = pi here; the flat law of cosines decides
            return cls(K, A0, B0, math.pi - A0 - B0, a, b, c)
        sol = root(eq, [A0, B0, math.pi - A0 - B0], method="hybr", tol=1e-15)
        if max(abs(r) for r in sol.fun) > 1e-12 or not all(0.0 < x < math.pi for x in sol.x):
            raise ValueError("no triangle with these sides at this curvature")
        return cls(K, *(float(x) for x in sol.x), a, b, c)

    def sine_rule_residual(self) -> float:
        r = [math.sin(X) / sin_k(self.K, x) for X, x in ((self.A, self.a), (self.B, self.b), (self.C, self.c))]
        return max(r) - min(r)

    def cosine_rule_residual(self) -> float:
        A, B, C = self.A, self.B, self.C
        return max(abs(k_cosine_rule(self.K, Y, Z, x) - X)
                   for X, Y, Z, x in ((A, B, C, self.a), (B, C, A, self.b), (C, A, B, self.c)))


# ---------------------------------------------------------------- Euclidean polygons


class EuclideanPolygon:
    """Convex polygon in the Euclidean plane, vertices counter-clockwise."""

    def __init__(self, vertices: Sequence[Sequence[float]]):
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != 2 or len(V) < 3:
            raise ValueError("need at least three (x, y) vertices")
        E = np.roll(V, -1, axis=0) - V
        if np.any(np.hypot(E[:, 0], E[:, 1]) == 0.0):
            raise ValueError("coincident consecutive vertices")
        turn = E[:, 0] * np.roll(E, -1, axis=0)[:, 1] - E[:, 1] * np.roll(E, -1, axis=0)[:, 0]
        if np.any(turn <= 0.0):
            i = int(np.argmin(turn))
            hint = "; reverse the vertex list" if np.all(turn < 0.0) else ""
            raise ValueError(f"polygon is not strictly convex and counter-clockwise at vertex {(i + 1) % len(V)}{hint}")
        self.vertices = V
        self.n = len(V)
        self.lengths = np.hypot(E[:, 0], E[:, 1])
        self.tangents = E / self.lengths[:, None]

    def perimeter(self) -> float:
        return float(self.lengths.sum())

    def area(self) -> float:
        x, y = self.vertices.T
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def pairs(self):
        return [(j, k) for j in range(self.n) for k in range(j)]

    @classmethod
    def regular(cls, n: int, radius: float = 1.0, phase: float = 0.0) -> "EuclideanPolygon":
        t = phase + 2.0 * math.pi * np.arange(n) / n
        return cls(np.column_stack([radius * np.cos(t), radius * np.sin(t)]))


def _euclidean_pair_integral(poly: EuclideanPolygon, j: int, k: int, kernel, order: int) -> float:
    """``int int kernel(rho, cos_j, cos_k, sin_j, sin_k) dl_j dl_k`` over one edge pair.

    With ``d`` the unit chord direction from edge j, ``cos_j = -d.t_j`` and
    ``cos_k = -d.t_k``, so the chord length changes at rates ``cos_j`` along
    edge j and ``-cos_k`` along edge k.
    Pairs sharing a vertex use a Duffy split about it.
    """
    x, w = leggauss(order)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    tj, tk = poly.tangents[j], poly.tangents[k]
    aj, ak = poly.lengths[j], poly.lengths[k]
    vj, vk = poly.vertices[j], poly.vertices[k]

    def F(lj, lk):
        A = vj + lj[..., None] * tj
        B = vk + lk[..., None] * tk
        D = B - A
        rho = np.hypot(D[..., 0], D[..., 1])
        d = D / rho[..., None]
        cj = -(d @ tj)
        ck = -(d @ tk)
        sj = np.abs(d[..., 0] * tj[1] - d[..., 1] * tj[0])
        sk = np.abs(d[..., 0] * tk[1] - d[..., 1] * tk[0])
        return kernel(rho, cj, ck, sj, sk)

    S, T = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w)
    n = poly.n
    if j == k + 1 or (j == n - 1 and k == 0):
        # distances from the shared vertex along each edge
        if j == k + 1:
            to_j = lambda s: s * aj
            to_k = lambda s: ak - s * ak
        else:
            to_j = lambda s: aj - s * aj
            to_k = lambda s: s * ak
        total = 0.0
        for X, Y in ((S, S * T), (S * T, S)):
            total += float(np.sum(W * S * F(to_j(X), to_k(Y)))) * aj * ak
        return total
    return float(np.sum(W * F(S * aj, T * ak))) * aj * ak


def _gauss(f, a: float, b: float, order: int = 64) -> float:
    x, w = leggauss(order)
    return 0.5 * (b - a) * float(w @ f(0.5 * (b - a) * x + 0.5 * (a + b)))


def euclidean_ap_identity(poly: EuclideanPolygon, tf: TestFunction, order: int = 64,
                          tolerance: float = 1e-6) -> IdentityReport:
    """Both sides of the flat chord identity with ``dmu = sin(alpha) dl dalpha``."""
    lhs_k = lambda rho, cj, ck, sj, sk: tf.f(rho) * sj * sk / rho
    rhs_k = lambda rho, cj, ck, sj, sk: tf.f_prime(rho) * cj * ck
    lhs = sum(_euclidean_pair_integral(poly, j, k, lhs_k, order) for j, k in poly.pairs())
    inner = sum(_euclidean_pair_integral(poly, j, k, rhs_k, order) for j, k in poly.pairs())
    boundary = sum(_gauss(tf.f, 0.0, L) for L in poly.lengths)
    return IdentityReport(f"ap_K0[{tf.label}]", Estimate(lhs, 0.0, order * order, "quad"),
                          Estimate(inner + boundary, 0.0, order * order, "quad"), tolerance)


def rescaled(tf: TestFunction, s: float) -> TestFunction:
    """``g(r) = f(r / s)``: a length function on the ``K = -1`` core."""
    return TestFunction(lambda r: tf.f(np.asarray(r) / s), lambda r: tf.f_prime(np.asarray(r) / s) / s,
                        f"{tf.label}/{s:g}")


def general_ap_identity(K: KLike, poly, tf: TestFunction, cfg: IntegratorConfig = IntegratorConfig(),
                        tolerance: float = 1e-6) -> IdentityReport:
    """Both sides of the chord identity in ``X_K`` (measure constant 1).

    ``K < 0``: ``poly`` is a :class:`GeodesicPolygon` of the hyperbolic core;
    its ``X_K`` lengths are the core lengths divided by ``s = sqrt(-K)``, and
    both sides are ``2 / s`` times the core sides for ``f(. / s)``.
    ``K = 0``: ``poly`` is a :class:`EuclideanPolygon`.
    """
    K = _K(K)
    if K > 0.0:
        raise NotImplementedError("chord integration on the sphere is not supported")
    if K == 0.0:
        if not isinstance(poly, EuclideanPolygon):
            raise TypeError("K = 0 needs a EuclideanPolygon")
        return euclidean_ap_identity(poly, tf, tolerance=tolerance)
    if not isinstance(poly, GeodesicPolygon):
        raise TypeError("K < 0 needs a GeodesicPolygon of the hyperbolic core")
    s = math.sqrt(-K)
    core = ap_identity(poly, rescaled(tf, s), cfg, "quad", tolerance=math.inf)
    c = NORMALIZATION_RATIO / s

    def scale(e: Estimate) -> Estimate:
        return Estimate(c * e.value, c * e.std_error, e.n, e.method)

    return IdentityReport(f"ap_K[{tf.label}]", scale(core.lhs), scale(core.rhs), tolerance)


def embed(poly: EuclideanPolygon, K: KLike, frame: Frame = CANONICAL_FRAME) -> GeodesicPolygon:
    """Hyperbolic core polygon whose ``X_K`` copy has the vertices of ``poly``
    in geodesic polar coordinates about ``frame``."""
    K = _K(K)
    if K >= 0.0:
        raise ValueError("embedding needs K < 0")
    s = math.sqrt(-K)
    pts = [polar_to_cartesian(PolarCoord(s * math.hypot(x, y), math.atan2(y, x)), frame) for x, y in poly.vertices]
    return GeodesicPolygon.from_points(pts)


# ---------------------------------------------------------------- isoperimetric


def general_defect(K: KLike, L: float, A: float) -> float:
    """``L^2 - 4 pi A + K A^2``; nonnegative for convex domains of ``X_K``."""
    return L * L - 4.0 * math.pi * A + _K(K) * A * A


def k_disk(K: KLike, r: float) -> tuple[float, float]:
    """Perimeter and area of the disk of radius ``r`` in ``X_K``."""
    K = _K(K)
    L = 2.0 * math.pi * sin_k(K, r)
    if K == 0.0:
        return L, math.pi * r * r
    if K > 0.0:
        s = math.sqrt(K)
        # 2 pi (1 - cos(s r)) / K without cancellation
        return L, 4.0 * math.pi * math.sin(0.5 * s * r) ** 2 / K
    s = math.sqrt(-K)
    return L, 4.0 * math.pi * math.sinh(0.5 * s * r) ** 2 / -K


def general_isoperimetric(K: KLike, domain) -> float:
    """Isoperimetric defect of a convex domain of ``X_K``.

    ``domain`` is a radius (a disk), a :class:`EuclideanPolygon` for ``K = 0``
    or a core :class:`GeodesicPolygon` for ``K < 0``.
    """
    K = _K(K)
    if isinstance(domain, (int, float)):
        return general_defect(K, *k_disk(K, float(domain)))
    if isinstance(domain, EuclideanPolygon):
        if K != 0.0:
            raise ValueError("a Euclidean polygon needs K = 0")
        return general_defect(K, domain.perimeter(), domain.area())
    if isinstance(domain, GeodesicPolygon):
        if K >= 0.0:
            raise ValueError("a core polygon needs K < 0")
        s = math.sqrt(-K)
        return general_defect(K, domain.perimeter() / s, domain.area() / (s * s))
    raise TypeError(f"unsupported domain {type(domain).__name__}")
