"""
Convex geodesic polygons, their chords, and inscribed refinements.

Edges are oriented counter-clockwise so that the polygon lies on their left.
Each edge carries an arclength parameter ``l``: compact edges start at their
first vertex (``l`` in ``[0, |a|]``); an edge with an ideal endpoint takes as
origin the foot of the perpendicular from the polygon's reference center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .geodesics import (
    DEGENERATE_SIN,
    BoundaryPoint,
    Geodesic,
    intersection,
)
from .hplane import (
    CANONICAL_FRAME,
    Frame,
    Isometry,
    PlanePoint,
    PolarCoord,
    distance,
    hyperboloid_distance,
    mcross,
    mdot,
    normalize_spacelike,
    normalize_timelike,
    polar_to_cartesian,
    to_plane_point,
)

CONVEXITY_TOL = 1e-9


class DegenerateChordError(ValueError):
    """Geodesic meets the polygon only at a vertex, along an edge, or tangentially."""


class PolygonError(ValueError):
    pass


@dataclass(frozen=True)
class Vertex:
    point: Optional[PlanePoint] = None
    ideal: Optional[BoundaryPoint] = None

    def __post_init__(self):
        if (self.point is None) == (self.ideal is None):
            raise ValueError("vertex must be exactly one of interior or ideal")

    @classmethod
    def interior(cls, x: float, y: float) -> "Vertex":
        return cls(point=PlanePoint(x, y))

    @classmethod
    def at_infinity(cls, u) -> "Vertex":
        return cls(ideal=BoundaryPoint.parse(u) if not isinstance(u, BoundaryPoint) else u)

    @property
    def is_ideal(self) -> bool:
        return self.ideal is not None

    def vector(self) -> np.ndarray:
        if self.point is not None:
            return self.point.hyperboloid()
        L = self.ideal.lightlike()
        return L / L[0]

    def transformed(self, g: Isometry) -> "Vertex":
        if self.point is not None:
            return Vertex(point=g.apply(self.point))
        return Vertex(ideal=self.ideal.transformed(g))

    def to_json(self) -> dict:
        if self.point is not None:
            return {"kind": "interior", "x": self.point.x, "y": self.point.y}
        v = self.ideal.value
        return {"kind": "ideal", "u": "inf" if math.isinf(v) else v}


class Edge:
    """Geodesic segment from ``start`` to ``end`` with an arclength chart."""

    def __init__(self, start: Vertex, end: Vertex, center: np.ndarray):
        self.start, self.end = start, end
        A, B = start.vector(), end.vector()
        self.normal = normalize_spacelike(mcross(B, A))
        if start.is_ideal or end.is_ideal:
            O = normalize_timelike(center - mdot(center, self.normal) * self.normal)
        else:
            O = A
        T = mcross(O, self.normal)
        self.origin, self.tangent = O, T
        self.lo = -math.inf if start.is_ideal else float(np.arcsinh(mdot(A, T)))
        self.hi = math.inf if end.is_ideal else float(np.arcsinh(mdot(B, T)))
        if not start.is_ideal and O is A:
            self.lo = 0.0

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def is_compact(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def point_at(self, l):
        l = np.asarray(l, dtype=float)
        return np.cosh(l)[..., None] * self.origin + np.sinh(l)[..., None] * self.tangent

    def tangent_at(self, l):
        l = np.asarray(l, dtype=float)
        return np.sinh(l)[..., None] * self.origin + np.cosh(l)[..., None] * self.tangent

    def parameter_of(self, X):
        return np.arcsinh(mdot(X, self.tangent))


@dataclass(frozen=True)
class ChordEnd:
    edge: int
    l: float
    alpha: float


@dataclass(frozen=True)
class Chord:
    """Chord of a geodesic in a polygon.

    ``entry`` lies on the higher-indexed edge ``j`` and ``exit`` on edge
    ``k < j``; the angles satisfy ``d rho / d l_j = cos(alpha_j)`` and
    ``d rho / d l_k = -cos(alpha_k)``.
    """

    geodesic: Geodesic
    entry: ChordEnd
    exit: ChordEnd
    rho: float
    entry_point: PlanePoint
    exit_point: PlanePoint

    @property
    def pair(self) -> tuple[int, int]:
        return self.entry.edge, self.exit.edge


class GeodesicPolygon:
    """Convex polygon with interior and/or ideal vertices, listed counter-clockwise."""

    def __init__(self, vertices: Sequence[Vertex]):
        vertices = list(vertices)
        if len(vertices) < 3:
            raise PolygonError("a polygon needs at least 3 vertices")
        self.vertices = tuple(vertices)
        V = np.array([v.vector() for v in vertices])
        n = len(V)
        for i in range(n):
            j = (i + 1) % n
            if np.max(np.abs(V[i] - V[j])) < 1e-14 * max(1.0, V[i][0]):
                raise PolygonError(f"vertices {i} and {j} coincide")
        self._V = V
        self._check_convex()
        self.center = self._reference_center()
        self.edges = tuple(Edge(vertices[i], vertices[(i + 1) % n], self.center) for i in range(n))

    def _check_convex(self):
        V, n = self._V, len(self._V)
        worst_left, worst_right = 0.0, 0.0
        for i in range(n):
            N = normalize_spacelike(mcross(V[(i + 1) % n], V[i]))
            s = mdot(V, N) / V[:, 0]
            others = np.delete(s, [i, (i + 1) % n])
            worst_left = min(worst_left, float(others.min()))
            worst_right = max(worst_right, float(others.max()))
        if worst_left < -CONVEXITY_TOL:
            if worst_right <= CONVEXITY_TOL:
                raise PolygonError("vertices are in clockwise order; reverse the vertex list")
            raise PolygonError("polygon is not convex")

    def _reference_center(self) -> np.ndarray:
        k = self._V[:, 1:] / self._V[:, :1]
        c = k.mean(axis=0)
        return np.array([1.0, c[0], c[1]]) / math.sqrt(1.0 - c @ c)

    # ------------------------------------------------------------ basics

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def is_compact(self) -> bool:
        return not any(v.is_ideal for v in self.vertices)

    @property
    def is_ideal(self) -> bool:
        return all(v.is_ideal for v in self.vertices)

    def edge_lengths(self) -> list[float]:
        return [e.length for e in self.edges]

    def perimeter(self) -> float:
        return float(sum(self.edge_lengths()))

    def interior_angles(self) -> np.ndarray:
        out = np.empty(self.n)
        for i in range(self.n):
            c = float(mdot(self.edges[i - 1].normal, self.edges[i].normal))
            out[i] = math.pi - math.acos(min(1.0, max(-1.0, c)))
        return out

    def area(self) -> float:
        return (self.n - 2) * math.pi - float(self.interior_angles().sum())

    def transformed(self, g: Isometry) -> "GeodesicPolygon":
        return GeodesicPolygon([v.transformed(g) for v in self.vertices])

    def vertex_points(self) -> list[PlanePoint]:
        if not self.is_compact:
            raise PolygonError("polygon has ideal vertices")
        return [v.point for v in self.vertices]

    def to_json(self) -> dict:
        return {"vertices": [v.to_json() for v in self.vertices]}

    @classmethod
    def from_points(cls, points: Sequence[PlanePoint]) -> "GeodesicPolygon":
        return cls([Vertex(point=p) for p in points])

    @classmethod
    def ideal(cls, *us) -> "GeodesicPolygon":
        return cls([Vertex.at_infinity(u) for u in us])

    @classmethod
    def from_json(cls, obj) -> "GeodesicPolygon":
        """Inverse of :meth:`to_json`; errors name the offending vertex."""
        if not isinstance(obj, dict) or not isinstance(obj.get("vertices"), list):
            raise PolygonError('expected an object with a "vertices" list')
        verts = []
        for i, v in enumerate(obj["vertices"]):
            try:
                if not isinstance(v, dict):
                    raise ValueError("not an object")
                kind = v.get("kind")
                if kind == "interior":
                    x, y = v["x"], v["y"]
                    if isinstance(x, bool) or isinstance(y, bool) or not all(isinstance(c, (int, float)) for c in (x, y)):
                        raise ValueError('"x" and "y" must be numbers')
                    verts.append(Vertex.interior(float(x), float(y)))
                elif kind == "ideal":
                    u = v["u"]
                    if isinstance(u, bool) or not isinstance(u, (int, float, str)):
                        raise ValueError('"u" must be a number or "inf"')
                    verts.append(Vertex.at_infinity(u))
                else:
                    raise ValueError(f'unknown kind {kind!r}; use "interior" or "ideal"')
            except (KeyError, ValueError, TypeError) as exc:
                msg = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
                raise PolygonError(f"vertex {i}: {msg}") from None
        return cls(verts)

    def contains(self, p: PlanePoint) -> bool:
        X = p.hyperboloid()
        return all(mdot(X, e.normal) >= 0.0 for e in self.edges)

    def pairs(self) -> list[tuple[int, int]]:
        return [(j, k) for j in range(self.n) for k in range(j)]

    def adjacent(self, j: int, k: int) -> bool:
        return (j - k) % self.n in (1, self.n - 1)

    def __repr__(self):
        return f"GeodesicPolygon({[v.to_json() for v in self.vertices]})"


# ---------------------------------------------------------------- edge-pair chart


def _shared_ideal(poly: GeodesicPolygon, j: int, k: int):
    """Which lightlike ends of edges j > k are the same ideal vertex, as (s_j, s_k)."""
    n = poly.n
    if j == k + 1 and poly.vertices[j].is_ideal:
        return -1, 1
    if j == n - 1 and k == 0 and poly.vertices[0].is_ideal:
        return 1, -1
    return None


def _pair_chart_lightlike(poly: GeodesicPolygon, j: int, k: int, lj, lk):
    """Inner products for pairs with an ideal edge.

    Points are expanded in the lightlike frame ``O +- T`` of each edge, so
    ``cosh rho`` is a sum of nonnegative terms and products involving a shared
    ideal vertex are exactly zero instead of rounding noise times ``e^l``.
    """
    ej, ek = poly.edges[j], poly.edges[k]
    Lj = {1: ej.origin + ej.tangent, -1: ej.origin - ej.tangent}
    Lk = {1: ek.origin + ek.tangent, -1: ek.origin - ek.tangent}
    G = {(s, t): float(mdot(Lj[s], Lk[t])) for s in (1, -1) for t in (1, -1)}
    Nj_Lk = {t: float(mdot(ej.normal, Lk[t])) for t in (1, -1)}
    Nk_Lj = {s: float(mdot(ek.normal, Lj[s])) for s in (1, -1)}
    shared = _shared_ideal(poly, j, k)
    if shared is not None:
        sj, sk = shared
        G[(sj, sk)] = 0.0
        Nj_Lk[sk] = 0.0
        Nk_Lj[sj] = 0.0
    ea, eb = np.exp(lj), np.exp(lk)
    ia, ib = 1.0 / ea, 1.0 / eb
    t_pp, t_pm = ea * eb * G[(1, 1)], ea * ib * G[(1, -1)]
    t_mp, t_mm = ia * eb * G[(-1, 1)], ia * ib * G[(-1, -1)]
    cosh_rho = -0.25 * (t_pp + t_pm + t_mp + t_mm)
    tj_q = 0.25 * (t_pp + t_pm - t_mp - t_mm)
    p_tk = 0.25 * (t_pp - t_pm + t_mp - t_mm)
    nj_q = 0.5 * (eb * Nj_Lk[1] + ib * Nj_Lk[-1])
    nk_p = 0.5 * (ea * Nk_Lj[1] + ia * Nk_Lj[-1])
    cosh_rho = np.maximum(cosh_rho, 1.0)
    rho = np.arccosh(cosh_rho)
    return rho, tj_q, p_tk, nj_q, nk_p


def pair_chart(poly: GeodesicPolygon, j: int, k: int, lj, lk) -> dict:
    """Chord data for the chords joining ``l_j`` on edge ``j`` to ``l_k`` on edge ``k``.

    Vectorized over ``lj``/``lk``.  Returns ``rho``, ``cos_j``, ``cos_k``,
    ``sin_j``, ``sin_k`` and the Liouville ``density`` in ``dl_j dl_k``.
    """
    ej, ek = poly.edges[j], poly.edges[k]
    lj = np.asarray(lj, dtype=float)
    lk = np.asarray(lk, dtype=float)
    if ej.is_compact and ek.is_compact:
        # difference vector keeps full accuracy for short chords near corners
        P = ej.point_at(lj)
        Q = ek.point_at(lk)
        D = Q - P
        rho = 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(mdot(D, D), 0.0)))
        tj_d = mdot(ej.tangent_at(lj), D)
        tk_d = mdot(ek.tangent_at(lk), D)
        nj_d = mdot(ej.normal, D)
        nk_d = mdot(ek.normal, D)
    else:
        rho, tj_d, p_tk, nj_d, nk_p = _pair_chart_lightlike(poly, j, k, lj, lk)
        tk_d, nk_d = -p_tk, -nk_p
    sh = np.sinh(rho)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        cos_tj = tj_d / sh
        cos_tk = -tk_d / sh
        sin_j = np.abs(nj_d) / sh
        sin_k = np.abs(nk_d) / sh
        density = np.minimum(sin_j, 1.0) * np.minimum(sin_k, 1.0) / (2.0 * sh)
    return {
        "rho": rho,
        "cos_j": -np.clip(cos_tj, -1.0, 1.0),
        "cos_k": np.clip(cos_tk, -1.0, 1.0),
        "sin_j": np.clip(sin_j, 0.0, 1.0),
        "sin_k": np.clip(sin_k, 0.0, 1.0),
        "density": density,
    }


def chord_from_edge_points(poly: GeodesicPolygon, j: int, l_j: float, k: int, l_k: float) -> Chord:
    if j == k:
        raise ValueError("chord endpoints must lie on different edges")
    if j < k:
        j, l_j, k, l_k = k, l_k, j, l_j
    for idx, l in ((j, l_j), (k, l_k)):
        e = poly.edges[idx]
        if not (e.lo - 1e-12 <= l <= e.hi + 1e-12):
            raise ValueError(f"parameter {l} outside edge {idx}")
    P = poly.edges[j].point_at(l_j)
    Q = poly.edges[k].point_at(l_k)
    rho = float(hyperboloid_distance(P, Q))
    if rho < DEGENERATE_SIN:
        raise DegenerateChordError("edge points coincide")
    g = pair_chart(poly, j, k, l_j, l_k)
    sj, sk = float(g["sin_j"]), float(g["sin_k"])
    if min(sj, sk) < DEGENERATE_SIN:
        raise DegenerateChordError("chord runs along an edge")
    alpha_j = math.atan2(sj, float(g["cos_j"]))
    alpha_k = math.atan2(sk, float(g["cos_k"]))
    return Chord(
        geodesic=Geodesic.from_normal(mcross(Q, P)),
        entry=ChordEnd(j, float(l_j), alpha_j),
        exit=ChordEnd(k, float(l_k), alpha_k),
        rho=rho,
        entry_point=to_plane_point(P),
        exit_point=to_plane_point(Q),
    )


def chord_of(poly: GeodesicPolygon, g: Geodesic, tol: float = 1e-10) -> Optional[Chord]:
    """The chord of ``g`` in ``poly``; ``None`` when ``g`` misses the polygon.

    Raises :class:`DegenerateChordError` for vertex hits and tangencies.
    """
    N = g.normal()
    for v in poly.vertices:
        if v.is_ideal and (abs(v.ideal.a * g.u.b - g.u.a * v.ideal.b) < tol
                           or abs(v.ideal.a * g.v.b - g.v.a * v.ideal.b) < tol):
            raise DegenerateChordError("geodesic ends at an ideal vertex")
    hits = []
    for idx, e in enumerate(poly.edges):
        if min(np.max(np.abs(N - e.normal)), np.max(np.abs(N + e.normal))) < tol:
            raise DegenerateChordError("geodesic contains an edge")
        X = intersection(N, e.normal)
        if X is None:
            continue
        l = float(e.parameter_of(X))
        if l < e.lo - tol or l > e.hi + tol:
            continue
        if min(abs(l - e.lo), abs(l - e.hi)) <= tol:
            raise DegenerateChordError(f"geodesic passes through a vertex of edge {idx}")
        hits.append((idx, l))
    if not hits:
        return None
    if len(hits) != 2:
        raise DegenerateChordError("geodesic touches the polygon without a proper chord")
    (a, la), (b, lb) = hits
    return chord_from_edge_points(poly, a, la, b, lb)


def chord_transformed(chord: Chord, g: Isometry) -> tuple[Geodesic, float, float, float]:
    return chord.geodesic.transformed(g), chord.rho, chord.entry.alpha, chord.exit.alpha


# ---------------------------------------------------------------- smooth domains


class SmoothDomain:
    """Convex domain with C^1 boundary given by an arclength parametrization."""

    def __init__(self, boundary: Callable[[float], PlanePoint], length: float, n_check: int = 64):
        self.boundary = boundary
        self.length = float(length)
        pts = [boundary(self.length * i / n_check) for i in range(n_check)]
        try:
            GeodesicPolygon.from_points(pts)
        except PolygonError as exc:
            raise PolygonError(f"boundary is not convex and counter-clockwise: {exc}") from exc

    @classmethod
    def disk(cls, r: float, frame: Frame = CANONICAL_FRAME) -> "SmoothDomain":
        circ = 2.0 * math.pi * math.sinh(r)
        dom = cls(lambda s: polar_to_cartesian(PolarCoord(r, 2.0 * math.pi * s / circ), frame), circ)
        dom.radius = r
        return dom

    def point(self, s: float) -> PlanePoint:
        return self.boundary(s % self.length)

    def locate(self, p: PlanePoint, tol: float = 1e-8) -> float:
        """Boundary parameter of ``p``; raises if ``p`` is off the boundary."""
        m = 256
        grid = [self.length * i / m for i in range(m)]
        d = [distance(self.boundary(s), p) for s in grid]
        i = int(np.argmin(d))
        h = self.length / m
        res = minimize_scalar(lambda s: distance(self.point(s), p), bounds=(grid[i] - h, grid[i] + h),
                              method="bounded", options={"xatol": 1e-13})
        if res.fun > tol:
            raise PolygonError("vertex does not lie on the domain boundary")
        return float(res.x % self.length)

    def inscribed(self, n: int, offset: float = 0.0) -> GeodesicPolygon:
        return GeodesicPolygon.from_points([self.point(offset + self.length * i / n) for i in range(n)])


def inscribe_regular_polygon(r: float, n: int, frame: Frame = CANONICAL_FRAME) -> GeodesicPolygon:
    if n < 3 or r <= 0.0:
        raise ValueError("need n >= 3 and r > 0")
    return GeodesicPolygon.from_points(
        [polar_to_cartesian(PolarCoord(r, 2.0 * math.pi * i / n), frame) for i in range(n)]
    )


def refine(poly: GeodesicPolygon, dom: SmoothDomain) -> GeodesicPolygon:
    """Insert the boundary midpoint of every arc between consecutive vertices."""
    s = [dom.locate(p) for p in poly.vertex_points()]
    L = dom.length
    pts = []
    for i, si in enumerate(s):
        gap = (s[(i + 1) % len(s)] - si) % L
        pts.append(poly.vertices[i].point)
        pts.append(dom.point(si + 0.5 * gap))
    return GeodesicPolygon.from_points(pts)
