"""
Points, charts and isometries of the hyperbolic plane.

The upper half-plane is the user-facing model.  Internally most geometry is
done on the hyperboloid ``-X0^2 + X1^2 + X2^2 = -1`` where geodesics are
planes through the origin; the helpers at the bottom of this module convert
between the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PlanePoint:
    """Interior point ``x + iy`` of the upper half-plane."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)) or self.y <= 0.0:
            raise ValueError(f"PlanePoint needs finite x and y > 0, got ({self.x}, {self.y})")

    @classmethod
    def from_complex(cls, z: complex) -> "PlanePoint":
        return cls(float(z.real), float(z.imag))

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    def hyperboloid(self) -> np.ndarray:
        return uhp_to_hyperboloid(self.x, self.y)


@dataclass(frozen=True)
class DiskPoint:
    """Poincare disk point in Euclidean polar form."""

    bigR: float
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.bigR < 1.0:
            raise ValueError(f"disk radius must lie in [0, 1), got {self.bigR}")

    @property
    def w(self) -> complex:
        return self.bigR * complex(math.cos(self.theta), math.sin(self.theta))


@dataclass(frozen=True)
class PolarCoord:
    r: float
    theta: float

    def __post_init__(self):
        if self.r < 0.0:
            raise ValueError("polar radius must be nonnegative")
        object.__setattr__(self, "theta", self.theta % TWO_PI)


@dataclass(frozen=True)
class RectCoord:
    p: float
    q: float

    def __post_init__(self):
        if not (math.isfinite(self.p) and math.isfinite(self.q)):
            raise ValueError("rectangular coordinates must be finite")


@dataclass(frozen=True)
class Frame:
    """Base point plus reference direction (Euclidean angle of the tangent
    in the half-plane chart; the chart is conformal so this is also the
    hyperbolic angle)."""

    origin: PlanePoint
    direction: float

    def __post_init__(self):
        object.__setattr__(self, "direction", self.direction % TWO_PI)

    def isometry(self) -> "Isometry":
        """Orientation-preserving isometry taking the canonical frame to this one."""
        rot = Isometry.rotation_about_i(self.direction - 0.5 * math.pi)
        o = self.origin
        move = Isometry(math.sqrt(o.y), o.x / math.sqrt(o.y), 0.0, 1.0 / math.sqrt(o.y))
        return move @ rot


CANONICAL_FRAME = Frame(PlanePoint(0.0, 1.0), 0.5 * math.pi)


class Isometry:
    """Element of PSL(2, R) acting by Mobius transformation.

    Stored with determinant one and the first nonzero entry positive, so
    ``==`` compares group elements rather than matrices.
    """

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: float, b: float, c: float, d: float):
        det = a * d - b * c
        if not det > 0.0:
            raise ValueError("isometry matrix must have positive determinant")
        s = 1.0 / math.sqrt(det)
        a, b, c, d = a * s, b * s, c * s, d * s
        first = next(v for v in (a, b, c, d) if v != 0.0)
        if first < 0.0:
            a, b, c, d = -a, -b, -c, -d
        self.a, self.b, self.c, self.d = a, b, c, d

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def rotation_about_i(cls, angle: float) -> "Isometry":
        """Counter-clockwise rotation by ``angle`` about the point i."""
        h = 0.5 * angle
        return cls(math.cos(h), math.sin(h), -math.sin(h), math.cos(h))

    @classmethod
    def translation_along_imaginary_axis(cls, length: float) -> "Isometry":
        e = math.exp(0.5 * length)
        return cls(e, 0.0, 0.0, 1.0 / e)

    @classmethod
    def random(cls, rng: np.random.Generator, scale: float = 1.0) -> "Isometry":
        m = rng.normal(size=(2, 2)) * scale + np.eye(2)
        if np.linalg.det(m) < 0.0:
            m[0] = -m[0]
        return cls(*m.ravel())

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other: "Isometry") -> "Isometry":
        m = self.matrix() @ other.matrix()
        return Isometry(*m.ravel())

    def inverse(self) -> "Isometry":
        return Isometry(self.d, -self.b, -self.c, self.a)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Isometry):
            return NotImplemented
        scale = max(1.0, float(np.abs(self.matrix()).max()))
        return np.allclose(self.matrix(), other.matrix(), rtol=0.0, atol=1e-12 * scale)

    def __hash__(self):
        return hash(tuple(round(v, 10) for v in (self.a, self.b, self.c, self.d)))

    def __repr__(self):
        return f"Isometry({self.a:.6g}, {self.b:.6g}, {self.c:.6g}, {self.d:.6g})"

    def apply_complex(self, z):
        return (self.a * z + self.b) / (self.c * z + self.d)

    def apply(self, p: PlanePoint) -> PlanePoint:
        return PlanePoint.from_complex(self.apply_complex(p.z))

    def apply_projective(self, a: float, b: float) -> tuple[float, float]:
        """Act on the boundary point with homogeneous coordinates (a, b)."""
        return self.a * a + self.b * b, self.c * a + self.d * b

    def derivative_argument(self, p: PlanePoint) -> float:
        """Rotation angle of the differential at ``p``."""
        return -2.0 * np.angle(self.c * p.z + self.d)


# ---------------------------------------------------------------- distance


def distance(a: PlanePoint, b: PlanePoint) -> float:
    """Hyperbolic distance, ``2 asinh(|z - w| / (2 sqrt(y_z y_w)))``."""
    return 2.0 * math.asinh(abs(a.z - b.z) / (2.0 * math.sqrt(a.y * b.y)))


def distance_arrays(x1, y1, x2, y2):
    return 2.0 * np.arcsinh(np.hypot(x1 - x2, y1 - y2) / (2.0 * np.sqrt(y1 * y2)))


# ---------------------------------------------------------------- charts


def cayley(p: PlanePoint) -> DiskPoint:
    w = (1j * p.z + 1.0) / (p.z + 1j)
    R = abs(w)
    theta = 0.0 if R == 0.0 else math.atan2(w.imag, w.real) % TWO_PI
    return DiskPoint(min(R, math.nextafter(1.0, 0.0)), theta)


def cayley_inv(d: DiskPoint) -> PlanePoint:
    w = d.w
    return PlanePoint.from_complex((1.0 - 1j * w) / (w - 1j))


def disk_to_hyperbolic_radius(bigR: float) -> float:
    if not 0.0 <= bigR < 1.0:
        raise ValueError(f"disk radius must lie in [0, 1), got {bigR}")
    return 2.0 * math.atanh(bigR)


def hyperbolic_to_disk_radius(r: float) -> float:
    if r < 0.0:
        raise ValueError("hyperbolic radius must be nonnegative")
    return math.tanh(0.5 * r)


def polar_to_cartesian(pc: PolarCoord, frame: Frame = CANONICAL_FRAME) -> PlanePoint:
    # cayley has positive real derivative at i, so disk angle == tangent angle at i
    base = cayley_inv(DiskPoint(hyperbolic_to_disk_radius(pc.r), pc.theta + 0.5 * math.pi))
    return frame.isometry().apply(base)


def cartesian_to_polar(p: PlanePoint, frame: Frame = CANONICAL_FRAME) -> PolarCoord:
    q = frame.isometry().inverse().apply(p)
    d = cayley(q)
    theta = 0.0 if d.bigR == 0.0 else d.theta - 0.5 * math.pi
    return PolarCoord(disk_to_hyperbolic_radius(d.bigR), theta)


def rect_to_cartesian(rc: RectCoord, frame: Frame = CANONICAL_FRAME) -> PlanePoint:
    ep = math.exp(rc.p)
    base = PlanePoint(ep * math.tanh(rc.q), ep / math.cosh(rc.q))
    return frame.isometry().apply(base)


def cartesian_to_rect(p: PlanePoint, frame: Frame = CANONICAL_FRAME) -> RectCoord:
    q = frame.isometry().inverse().apply(p)
    m = abs(q.z)
    return RectCoord(math.log(m), math.atanh(q.x / m))


def volume_density(chart: str, *coords: float) -> float:
    """Density of the area form in the named chart.

    ``cartesian``: (x, y) -> 1/y^2; ``polar``: (r, theta) -> sinh r;
    ``rect``: (p, q) -> cosh q.
    """
    if chart == "cartesian":
        y = coords[1]
        if y <= 0.0:
            raise ValueError("y must be positive")
        return 1.0 / (y * y)
    if chart == "polar":
        return math.sinh(abs(coords[0]))
    if chart == "rect":
        return math.cosh(coords[1])
    raise ValueError(f"unknown chart {chart!r}")


def disk_geometry(r: float) -> tuple[float, float]:
    """Circumference and area of a hyperbolic disk of radius ``r``."""
    if r <= 0.0:
        raise ValueError("radius must be positive")
    return TWO_PI * math.sinh(r), 2.0 * TWO_PI * math.sinh(0.5 * r) ** 2


def disk_boundary_point(center: PlanePoint, r: float, angle: float) -> PlanePoint:
    """Point at distance ``r`` from ``center`` in direction ``angle`` (tangent angle)."""
    return polar_to_cartesian(PolarCoord(r, angle), Frame(center, 0.0))


# ---------------------------------------------------------------- hyperboloid

MINKOWSKI = np.array([-1.0, 1.0, 1.0])


def mdot(X, Y):
    """Minkowski product ``-X0 Y0 + X1 Y1 + X2 Y2`` over the last axis."""
    X = np.asarray(X)
    Y = np.asarray(Y)
    return -X[..., 0] * Y[..., 0] + X[..., 1] * Y[..., 1] + X[..., 2] * Y[..., 2]


def mcross(X, Y):
    """Minkowski cross product; orthogonal to both arguments under ``mdot``."""
    return np.cross(X, Y) * MINKOWSKI


def uhp_to_hyperboloid(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = x * x + y * y
    return np.stack([(s + 1.0) / (2.0 * y), (s - 1.0) / (2.0 * y), x / y], axis=-1)


def hyperboloid_to_uhp(X):
    X = np.asarray(X, dtype=float)
    y = 1.0 / (X[..., 0] - X[..., 1])
    return X[..., 2] * y, y


def to_plane_point(X) -> PlanePoint:
    x, y = hyperboloid_to_uhp(X)
    return PlanePoint(float(x), float(y))


def normalize_timelike(X):
    X = np.asarray(X, dtype=float)
    n = np.sqrt(-mdot(X, X))
    out = X / n[..., None] if np.ndim(n) else X / n
    sign = np.sign(out[..., 0])
    return out * (sign[..., None] if np.ndim(sign) else sign)


def normalize_spacelike(N):
    N = np.asarray(N, dtype=float)
    n = np.sqrt(mdot(N, N))
    return N / n[..., None] if np.ndim(n) else N / n


def rotate_tangent(P, V):
    """Rotate tangent vector ``V`` at ``P`` by +90 degrees (counter-clockwise
    in the half-plane picture)."""
    return -mcross(P, V)


def hyperboloid_distance(P, Q):
    """Distance between hyperboloid points, accurate for nearby points."""
    D = np.asarray(P) - np.asarray(Q)
    return 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(mdot(D, D), 0.0)))


Chartable = Union[PlanePoint, DiskPoint, PolarCoord, RectCoord]


def tangent_angle(X, V) -> float:
    """Half-plane direction angle of the tangent vector ``V`` at hyperboloid point ``X``."""
    s = float(X[0] - X[1])
    ds = float(V[0] - V[1])
    dx = float(V[2]) / s - float(X[2]) * ds / (s * s)
    dy = -ds / (s * s)
    return math.atan2(dy, dx) % TWO_PI
