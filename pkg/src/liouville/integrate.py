"""
Integration over the space of geodesics meeting a polygon.

Every geodesic crossing a convex polygon is recorded by the two edge points
where it enters and leaves, so integrals over geodesics become sums over
edge pairs ``j > k`` of integrals over ``(l_j, l_k)`` rectangles with density
``sin(a_j) sin(a_k) / (2 sinh rho)``.  Integrands are vectorized: they receive
a :class:`ChordBatch` holding arrays for one edge pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate as spi

from .domains import Chord, GeodesicPolygon, chord_from_edge_points, pair_chart


class IntegrationError(RuntimeError):
    """Non-finite integrand values or failure to reach the requested tolerance."""


@dataclass(frozen=True)
class IntegratorConfig:
    seed: int = 0
    samples: int = 100_000
    shards: int = 32
    quad_order: int = 16
    tolerance: float = 1e-9
    max_depth: int = 40

    def __post_init__(self):
        if self.samples <= 0 or self.shards <= 0 or self.quad_order <= 1 or self.max_depth <= 0:
            raise ValueError("sample, shard, order and depth counts must be positive")
        if not self.tolerance > 0.0:
            raise ValueError("tolerance must be positive")
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class Estimate:
    value: float
    std_error: float
    n: int
    method: str
    per_pair: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.method not in ("mc", "quad"):
            raise ValueError("method must be 'mc' or 'quad'")
        if self.std_error < 0.0 or (self.method == "mc" and self.std_error == 0.0 and self.value != 0.0):
            raise ValueError("Monte Carlo estimates need a positive standard error")


@dataclass(frozen=True)
class WeightedChordSample:
    chord: Chord
    weight: float
    pair: tuple[int, int]

    def __post_init__(self):
        if not self.weight > 0.0:
            raise ValueError("sample weight must be positive")


@dataclass
class ChordBatch:
    """Chord data for an array of ``(l_j, l_k)`` points of one edge pair."""

    poly: GeodesicPolygon
    pair: tuple[int, int]
    lj: np.ndarray
    lk: np.ndarray
    rho: np.ndarray
    cos_j: np.ndarray
    cos_k: np.ndarray
    sin_j: np.ndarray
    sin_k: np.ndarray
    density: np.ndarray

    @classmethod
    def build(cls, poly: GeodesicPolygon, j: int, k: int, lj, lk) -> "ChordBatch":
        lj = np.asarray(lj, dtype=float)
        lk = np.asarray(lk, dtype=float)
        return cls(poly, (j, k), lj, lk, **pair_chart(poly, j, k, lj, lk))

    def chords(self) -> list[Chord]:
        j, k = self.pair
        return [chord_from_edge_points(self.poly, j, a, k, b) for a, b in zip(self.lj.ravel(), self.lk.ravel())]


Integrand = Callable[[ChordBatch], np.ndarray]


def of_length(f: Callable[[np.ndarray], np.ndarray]) -> Integrand:
    """Integrand depending on the chord length only."""
    return lambda b: f(b.rho)


def pointwise(f: Callable[[Chord], float]) -> Integrand:
    """Adapt a scalar ``Chord -> float`` function (slow; for tests and small runs)."""

    def g(b: ChordBatch):
        out = np.fromiter((f(c) for c in b.chords()), dtype=float, count=b.lj.size)
        return out.reshape(b.lj.shape)

    return g


def in_chart_measure(f: Integrand) -> Integrand:
    """Mark ``f`` as a density against ``dl_j dl_k`` rather than against the
    Liouville measure, so the integrators do not multiply by the pair density."""

    def g(b: ChordBatch):
        return f(b)

    g.chart_measure = True
    return g


def _evaluate(integrand: Integrand, batch: ChordBatch) -> np.ndarray:
    vals = np.broadcast_to(np.asarray(integrand(batch), dtype=float), batch.lj.shape)
    out = vals if getattr(integrand, "chart_measure", False) else vals * batch.density
    ok = batch.rho > 0.0
    out = np.where(ok, out, 0.0)
    bad = ok & ~np.isfinite(out)
    if bad.any():
        idx = np.argwhere(bad)[0]
        raise IntegrationError(
            f"non-finite integrand on pair {batch.pair} at l_j={batch.lj[tuple(idx)]:.17g}, "
            f"l_k={batch.lk[tuple(idx)]:.17g}, rho={batch.rho[tuple(idx)]:.17g}"
        )
    return out


# ---------------------------------------------------------------- adaptive 2D cells


def _adaptive_cells(evaluate, boxes, order: int, tol: float, max_depth: int):
    """Globally adaptive quadrature on rectangles.

    ``evaluate(group, X, Y)`` returns integrand values; ``boxes`` is a list of
    ``(group, x0, x1, y0, y1)``.  Each cell is integrated with Gauss-Legendre
    rules of order ``order`` and ``order // 2``; their difference is the
    cell's error estimate.  Cells holding the largest half of the total error
    are split into quarters until the total is below ``tol``.
    Returns ``(per-group values, error, cell count)``.
    """
    xh, wh = leggauss(order)
    xl, wl = leggauss(max(order // 2, 1))
    cells = np.array([b[1:] for b in boxes], dtype=float).reshape(-1, 4)
    groups = np.array([b[0] for b in boxes], dtype=int)
    depth = np.zeros(len(cells), dtype=int)

    def rule(c, g, x, w):
        cx = 0.5 * (c[:, 0] + c[:, 1])
        hx = 0.5 * (c[:, 1] - c[:, 0])
        cy = 0.5 * (c[:, 2] + c[:, 3])
        hy = 0.5 * (c[:, 3] - c[:, 2])
        X = cx[:, None, None] + hx[:, None, None] * x[None, :, None]
        Y = cy[:, None, None] + hy[:, None, None] * x[None, None, :]
        out = np.empty(len(c))
        for grp in np.unique(g):
            m = g == grp
            vals = evaluate(int(grp), np.broadcast_to(X[m], (m.sum(), len(x), len(x))),
                            np.broadcast_to(Y[m], (m.sum(), len(x), len(x))))
            out[m] = np.einsum("cij,i,j->c", vals, w, w) * hx[m] * hy[m]
        return out

    def both(c, g):
        return rule(c, g, xh, wh), rule(c, g, xl, wl)

    hi, lo = both(cells, groups)
    err = np.abs(hi - lo)
    n_cells = len(cells)
    while True:
        total = float(err.sum())
        if total <= tol:
            break
        order_idx = np.argsort(-err, kind="stable")
        csum = np.cumsum(err[order_idx])
        cut = int(np.searchsorted(csum, 0.5 * total)) + 1
        split = np.zeros(len(cells), dtype=bool)
        split[order_idx[:cut]] = True
        if np.any(depth[split] >= max_depth):
            raise IntegrationError(
                f"quadrature did not converge at depth {max_depth}: error {total:.3e} > tolerance {tol:.3e}"
            )
        c = cells[split]
        mx = 0.5 * (c[:, 0] + c[:, 1])
        my = 0.5 * (c[:, 2] + c[:, 3])
        kids = np.concatenate([
            np.stack([c[:, 0], mx, c[:, 2], my], axis=1),
            np.stack([mx, c[:, 1], c[:, 2], my], axis=1),
            np.stack([c[:, 0], mx, my, c[:, 3]], axis=1),
            np.stack([mx, c[:, 1], my, c[:, 3]], axis=1),
        ])
        kg = np.tile(groups[split], 4)
        kd = np.tile(depth[split] + 1, 4)
        khi, klo = both(kids, kg)
        keep = ~split
        cells = np.concatenate([cells[keep], kids])
        groups = np.concatenate([groups[keep], kg])
        depth = np.concatenate([depth[keep], kd])
        hi = np.concatenate([hi[keep], khi])
        err = np.concatenate([err[keep], np.abs(khi - klo)])
        n_cells += len(kids)

    per_group = {}
    for grp in np.unique(groups):
        per_group[int(grp)] = float(math.fsum(hi[groups == grp]))
    return per_group, float(err.sum()), n_cells * order * order


def _require_compact(poly: GeodesicPolygon):
    if not all(e.is_compact for e in poly.edges):
        raise ValueError("polygon has ideal vertices; use integrate_unbounded with an explicit chart")


def quad_integrate(poly: GeodesicPolygon, integrand: Integrand, cfg: IntegratorConfig = IntegratorConfig()) -> Estimate:
    """Deterministic adaptive tensor-Gauss quadrature over all edge pairs.

    The returned ``std_error`` is the summed Gauss-order-difference error
    estimate, which is conservative for smooth cells.
    """
    _require_compact(poly)
    pairs = poly.pairs()
    boxes = [(i, poly.edges[j].lo, poly.edges[j].hi, poly.edges[k].lo, poly.edges[k].hi)
             for i, (j, k) in enumerate(pairs)]

    def evaluate(i, X, Y):
        j, k = pairs[i]
        return _evaluate(integrand, ChordBatch.build(poly, j, k, X, Y))

    per, err, n = _adaptive_cells(evaluate, boxes, cfg.quad_order, cfg.tolerance, cfg.max_depth)
    per_pair = {pairs[i]: v for i, v in per.items()}
    value = float(sum(per_pair[p] for p in pairs))
    return Estimate(value, err, n, "quad", per_pair)


# ---------------------------------------------------------------- Monte Carlo


def _rng(seed: int, shard: int, pair: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, shard, pair])))


def _logistic(u):
    """Inverse CDF of the density sech^2(l/2)/4 and that density."""
    l = np.log(u) - np.log1p(-u)
    return l, 0.25 / np.cosh(0.5 * l) ** 2


def _corner(poly: GeodesicPolygon, j: int, k: int):
    """Shared finite vertex of edges j > k as (l_j, l_k, dir_j, dir_k), else None."""
    n = poly.n
    ej, ek = poly.edges[j], poly.edges[k]
    if j == k + 1 and math.isfinite(ej.lo) and math.isfinite(ek.hi):
        return ej.lo, ek.hi, 1.0, -1.0
    if j == n - 1 and k == 0 and math.isfinite(ej.hi) and math.isfinite(ek.lo):
        return ej.hi, ek.lo, -1.0, 1.0
    return None


def _pair_draw(poly: GeodesicPolygon, j: int, k: int, m: int, rng: np.random.Generator):
    """Draw ``m`` points of pair (j, k) with their inverse proposal densities."""
    ej, ek = poly.edges[j], poly.edges[k]
    corner = _corner(poly, j, k) if ej.is_compact and ek.is_compact else None
    if corner is not None:
        # Duffy split of the rectangle at the shared vertex; cancels the 1/rho corner
        cj, ck, dj, dk = corner
        Lj, Lk = ej.length, ek.length
        x = rng.random(m)
        y = rng.random(m)
        half = m // 2
        s = np.where(np.arange(m) < half, Lj * x, Lj * x * y)
        t = np.where(np.arange(m) < half, Lk * x * y, Lk * x)
        inv_p = Lj * Lk * x * np.where(np.arange(m) < half, m / half, m / (m - half))
        return cj + dj * s, ck + dk * t, inv_p
    cols, inv = [], np.ones(m)
    for e in (ej, ek):
        u = rng.random(m)
        if e.is_compact:
            cols.append(e.lo + e.length * u)
            inv = inv * e.length
        else:
            lo = 0.0 if not math.isfinite(e.lo) else e.lo
            hi = 0.0 if not math.isfinite(e.hi) else e.hi
            # half-infinite edges: fold the logistic proposal onto the edge
            l, p = _logistic(u)
            if math.isfinite(e.lo):
                l, p = lo + np.abs(l), 2.0 * p
            elif math.isfinite(e.hi):
                l, p = hi - np.abs(l), 2.0 * p
            cols.append(l)
            inv = inv / p
    return cols[0], cols[1], inv


def mc_integrate(poly: GeodesicPolygon, integrand: Integrand, cfg: IntegratorConfig = IntegratorConfig()) -> Estimate:
    """Stratified Monte Carlo over edge pairs.

    Samples are split among pairs in proportion to chart area (fixed weight
    for ideal edges) and among ``cfg.shards`` independent shards.  Shard ``s``
    of pair ``p`` draws from a Philox stream keyed by ``(seed, s, p)``.
    """
    pairs = poly.pairs()
    size = [e.length if e.is_compact else 4.0 for e in poly.edges]
    w = np.array([size[j] * size[k] for j, k in pairs])
    alloc = np.maximum(2, np.ceil(cfg.samples * w / w.sum() / cfg.shards)).astype(int)
    shard_vals = np.zeros((cfg.shards, len(pairs)))
    for s in range(cfg.shards):
        for p, (j, k) in enumerate(pairs):
            m = int(alloc[p])
            lj, lk, inv_p = _pair_draw(poly, j, k, m, _rng(cfg.seed, s, p))
            vals = _evaluate(integrand, ChordBatch.build(poly, j, k, lj, lk))
            shard_vals[s, p] = float(np.mean(vals * inv_p))
    per = shard_vals.mean(axis=0)
    per_pair = {pr: float(v) for pr, v in zip(pairs, per)}
    value = float(sum(per_pair[pr] for pr in pairs))
    totals = shard_vals.sum(axis=1)
    se = float(np.std(totals, ddof=1) / math.sqrt(cfg.shards)) if cfg.shards > 1 else math.inf
    n = int(alloc.sum()) * cfg.shards
    return Estimate(value, se, n, "mc", per_pair)


def weighted_samples(poly: GeodesicPolygon, n: int, seed: int = 0) -> list[WeightedChordSample]:
    """Draw chords with importance weights such that ``sum(w f) / n_pair`` is
    unbiased per pair; degenerate draws are skipped."""
    _require_compact(poly)
    out = []
    for p, (j, k) in enumerate(poly.pairs()):
        lj, lk, inv_p = _pair_draw(poly, j, k, n, _rng(seed, 0, p))
        b = ChordBatch.build(poly, j, k, lj, lk)
        for a, c, wgt, d in zip(lj, lk, inv_p, b.density):
            if d > 0.0 and np.isfinite(d):
                out.append(WeightedChordSample(chord_from_edge_points(poly, j, a, k, c), float(d * wgt), (j, k)))
    return out


# ---------------------------------------------------------------- unbounded charts


@dataclass(frozen=True)
class _DEMap:
    """Map ``t`` in ``[-span, span]`` onto an interval, with its derivative.

    ``decay`` names the integrand's tail behavior on infinite intervals:
    ``"algebraic"`` uses ``exp(pi/2 sinh t)``, ``"exponential"`` the milder
    ``sinh t`` / ``exp(t - exp(-t))`` maps that keep ``x`` within about 60.
    """

    lo: float
    hi: float
    decay: str = "algebraic"

    def __call__(self, t):
        a, b = self.lo, self.hi
        if math.isfinite(a) and math.isfinite(b):
            th = np.tanh(0.5 * np.pi * np.sinh(t))
            x = 0.5 * (a + b) + 0.5 * (b - a) * th
            dx = 0.5 * (b - a) * (1.0 - th * th) * 0.5 * np.pi * np.cosh(t)
            return x, dx
        if math.isfinite(a) or math.isfinite(b):
            if self.decay == "algebraic":
                e = np.exp(0.5 * np.pi * np.sinh(t))
                de = 0.5 * np.pi * np.cosh(t) * e
            else:
                e = np.exp(t - np.exp(-t))
                de = (1.0 + np.exp(-t)) * e
            return (a + e, de) if math.isfinite(a) else (b - e, de)
        if self.decay == "algebraic":
            sh = 0.5 * np.pi * np.sinh(t)
            return np.sinh(sh), np.cosh(sh) * 0.5 * np.pi * np.cosh(t)
        return np.sinh(t), np.cosh(t)

    @property
    def span(self) -> tuple[float, float]:
        if math.isfinite(self.lo) and math.isfinite(self.hi):
            return -3.2, 3.2
        if self.decay == "algebraic":
            return -3.6, 3.6
        if math.isfinite(self.lo) or math.isfinite(self.hi):
            return -3.3, 4.1
        return -4.8, 4.8


_DE_NODES = leggauss(80)


def _piecewise_de(fn, rng: tuple[float, float], breaks: Sequence[float], decay: str) -> float:
    """Integral of a vectorized ``fn`` over ``rng`` split at ``breaks``."""
    lo, hi = rng
    cuts = sorted(b for b in breaks if lo < b < hi)
    pts = [lo] + cuts + [hi]
    x, w = _DE_NODES
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        if not b > a:
            continue
        m = _DEMap(a, b, decay)
        t0, t1 = m.span
        t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * x
        y, dy = m(t)
        with np.errstate(over="ignore", invalid="ignore"):
            v = np.asarray(fn(y), dtype=float) * dy
        v = np.where(dy == 0.0, 0.0, v)
        total += 0.5 * (t1 - t0) * float(np.dot(w, v))
    return total


def integrate_unbounded(
    x_range: tuple[float, float],
    y_range: tuple[float, float],
    integrand: Callable[[np.ndarray, np.ndarray], np.ndarray],
    cfg: IntegratorConfig = IntegratorConfig(),
    method: str = "cells",
    decay: str = "algebraic",
    decay_tol: float = 1e-9,
    inner_breaks: Optional[Callable[[float], Sequence[float]]] = None,
) -> Estimate:
    """Integrate ``integrand(x, y)`` over a possibly unbounded rectangle.

    Each axis is mapped onto a bounded ``t``-interval by a double-exponential
    substitution (tanh-sinh for finite intervals, ``exp(pi/2 sinh t)`` for
    half-lines).  ``method="cells"`` reuses the adaptive Gauss cells;
    ``method="iterated"`` nests one-dimensional adaptive Gauss-Kronrod and is
    the right choice for integrands with jumps along curves.  With
    ``inner_breaks(x)`` returning the jump locations in ``y`` for fixed ``x``,
    each smooth inner piece gets its own double-exponential Gauss rule.
    """
    if decay not in ("algebraic", "exponential"):
        raise ValueError("decay must be 'algebraic' or 'exponential'")
    mx, my = _DEMap(*x_range, decay), _DEMap(*y_range, decay)
    (ax, bx), (ay, by) = mx.span, my.span

    def g(tx, ty):
        x, dx = mx(tx)
        y, dy = my(ty)
        with np.errstate(over="ignore", invalid="ignore"):
            v = np.asarray(integrand(x, y), dtype=float) * dx * dy
        return np.where((dx == 0.0) | (dy == 0.0), 0.0, v)

    px = np.linspace(ax, bx, 43)[1:-1]
    py = np.linspace(ay, by, 43)[1:-1]
    inner = np.abs(g(*np.meshgrid(px, py, indexing="ij")))
    scale = max(float(np.nanmax(inner)), 1e-300)
    ring = np.concatenate([g(np.full(41, t), py) for t in (ax, bx)] + [g(px, np.full(41, t)) for t in (ay, by)])
    if not np.all(np.isfinite(ring)) or np.max(np.abs(ring)) > decay_tol * scale:
        raise IntegrationError("integrand does not decay at the ends of the substituted chart")

    if method == "cells":
        per, err, n = _adaptive_cells(lambda _, X, Y: g(X, Y), [(0, ax, bx, ay, by)],
                                      cfg.quad_order, cfg.tolerance, cfg.max_depth)
        return Estimate(per[0], err, n, "quad")
    if method == "iterated":
        count = [0]

        def inner_int(tx):
            count[0] += 1
            if inner_breaks is not None:
                x, dx = mx(tx)
                return float(dx) * _piecewise_de(lambda y: integrand(np.full_like(y, x), y), y_range,
                                                 inner_breaks(float(x)), decay)
            val, _ = spi.quad(lambda ty: float(g(tx, ty)), ay, by, epsabs=0.1 * cfg.tolerance,
                              epsrel=1e-12, limit=400)
            return val

        val, err = spi.quad(inner_int, ax, bx, epsabs=cfg.tolerance, epsrel=1e-12, limit=400)
        return Estimate(float(val), float(err), count[0], "quad")
    raise ValueError(f"unknown method {method!r}")
