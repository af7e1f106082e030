"""Command-line experiment runner.

Every command writes report rows with the same columns::

    experiment,lhs,rhs,residual,std_error,n,pass,wall_ms,seed

Exit status is 0 when every row passes, 1 when a check fails and 2 on bad
input.  With ``--no-timing`` the ``wall_ms`` column is left empty so that
repeated runs produce identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import identities as ids
from . import ktrig
from .domains import GeodesicPolygon, PolygonError, SmoothDomain
from .geodesics import (
    IncidenceSample,
    NonTransversalError,
    OrientedGeodesic,
    PolarSample,
    chart_measures,
    incidence_endpoint_jacobian,
    polar_incidence_jacobian,
)
from .hplane import Frame, PlanePoint
from .integrate import IntegratorConfig

COLUMNS = ("experiment", "lhs", "rhs", "residual", "std_error", "n", "pass", "wall_ms", "seed")

COMMANDS = ("crofton", "ap-check", "pleijel-disk", "isoperimetric", "santalo", "unit-tangent",
            "tri-dist", "quad-dist", "ktrig-check", "charts-consistency")

AP_FUNCTIONS = ("one", "x", "sinh", "one_minus_exp")


class SpecError(ValueError):
    """Bad command-line input; the message names the offending field."""


@dataclass
class ReportRow:
    experiment: str
    lhs: float
    rhs: float
    residual: float
    std_error: float
    n: int
    passed: bool
    wall_ms: Optional[float]
    seed: int

    def values(self) -> list:
        wall = "" if self.wall_ms is None else f"{self.wall_ms:.1f}"
        return [self.experiment, repr(float(self.lhs)), repr(float(self.rhs)), repr(float(self.residual)),
                repr(float(self.std_error)), str(int(self.n)), "true" if self.passed else "false", wall,
                str(self.seed)]

    def as_dict(self) -> dict:
        return {"experiment": self.experiment, "lhs": float(self.lhs), "rhs": float(self.rhs),
                "residual": float(self.residual), "std_error": float(self.std_error), "n": int(self.n),
                "pass": bool(self.passed), "wall_ms": None if self.wall_ms is None else round(self.wall_ms, 1),
                "seed": self.seed}


# ---------------------------------------------------------------- parsing


def _number(kind: type, name: str):
    def conv(text: str):
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name}: not a number: {text!r}") from None
        if not math.isfinite(value) and kind is int:
            raise argparse.ArgumentTypeError(f"{name}: must be finite")
        if kind is int:
            if value != int(value) or value < 1:
                raise argparse.ArgumentTypeError(f"{name}: must be a positive integer, got {text!r}")
            return int(value)
        return value

    return conv


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="liouville", description="Integral-geometry experiments on chords of hyperbolic domains.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--polygon", metavar="PATH", help="polygon JSON file")
    p.add_argument("--disk", type=_number(float, "--disk"), metavar="R", help="disk radius")
    p.add_argument("--method", choices=("quad", "mc"), default="quad")
    p.add_argument("--function", dest="function", choices=sorted(ids.TEST_FUNCTIONS),
                   help="test function (ap-check and pleijel-disk)")
    p.add_argument("--samples", type=_number(int, "--samples"), default=100_000)
    p.add_argument("--quad-order", type=_number(int, "--quad-order"), default=16)
    p.add_argument("--tolerance", type=_number(float, "--tolerance"), default=None, help="pass threshold")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shards", type=_number(int, "--shards"), default=32)
    p.add_argument("--curvature", type=_number(float, "--curvature"), default=-1.0)
    p.add_argument("--a", type=_number(float, "--a"), default=None)
    p.add_argument("--b", type=_number(float, "--b"), default=None)
    p.add_argument("--k-max", type=int, default=6)
    p.add_argument("--output", metavar="PATH")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--no-timing", action="store_true", help="leave wall_ms empty for byte-identical reports")
    return p


def parse_polygon(path: str) -> GeodesicPolygon:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise SpecError(f"--polygon: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"--polygon: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    try:
        return GeodesicPolygon.from_json(obj)
    except (PolygonError, ValueError) as exc:
        raise SpecError(f"--polygon: {exc}") from None


def _domain(args, allow_ideal: bool = False):
    if (args.polygon is None) == (args.disk is None):
        raise SpecError("give exactly one of --polygon or --disk")
    if args.disk is not None:
        if not args.disk > 0.0:
            raise SpecError("--disk: radius must be positive")
        return SmoothDomain.disk(args.disk)
    poly = parse_polygon(args.polygon)
    if not poly.is_compact and not (allow_ideal and poly.is_ideal and poly.n == 3):
        hint = " or an ideal triangle" if allow_ideal else ""
        raise SpecError(f"--polygon: this command needs a compact polygon{hint}")
    return poly


def _interval(args, default: tuple[float, float]) -> tuple[float, float]:
    a = default[0] if args.a is None else args.a
    b = default[1] if args.b is None else args.b
    if not 0.0 <= a < b:
        raise SpecError("--a/--b: need 0 <= a < b")
    return a, b


# ---------------------------------------------------------------- commands


def _row(name, lhs, rhs, passed, std_error=0.0, n=1, residual=None) -> dict:
    res = abs(lhs - rhs) if residual is None else residual
    return dict(experiment=name, lhs=lhs, rhs=rhs, residual=res, std_error=std_error, n=n, passed=bool(passed))


def _report_row(rep: ids.IdentityReport, name: Optional[str] = None) -> dict:
    return _row(name or rep.name, rep.lhs.value, rep.rhs.value, rep.passed, rep.std_error, rep.n, rep.residual)


def cmd_crofton(args, cfg):
    dom = _domain(args)
    return [_report_row(ids.crofton(dom, cfg, args.method, args.tolerance or 1e-6), "crofton")]


def cmd_ap_check(args, cfg):
    dom = _domain(args)
    if isinstance(dom, SmoothDomain):
        raise SpecError("--disk: ap-check needs --polygon")
    labels = [args.function] if args.function else list(AP_FUNCTIONS)
    return [_report_row(ids.ap_identity(dom, ids.test_function(lab), cfg, args.method, args.tolerance or 1e-5))
            for lab in labels]


def cmd_pleijel_disk(args, cfg):
    r = 1.0 if args.disk is None else args.disk
    if args.polygon is not None:
        raise SpecError("--polygon: pleijel-disk takes --disk only")
    if not r > 0.0:
        raise SpecError("--disk: radius must be positive")
    tf = ids.test_function(args.function or "one")
    steps = ids.pleijel_refinement(SmoothDomain.disk(r), tf, args.k_max, cfg, args.tolerance or 1e-5)
    rows = [_report_row(s.report, f"pleijel[k={s.k}]") for s in steps]
    last = steps[-1]
    rows.append(_row("pleijel-boundary", last.boundary_term, last.boundary_limit,
                     abs(last.boundary_term - last.boundary_limit) <= 1e-3))
    return rows


def cmd_isoperimetric(args, cfg):
    dom = _domain(args)
    defect, rep = ids.isoperimetric(dom, cfg, tolerance=args.tolerance)
    rows = [_row("isoperimetric-defect", defect, 0.0, defect >= -1e-12)]
    if isinstance(dom, SmoothDomain) and hasattr(dom, "radius"):
        rows.append(_row("isoperimetric-disk-closed-form", ids.disk_defect(dom.radius), 0.0,
                         abs(ids.disk_defect(dom.radius)) <= 1e-12))
    rows.append(_report_row(rep, "isoperimetric-two-sided"))
    return rows


def cmd_santalo(args, cfg):
    dom = _domain(args, allow_ideal=True)
    return [_report_row(ids.santalo_area_squared(dom, cfg, args.method, args.tolerance or 1e-5), "santalo")]


def cmd_unit_tangent(args, cfg):
    dom = _domain(args, allow_ideal=True)
    return [_report_row(ids.unit_tangent_check(dom, cfg, args.method, args.tolerance or 1e-5), "unit-tangent")]


def cmd_tri_dist(args, cfg):
    a, b = _interval(args, (1.0, 2.0))
    if a == 0.0:
        raise SpecError("--a: the mass near length 0 diverges; need a > 0")
    exact = ids.ideal_triangle_cdf(a, b)
    if args.method == "mc":
        est = ids.ideal_triangle_mc(a, b, cfg)
        tol = args.tolerance or 0.0
        ok = abs(est.value - exact) <= max(3.0 * est.std_error, tol)
        return [_row("tri-dist-mc", est.value, exact, ok, est.std_error, est.n)]
    est = ids.ideal_triangle_quad(a, b)
    return [_row("tri-dist-quad", est.value, exact, abs(est.value - exact) <= (args.tolerance or 1e-4), n=est.n)]


def cmd_quad_dist(args, cfg):
    a, b = _interval(args, (1.0, 2.0))
    quad = parse_polygon(args.polygon) if args.polygon else GeodesicPolygon.ideal(-1, 0, 1, "inf")
    if not (quad.is_ideal and quad.n == 4):
        raise SpecError("--polygon: quad-dist needs four ideal vertices")
    tol = args.tolerance or 1e-6
    total = ids.quad_opposite_cdf(quad, "13", math.inf)
    # cross-ratio mass of the two opposite sides; log 2 for the default quadrilateral
    rows = [_row("quad-m13-total", total.direct, total.total, abs(total.direct - total.total) <= tol,
                 total.direct_error)]
    for rho0 in (1.0, 2.0, 3.0):
        m = ids.quad_opposite_cdf(quad, "13", rho0)
        rows.append(_row(f"quad-m13-levelset[rho={rho0:g}]", m.paper, m.direct, abs(m.paper - m.direct) <= tol,
                         math.hypot(m.direct_error, m.paper_error)))
    br = ids.quad_distribution(quad, a, b)
    if br.measured_coefficient is None:
        raise SpecError("--a: the adjacent-pair mass diverges at a = 0; need a > 0")
    match = br.coefficient_match()
    rows.append(_row("quad-adjacent-coefficient", br.measured_coefficient, br.paper_coefficient, match is not None))
    rows.append(_row("quad-adjacent-per-pair", br.measured_coefficient, 4.0, match == "per-pair"))
    return rows


def cmd_ktrig_check(args, cfg):
    K = ktrig.Curvature(args.curvature).K
    tol = args.tolerance or 1e-12
    rows = []
    x = np.linspace(-3.0, 3.0, 41) / max(1.0, math.sqrt(abs(K)))
    gap = float(np.max(np.abs(ktrig.sin_k_series(K, x) - ktrig.sin_k(K, x))))
    rows.append(_row("ktrig-sin-series", gap, 0.0, gap <= tol, n=len(x)))
    s = max(1.0, math.sqrt(abs(K)))
    tri = ktrig.KTriangle.from_sides(K, 0.8 / s, 1.0 / s, 1.3 / s)
    rows.append(_row("ktrig-sine-rule", tri.sine_rule_residual(), 0.0, tri.sine_rule_residual() <= 1e-9))
    rows.append(_row("ktrig-cosine-rule", tri.cosine_rule_residual(), 0.0, tri.cosine_rule_residual() <= 1e-9))
    r = 1.0 / s
    L, A = ktrig.k_disk(K, r)
    d = ktrig.general_defect(K, L, A)
    rows.append(_row("ktrig-disk-isoperimetric", d, 0.0, abs(d) <= tol * max(1.0, L * L)))
    if K == 0.0:
        rep = ktrig.general_ap_identity(0.0, ktrig.EuclideanPolygon([[0, 0], [1, 0], [1, 1], [0, 1]]),
                                        ids.test_function("one"), tolerance=args.tolerance or 1e-6)
        rows.append(_row("ktrig-ap-unit-square", rep.lhs.value, 4.0, abs(rep.lhs.value - 4.0) <= 1e-6))
        rows.append(_report_row(rep, "ktrig-ap-identity"))
    elif K < 0.0:
        core = ktrig.embed(ktrig.EuclideanPolygon.regular(5, 1.0), K)
        for lab in ("x", "sinh"):
            rep = ktrig.general_ap_identity(K, core, ids.test_function(lab), cfg, args.tolerance or 1e-6)
            rows.append(_report_row(rep, f"ktrig-ap-identity[{lab}]"))
    return rows


def cmd_charts(args, cfg):
    tol = args.tolerance or 1e-8
    m = chart_measures(PlanePoint(-0.3, 1.0), PlanePoint(0.2, 1.3), PlanePoint(-0.1, 2.0), PlanePoint(0.4, 2.4),
                       frame=Frame(PlanePoint(0.1, 1.5), 0.3))
    rows = [
        _row("charts-endpoint-incidence", m.endpoint, m.incidence, abs(m.endpoint - m.incidence) <= tol),
        _row("charts-endpoint-polar", m.endpoint, m.polar, abs(m.endpoint - m.polar) <= tol),
        _row("charts-incidence-polar", m.incidence, m.polar, abs(m.incidence - m.polar) <= tol),
        _row("charts-crossed-diagonals", m.endpoint, m.crossed_diagonals, abs(m.endpoint - m.crossed_diagonals) <= tol),
    ]
    rng = np.random.default_rng(args.seed)
    polar, inc = [], []
    host = OrientedGeodesic.from_frame(Frame(PlanePoint(0.3, 1.2), 0.4))
    while len(polar) < 100:
        try:
            polar.append(abs(polar_incidence_jacobian(PolarSample(rng.uniform(0.01, 1.5), rng.uniform(0, 2 * math.pi)))))
        except NonTransversalError:
            pass
    for _ in range(100):
        inc.append(abs(incidence_endpoint_jacobian(IncidenceSample(rng.uniform(-1, 1), rng.uniform(0.1, 3.0), host))))
    rows.append(_row("charts-jacobian-polar-incidence", max(polar), 0.0, max(polar) <= 1e-6, n=100))
    rows.append(_row("charts-jacobian-incidence-endpoint", max(inc), 0.0, max(inc) <= 1e-6, n=100))
    return rows


HANDLERS: dict[str, Callable] = {
    "crofton": cmd_crofton, "ap-check": cmd_ap_check, "pleijel-disk": cmd_pleijel_disk,
    "isoperimetric": cmd_isoperimetric, "santalo": cmd_santalo, "unit-tangent": cmd_unit_tangent,
    "tri-dist": cmd_tri_dist, "quad-dist": cmd_quad_dist, "ktrig-check": cmd_ktrig_check,
    "charts-consistency": cmd_charts,
}


# ---------------------------------------------------------------- output


def render(rows: list[ReportRow], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([r.as_dict() for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow(r.values())
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".report-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(args) -> int:
    cfg = IntegratorConfig(seed=args.seed, samples=args.samples, shards=args.shards, quad_order=args.quad_order)
    start = time.perf_counter()
    raw = HANDLERS[args.command](args, cfg)
    wall = None if args.no_timing else 1e3 * (time.perf_counter() - start)
    rows = [ReportRow(wall_ms=wall, seed=args.seed, **r) for r in raw]
    text = render(rows, args.format)
    if args.output:
        write_atomic(args.output, text)
    else:
        sys.stdout.write(text)
    return 0 if all(r.passed for r in rows) else 1


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except (SpecError, ids.DivergentMassError) as exc:
        print(f"liouville: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
