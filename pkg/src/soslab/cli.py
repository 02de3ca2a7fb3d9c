"""Command-line front end: bounds, certification, and rate experiments.

Subcommands: upper, lower, push, certify, rates, pkm, stability, density.
Reports are JSON with the fully resolved configuration echoed back, all
numbers printed with 12 significant digits. Exit codes: 0 success,
1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .cubature import rule
from .domains import Domain, domain_of_measure, grid_minimum
from .instances import (
    brute_force_alpha,
    cycle_graph,
    motzkin,
    parse_edge_list,
    stability_objective_reduced,
)
from .lowerbound import (
    PUTINAR,
    SCHMUDGEN,
    LowerBoundError,
    builtin_set,
    certify_sos,
    lb,
    set_domain,
)
from .measures import BallMeasure, BoxJacobi, Measure, SimplexMeasure, SphereMeasure
from .orthopoly import JacobiWeight, eval_basis, recurrence_coefficients
from .poly import (
    Polynomial,
    PolynomialSyntaxError,
    affine_map_to_unit_box,
    parse_polynomial,
)
from .rates import RateSeries, make_rate_series, parse_r_range, series_csv, series_svg
from .upperbound import (
    DegenerateMomentMatrixError,
    CubatureExactnessError,
    cubature_check,
    pushforward_moments,
    ub,
    ub_pushforward,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _round12(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(f"{float(obj):.12g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


_SET_NAME = re.compile(
    r"^(box|ball|simplex|sphere)(\d*)(?:-(chebyshev|legendre|uniform|lebesgue))?$"
)

_DEFAULT_BOX_LAMBDA = -0.5  # the Chebyshev pair is the canonical box row


def parse_measure(measure: str | None, set_name: str | None, n: int | None) -> Measure:
    """Resolve a measure from --measure 'kind:k=v,...' or a --set shorthand
    such as 'box1-chebyshev' (with --n for bare family names)."""
    if measure:
        kind, _, rest = measure.partition(":")
        params: dict[str, str] = {}
        if rest:
            for item in rest.split(","):
                key, _, val = item.partition("=")
                if not val:
                    raise UsageError(f"bad measure parameter {item!r}")
                params[key.strip()] = val.strip()
        nv = int(params.pop("n", n or 0))
        if nv < 1:
            raise UsageError("measure needs a variable count (n=... or --n)")
        if kind == "box":
            lam = params.pop("lambda", str(_DEFAULT_BOX_LAMBDA))
            lambdas = [float(v) for v in lam.split(";")]
            if len(lambdas) == 1:
                lambdas = lambdas * nv
            m = BoxJacobi(nv, lambdas)
        elif kind == "ball":
            m = BallMeasure(nv, float(params.pop("lambda", "0")))
        elif kind == "simplex":
            m = SimplexMeasure(nv)
        elif kind == "sphere":
            m = SphereMeasure(nv)
        else:
            raise UsageError(f"unknown measure kind {kind!r}")
        if params:
            raise UsageError(f"unused measure parameters {sorted(params)}")
        return m
    if set_name:
        match = _SET_NAME.match(set_name)
        if not match:
            raise UsageError(f"unrecognized set name {set_name!r}")
        family, digits, flavor = match.groups()
        nv = int(digits) if digits else (n or 0)
        if nv < 1:
            raise UsageError("set needs a variable count (suffix or --n)")
        if family == "box":
            lam = 0.0 if flavor in ("legendre", "lebesgue") else _DEFAULT_BOX_LAMBDA
            return BoxJacobi(nv, lam)
        if family == "ball":
            return BallMeasure(nv, 0.0)
        if family == "simplex":
            return SimplexMeasure(nv)
        return SphereMeasure(nv)
    raise UsageError("provide --measure or --set")


def _parse_f(args, nvars: int) -> Polynomial:
    if not args.f:
        raise UsageError("--f is required")
    return parse_polynomial(args.f, nvars)


def _emit(report: dict, args) -> None:
    payload = json.dumps(_round12(report), indent=2)
    # handlers that already wrote a data file to --out mark it consumed;
    # otherwise --out receives the JSON report
    if getattr(args, "out", None) and not getattr(args, "_out_consumed", False):
        Path(args.out).write_text(payload + "\n")
    print(payload)


def _series_report(series: RateSeries) -> dict:
    return {
        "label": series.label,
        "reference": series.reference,
        "reference_kind": series.reference_kind,
        "fitted_slope": series.fitted_slope,
        "fit_range": list(series.fit_range) if series.fit_range else None,
        "entries": [
            {"r": r, "bound": v, "error": e} for r, v, e in series.entries
        ],
        "diagnostics": series.diagnostics,
    }


def _write_series_outputs(series: RateSeries, args) -> None:
    if getattr(args, "plot", None):
        Path(args.plot).write_text(series_svg(series))
    fmt = getattr(args, "format", "json")
    if getattr(args, "out", None) and fmt == "csv":
        Path(args.out).write_text(series_csv(series))
        args._out_consumed = True


# ---------------------------------------------------------------------------
# subcommand handlers


def cmd_upper(args) -> dict:
    m = parse_measure(args.measure, args.set, args.n)
    f = _parse_f(args, m.nvars)
    orders = parse_r_range(args.r)
    t0 = time.time()
    rows = []
    res = None
    for r in orders:
        res = ub(f, m, r, method=args.method)
        rows.append({"r": r, "value": res.value, "basis_rank": res.basis.rank})
    report = {
        "command": "upper",
        "config": {
            "f": args.f,
            "measure": m.label(),
            "r": args.r,
            "method": args.method,
        },
        "results": rows,
        "value": rows[-1]["value"],
        "order": orders[-1],
        "density_integral": res.density_integral(),
        "seconds": time.time() - t0,
    }
    return report


def cmd_lower(args) -> dict:
    n = args.n or 0
    sd = builtin_set(args.set, n) if args.set else None
    if sd is None:
        raise UsageError("--set (box|ball|simplex|sphere) is required for lower")
    f = _parse_f(args, sd.nvars)
    t0 = time.time()
    rows = []
    result = None
    for r in parse_r_range(args.r):
        result = lb(f, sd, r, args.kind)
        rows.append(
            {
                "r": r,
                "value": result.value,
                "verified": result.verified,
                "status": result.status,
            }
        )
    if args.certificate_out and result is not None:
        Path(args.certificate_out).write_text(result.to_json())
    return {
        "command": "lower",
        "config": {
            "f": args.f,
            "set": sd.name,
            "r": args.r,
            "kind": args.kind,
        },
        "results": rows,
        "value": rows[-1]["value"],
        "verified": rows[-1]["verified"],
        "gram_min_eigenvalue": result.diagnostics.get("gram_min_eigenvalue"),
        "seconds": time.time() - t0,
    }


def cmd_push(args) -> dict:
    m = parse_measure(args.measure, args.set, args.n)
    f = _parse_f(args, m.nvars)
    orders = parse_r_range(args.r)
    t0 = time.time()
    rows = [{"r": r, "value": ub_pushforward(f, m, r)} for r in orders]
    kmax = min(2 * orders[-1] + 1, 16)
    moments = pushforward_moments(f, m, kmax)
    return {
        "command": "push",
        "config": {"f": args.f, "measure": m.label(), "r": args.r},
        "results": rows,
        "value": rows[-1]["value"],
        "pushforward_moments": list(moments.values),
        "seconds": time.time() - t0,
    }


def cmd_certify(args) -> dict:
    if not args.n:
        raise UsageError("--n is required for certify")
    f = _parse_f(args, args.n)
    t0 = time.time()
    res = certify_sos(f)
    report = {
        "command": "certify",
        "config": {"f": args.f, "n": args.n},
        "is_sos": res.is_sos,
        "separation_value": res.separation_value,
        "gram_basis_size": len(res.gram_basis),
        "diagnostics": {
            k: v for k, v in res.diagnostics.items() if isinstance(v, (int, float, str))
        },
        "seconds": time.time() - t0,
    }
    if res.is_sos and res.gram is not None:
        report["gram_min_eigenvalue"] = float(np.linalg.eigvalsh(res.gram)[0])
    if res.is_sos is False and res.moment_certificate is not None:
        report["moment_certificate"] = list(res.moment_certificate)
    return report


def cmd_rates(args) -> dict:
    orders = parse_r_range(args.r)
    if len(orders) < 3:
        raise UsageError("rates needs an r range such as 8..64")
    t0 = time.time()
    if args.bound == "upper":
        m = parse_measure(args.measure, args.set, args.n)
        f = _parse_f(args, m.nvars)
        rows = [(r, ub(f, m, r).value) for r in orders]
        dom = domain_of_measure(m)
        label = f"ub[{args.f}] on {m.label()}"
    else:
        sd = builtin_set(args.set, args.n or 0)
        f = _parse_f(args, sd.nvars)
        rows = [(r, lb(f, sd, r, args.kind).value) for r in orders]
        dom = set_domain(sd)
        label = f"lb[{args.f}] on {sd.name}"
    if args.reference is not None:
        reference, ref_kind = float(args.reference), "closed-form"
    else:
        reference, _ = grid_minimum(f, dom, npoints=args.grid_points)
        ref_kind = "grid-estimate"
    series = make_rate_series(label, rows, reference, ref_kind, args.skip_head)
    _write_series_outputs(series, args)
    report = {
        "command": "rates",
        "config": {
            "f": args.f,
            "bound": args.bound,
            "kind": args.kind,
            "r": args.r,
            "skip_head": args.skip_head,
            "measure_or_set": label,
        },
        "series": _series_report(series),
        "fitted_slope": series.fitted_slope,
        "seconds": time.time() - t0,
    }
    return report


def _gegenbauer_normalized(n: int, kmax: int) -> list[Polynomial]:
    """Univariate Gegenbauer family for the sphere in R^n, scaled to 1 at 1."""
    w = JacobiWeight((n - 3) / 2.0, (n - 3) / 2.0)
    rc = recurrence_coefficients(w, kmax + 1)
    polys = [Polynomial.constant(1, 1.0 / np.sqrt(rc.mass))]
    x = Polynomial.variable(1, 0)
    if kmax >= 1:
        polys.append((x - rc.b[0]).multiply(polys[0]).scale(1.0 / rc.a[0]))
    for k in range(1, kmax):
        nxt = (x - rc.b[k]).multiply(polys[k]) - polys[k - 1].scale(rc.a[k - 1])
        polys.append(nxt.scale(1.0 / rc.a[k]))
    out = []
    for p in polys:
        at_one = p.evaluate((1.0,))
        out.append(p.scale(1.0 / at_one))
    return out


def cmd_pkm(args) -> dict:
    n, d = args.nsphere, args.d
    if n < 3:
        raise UsageError("pkm needs the sphere dimension n >= 3")
    if d < 1:
        raise UsageError("pkm needs degree d >= 1")
    lam = (n - 3) / 2.0
    geg = _gegenbauer_normalized(n, d)
    g = Polynomial.constant(1, float(d))
    for k in range(1, d + 1):
        g = g - geg[k]
    m = BoxJacobi(1, lam)
    orders = parse_r_range(args.r)
    t0 = time.time()
    rows = []
    res = None
    for r in orders:
        res = ub(g, m, r)
        rows.append((r, res.value))
    series = make_rate_series(
        f"pkm(n={n},d={d})", rows, 0.0, "closed-form", args.skip_head
    )
    _write_series_outputs(series, args)
    # kernel coefficients lambda_k = int G_k * density for the last order
    pts, wts = rule(m, 2 * orders[-1] + d)
    dens = res.density_values(pts)
    lambdas = []
    for k in range(0, d + 1):
        vals = geg[k].evaluate_many(pts)
        lambdas.append(float(np.dot(wts, vals * dens)))
    return {
        "command": "pkm",
        "config": {"nsphere": n, "d": d, "r": args.r, "weight_lambda": lam},
        "g": g.to_string(),
        "g_at_one": g.evaluate((1.0,)),
        "series": _series_report(series),
        "opt": rows[-1][1],
        "fitted_slope": series.fitted_slope,
        "kernel_lambdas": lambdas,
        "seconds": time.time() - t0,
    }


def cmd_stability(args) -> dict:
    if args.cycle:
        n, edges = cycle_graph(args.cycle)
    elif args.edges:
        n, edges = parse_edge_list(Path(args.edges).read_text())
    else:
        raise UsageError("provide --edges FILE or --cycle N")
    if n < 2:
        raise UsageError("graph needs at least 2 vertices")
    t0 = time.time()
    alpha = brute_force_alpha(n, edges)
    fmin = 1.0 / alpha
    f = stability_objective_reduced(n, edges)
    sd = builtin_set("simplex", n - 1)
    lower = lb(f, sd, args.r_lower, args.kind)
    upper = ub(f, SimplexMeasure(n - 1), args.r_upper)
    slack = 1e-9
    bracket = lower.value <= fmin + slack and upper.value >= fmin - slack
    return {
        "command": "stability",
        "config": {
            "vertices": n,
            "edges": [list(e) for e in edges],
            "r_lower": args.r_lower,
            "r_upper": args.r_upper,
            "kind": args.kind,
        },
        "alpha": alpha,
        "f_min": fmin,
        "lower_bound": lower.value,
        "lower_verified": lower.verified,
        "upper_bound": upper.value,
        "bracket_holds": bracket,
        "alpha_bounds_implied": [1.0 / upper.value, 1.0 / lower.value],
        "seconds": time.time() - t0,
    }


def cmd_density(args) -> dict:
    t0 = time.time()
    if args.f:
        if not args.n:
            raise UsageError("--n is required with --f")
        f_phys = parse_polynomial(args.f, args.n)
        check_minimizers = False
    else:
        f_phys = motzkin()
        # the concentration assertion is meaningful from degree 2r = 16 on
        check_minimizers = 2 * args.r >= 16
    if f_phys.nvars != 2:
        raise UsageError("density needs a 2-variable instance")
    h = args.halfwidth
    lo = np.array([-h, -h])
    hi = np.array([h, h])
    f_unit = affine_map_to_unit_box(f_phys, lo, hi)
    m = BoxJacobi(2, 0.0)  # uniform (Lebesgue) reference measure
    res = ub(f_unit, m, args.r)
    grid = np.linspace(-h, h, args.grid)
    gx, gy = np.meshgrid(grid, grid, indexing="ij")
    pts_phys = np.column_stack([gx.ravel(), gy.ravel()])
    pts_unit = pts_phys / h
    dens = res.density_values(pts_unit)
    # midpoint-rule oracle for int sigma dmu (the dump grid includes the
    # endpoints, which would bias a plain mean)
    mids = -h + (np.arange(args.grid) + 0.5) * (2.0 * h / args.grid)
    mx, my = np.meshgrid(mids, mids, indexing="ij")
    riemann = float(
        np.mean(res.density_values(np.column_stack([mx.ravel(), my.ravel()]) / h))
    )
    lines = ["x,y,sigma"]
    for (x, y), s in zip(pts_phys, dens):
        lines.append(f"{x:.12g},{y:.12g},{s:.12g}")
    if args.out:
        Path(args.out).write_text("\n".join(lines) + "\n")
        args._out_consumed = True
    report = {
        "command": "density",
        "config": {
            "f": f_phys.to_string(),
            "halfwidth": h,
            "r": args.r,
            "grid": args.grid,
            "measure": m.label(),
        },
        "value": res.value,
        "density_riemann_integral": riemann,
        "seconds": time.time() - t0,
    }
    if check_minimizers:
        corners = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]) / h
        at_corners = res.density_values(corners)
        at_center = float(res.density_values(np.zeros((1, 2)))[0])
        report["density_at_minimizers"] = list(at_corners)
        report["density_at_origin"] = at_center
        if not np.all(at_corners > at_center):
            raise ArithmeticError(
                "density does not concentrate at the minimizers"
            )
    return report


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="soslab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"soslab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_measure=True):
        p.add_argument("--f", help="polynomial text, e.g. 'x1^2 + 2*x1*x2'")
        p.add_argument("--n", type=int, help="variable count")
        if with_measure:
            p.add_argument("--measure", help="measure spec kind:n=..,lambda=..")
        p.add_argument("--set", help="set/measure shorthand, e.g. box1-chebyshev")
        p.add_argument("--out", help="write the report/data to this path")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("upper", help="measure-based upper bound ub_r")
    common(p)
    p.add_argument("--r", required=True, help="order, or range lo..hi")
    p.add_argument(
        "--method", choices=("auto", "tensor", "quadrature", "moment"), default="auto"
    )
    p.set_defaults(handler=cmd_upper)

    p = sub.add_parser("lower", help="Positivstellensatz lower bound lb_r")
    common(p, with_measure=False)
    p.add_argument("--r", required=True)
    p.add_argument("--kind", choices=(PUTINAR, SCHMUDGEN), default=PUTINAR)
    p.add_argument("--certificate-out", help="write the certificate JSON here")
    p.set_defaults(handler=cmd_lower)

    p = sub.add_parser("push", help="push-forward upper bound ub#_r")
    common(p)
    p.add_argument("--r", required=True)
    p.set_defaults(handler=cmd_push)

    p = sub.add_parser("certify", help="decide SOS membership of a polynomial")
    common(p, with_measure=False)
    p.set_defaults(handler=cmd_certify)

    p = sub.add_parser("rates", help="sweep r and fit the log-log error slope")
    common(p)
    p.add_argument("--r", required=True, help="range lo..hi")
    p.add_argument("--bound", choices=("upper", "lower"), default="upper")
    p.add_argument("--kind", choices=(PUTINAR, SCHMUDGEN), default=PUTINAR)
    p.add_argument("--reference", type=float, help="known minimum (else grid)")
    p.add_argument("--grid-points", type=int, default=100_000)
    p.add_argument("--skip-head", type=int, default=2)
    p.add_argument("--plot", help="write a log-log SVG plot here")
    p.set_defaults(handler=cmd_rates)

    p = sub.add_parser("pkm", help="kernel-method univariate program opt(n, d)_r")
    p.add_argument("--nsphere", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--r", required=True, help="range lo..hi")
    p.add_argument("--skip-head", type=int, default=2)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--plot")
    p.set_defaults(handler=cmd_pkm)

    p = sub.add_parser("stability", help="stability-number bounds for a graph")
    p.add_argument("--edges", help="edge list file, one 'u v' per line, 1-based")
    p.add_argument("--cycle", type=int, help="use the n-cycle graph")
    p.add_argument("--r-lower", type=int, default=3)
    p.add_argument("--r-upper", type=int, default=10)
    p.add_argument("--kind", choices=(PUTINAR, SCHMUDGEN), default=SCHMUDGEN)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_stability)

    p = sub.add_parser("density", help="dump the optimal upper-bound density")
    p.add_argument("--f", help="2-variable polynomial (default: Motzkin)")
    p.add_argument("--n", type=int)
    p.add_argument("--halfwidth", type=float, default=2.0)
    p.add_argument("--r", type=int, default=8)
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--out", help="write the x,y,sigma CSV here")
    p.set_defaults(handler=cmd_density)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = args.handler(args)
    except (UsageError, PolynomialSyntaxError, FileNotFoundError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (
        LowerBoundError,
        DegenerateMomentMatrixError,
        CubatureExactnessError,
        ArithmeticError,
        np.linalg.LinAlgError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _emit(report, args)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
