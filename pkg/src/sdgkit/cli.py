"""Command-line front end: ``sdgkit <subcommand> [options]``.

Subcommands: verify, pair, flow, pde-residual, wave, heat, diffuse, taylor.
Every command prints one JSON document (default) or CSV on stdout.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import algebra as alg
from .algebra import Jet
from .distributions import pair, pair_jet_time
from .errors import ParseError, SDGError
from .evolution import (
    column_diagram, column_diagram_numeric, columns_to_distribution, heat_state,
    heat_time_derivative, maclaurin, wave_fundamental,
)
from .flows import formal_flow, pde_residual
from .parser import (
    evaluate, format_distribution, format_expr, parse_ast, parse_distribution,
    parse_function, parse_scalar, parse_vector_field,
)
from .quadrature import DEFAULT_QUAD_ORDER
from .smooth import DEFAULT_MAX_ORDER, laplacian_fn, taylor
from .suite import DEFAULT_TOLERANCES, SuiteConfig, jsonable, report_to_csv, report_to_json, run_suite


def _parse_tol(values):
    """['1e-6', 'a4=1e-7'] -> (global, {glob: value})."""
    glob, overrides = None, {}
    for v in values or []:
        if "=" in v:
            key, _, val = v.partition("=")
            overrides[key.strip()] = float(val)
        else:
            glob = float(v)
    return glob, overrides


def _add_globals(p, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--quad-order", type=int, default=d(DEFAULT_QUAD_ORDER),
                   help="quadrature order (nodes per direction)")
    p.add_argument("--jet-order", type=int, default=d(DEFAULT_MAX_ORDER),
                   help="maximum jet (derivative) order")
    p.add_argument("--tol", action="append", default=d(None), metavar="[ID=]VALUE",
                   help="tolerance: a global value or a per-identity override; repeatable")
    p.add_argument("--format", choices=("json", "csv"), default=d("json"))
    p.add_argument("--exact", action="store_true", default=d(False),
                   help="rational arithmetic for jet identities")
    p.add_argument("--only", default=d(None), metavar="GLOB", help="identity-id filter for verify")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdgkit", description="Nilpotent-jet distribution calculus toolkit.")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        _add_globals(p, suppress=True)
        return p

    p = cmd("verify", "run the identity-verification suite")
    p.add_argument("--dim", type=int, action="append", choices=(1, 2, 3), help="restrict to dimension(s)")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: SDG_KERNEL_THREADS)")
    p.add_argument("--summary", action="store_true", help="print only config and summary")

    p = cmd("pair", "pair a distribution with a test function")
    p.add_argument("--mu", required=True, help="distribution expression")
    p.add_argument("--phi", required=True, help="test-function expression")

    p = cmd("flow", "Taylor jet of the formal flow of a vector field")
    p.add_argument("--xi", required=True, help='principal part, e.g. "x^2" or "y, -x"')
    p.add_argument("--m", required=True, help="start point, comma separated")
    p.add_argument("--order", type=int, default=6)

    p = cmd("pde-residual", "residual du/dt + D_X u - eta(u)")
    p.add_argument("--u", required=True, help="u(t, x[, y, z])")
    p.add_argument("--xi", required=True, help="principal part of X")
    p.add_argument("--eta", default="0", help="eta(u), an expression in u")
    p.add_argument("--t", required=True, help="time value(s), comma separated")
    p.add_argument("--m", required=True, help="point(s); separate points with ';'")

    p = cmd("wave", "wave fundamental solutions")
    p.add_argument("--dim", type=int, required=True, choices=(1, 2, 3))
    p.add_argument("--kind", choices=("position", "speed"), required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--maclaurin", type=int, default=None, metavar="ORDER",
                   help="also emit Maclaurin coefficients of the formal solution")
    p.add_argument("--nu", default=None, help="initial speed for --maclaurin (default 0)")

    p = cmd("heat", "heat kernel states")
    p.add_argument("--t", type=float, default=None, help="time t >= 0")
    p.add_argument("--nilpotent-order", type=int, default=None, metavar="K",
                   help="use a nilpotent time t with t^(K+1) = 0")
    p.add_argument("--phi", default=None)
    p.add_argument("--n", type=int, default=0, help="time-derivative order for scalar t")
    p.add_argument("--maclaurin", type=int, default=None, metavar="ORDER")

    p = cmd("diffuse", "column diagram of K(d), d = h^3")
    p.add_argument("--h-epsilon", type=float, default=0.05, help="numeric stand-in for h")
    p.add_argument("--phi", default=None, help="optional test function to pair against")

    p = cmd("taylor", "Taylor jet of a test function along a line")
    p.add_argument("--phi", required=True)
    p.add_argument("--at", default=None, help="base point, comma separated (default 0)")
    p.add_argument("--direction", default=None, help="direction, comma separated (default e_1)")
    p.add_argument("--order", type=int, default=4)
    return parser


def _points(src: str, exact: bool) -> list:
    # float mode must not fall back to exact integer arithmetic
    return [parse_scalar(s.strip(), exact) if exact else float(parse_scalar(s.strip()))
            for s in src.split(",")]


def _check_order(order, args):
    if order > args.jet_order:
        raise SDGError(f"order {order} exceeds --jet-order {args.jet_order}")


def _cmd_verify(args):
    glob, overrides = _parse_tol(args.tol)
    cfg = SuiteConfig(quad_order=args.quad_order, jet_order=args.jet_order, exact=args.exact,
                      tol_global=glob, tol_overrides=overrides, only=args.only,
                      dims=tuple(sorted(set(args.dim))) if args.dim else None, threads=args.threads)
    report = run_suite(cfg)
    if args.summary:
        report = {"config": report["config"], "summary": report["summary"],
                  "failed": [e["identity_id"] for e in report["entries"] if not e["pass"]]}
        return report, (0 if not report["failed"] else 1), "json"
    text = report_to_csv(report) if args.format == "csv" else report_to_json(report)
    return text, (0 if report["summary"]["all_pass"] else 1), "raw"


def _cmd_pair(args):
    mu = parse_distribution(args.mu, args.exact)
    phi = parse_function(args.phi, dim=mu.dim, exact=args.exact)
    value = pair(mu, phi, args.quad_order)
    return {"mu": format_distribution(mu), "phi": format_expr(phi.expr), "value": jsonable(value)}, 0, "json"


def _cmd_flow(args):
    _check_order(args.order, args)
    X = parse_vector_field(args.xi, exact=args.exact)
    m = _points(args.m, args.exact)
    jets = formal_flow(X, m, args.order)
    return {"xi": X.name, "m": jsonable(m), "order": args.order,
            "jets": [jsonable(j) for j in jets],
            "text": [str(j) for j in jets]}, 0, "json"


def _cmd_pde_residual(args):
    X = parse_vector_field(args.xi, exact=args.exact)
    names = ("t",) + ("x", "y", "z")[:X.dim]
    u_ast = parse_ast(args.u, names)
    eta_ast = parse_ast(args.eta, ("u",))
    u = lambda t, *x: evaluate(u_ast, dict(zip(names, (t, *x))), args.exact)
    eta = lambda v: evaluate(eta_ast, {"u": v}, args.exact)
    ts = _points(args.t, args.exact)
    ms = [_points(p, args.exact) for p in args.m.split(";")]
    tol, _ = _parse_tol(args.tol)
    tol = DEFAULT_TOLERANCES["cov"] if tol is None else tol
    rows = []
    for t in ts:
        for m in ms:
            r = pde_residual(u, X, eta, t, m)
            rows.append({"t": jsonable(t), "m": jsonable(m), "residual": jsonable(r),
                         "pass": bool(abs(r) <= tol)})
    return {"u": format_expr(u_ast), "xi": X.name, "eta": format_expr(eta_ast), "tolerance": tol,
            "rows": rows}, (0 if all(r["pass"] for r in rows) else 1), "json"


def _cmd_wave(args):
    sol = wave_fundamental(args.dim, args.kind)
    phi = parse_function(args.phi, dim=args.dim)
    m = args.quad_order
    jet = pair_jet_time(sol.family, args.t, 2, phi, m)
    lap = pair(sol.family(args.t), laplacian_fn(phi), m)
    residual = 2 * jet.coeffs[2] - lap
    tol, _ = _parse_tol(args.tol)
    tol = DEFAULT_TOLERANCES["wave"] if tol is None else tol
    out = {
        "solution": sol.family.name, "dim": args.dim, "kind": args.kind, "t": args.t,
        "phi": format_expr(phi.expr),
        "pairing": jet.coeffs[0], "d_dt": jet.coeffs[1], "d2_dt2": 2 * jet.coeffs[2],
        "laplacian_pairing": lap, "residual": residual, "tolerance": tol,
        "pass": bool(abs(residual) <= tol),
        "initial_value": pair(sol.initial_value, phi, m), "initial_speed": pair(sol.initial_speed, phi, m),
    }
    if args.maclaurin is not None:
        _check_order(args.maclaurin, args)
        nu = parse_distribution(args.nu, args.exact) if args.nu else None
        out["maclaurin"] = jsonable(maclaurin("wave", phi, args.maclaurin, nu=nu,
                                              max_order=args.jet_order, quad_order=m))
    return out, 0, "json"


def _cmd_heat(args):
    m = args.quad_order
    phi = parse_function(args.phi, dim=1, exact=args.exact) if args.phi else None
    out = {}
    if args.nilpotent_order is not None:
        k = args.nilpotent_order
        _check_order(k, args)
        t = Jet.variable(k)
        state = heat_state(t)
        out["nilpotent_order"] = k
        # term i is (t^i/i!) Delta^i delta(0); report the t^i coefficient 1/i!
        out["terms"] = [{"power": i, "coefficient": jsonable(c.coeffs[i] if alg.is_algebra(c) else c),
                         "distribution": format_distribution(d)}
                        for i, (c, d) in enumerate(state.terms)]
        if phi is not None:
            out["pairing_jet"] = jsonable(pair(state, phi, m))
    if args.t is not None:
        out["t"] = args.t
        state = heat_state(args.t)
        out["state"] = format_distribution(state)
        if phi is not None:
            out["pairing"] = pair(state, phi, m)
            if args.t > 0 and args.n:
                out["time_derivative"] = {"n": args.n, "value": heat_time_derivative(args.n, args.t, phi, m)}
    if args.maclaurin is not None:
        if phi is None:
            raise SDGError("--maclaurin needs --phi")
        _check_order(args.maclaurin, args)
        out["maclaurin"] = jsonable(maclaurin("heat", phi, args.maclaurin, max_order=args.jet_order, quad_order=m))
    if not out:
        raise SDGError("heat needs --t or --nilpotent-order")
    if phi is not None:
        out["phi"] = format_expr(phi.expr)
    return out, 0, "json"


def _cmd_diffuse(args):
    cols = column_diagram(3)
    eps = args.h_epsilon
    rows = []
    for (pos, height), (npos, nheight) in zip(cols, column_diagram_numeric(eps)):
        rows.append({"position_jet": jsonable(pos), "height_jet": jsonable(height),
                     "position": npos, "height": nheight})
    out = {"h_order": 3, "d": "h^3", "epsilon": eps, "columns": rows,
           "total_mass_jet": jsonable(sum((h for _, h in cols), 0)),
           "total_mass": sum(r["height"] for r in rows)}
    if args.phi:
        phi = parse_function(args.phi, dim=1, exact=args.exact)
        h = cols[0][1]
        out["phi"] = format_expr(phi.expr)
        out["pairing_columns"] = jsonable(pair(columns_to_distribution(cols), phi, args.quad_order))
        out["pairing_heat"] = jsonable(pair(heat_state(h * h * h), phi, args.quad_order))
    return out, 0, "json"


def _cmd_taylor(args):
    _check_order(args.order, args)
    phi = parse_function(args.phi, exact=args.exact)
    at = _points(args.at, args.exact) if args.at else [0 if args.exact else 0.0] * phi.dim
    direction = _points(args.direction, args.exact) if args.direction else None
    if len(at) != phi.dim:
        phi = parse_function(args.phi, dim=len(at), exact=args.exact)
    jet = taylor(phi, at, direction, args.order)
    return {"phi": format_expr(phi.expr), "at": jsonable(at), "order": args.order,
            "coefficients": jsonable(jet), "text": str(jet)}, 0, "json"


COMMANDS = {
    "verify": _cmd_verify, "pair": _cmd_pair, "flow": _cmd_flow, "pde-residual": _cmd_pde_residual,
    "wave": _cmd_wave, "heat": _cmd_heat, "diffuse": _cmd_diffuse, "taylor": _cmd_taylor,
}


def _to_csv(data: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    table = next((k for k in ("rows", "columns", "terms") if isinstance(data.get(k), list)), None)
    if table and data[table] and isinstance(data[table][0], dict):
        cols = list(data[table][0])
        w.writerow(cols)
        for row in data[table]:
            w.writerow([json.dumps(row[c]) if isinstance(row[c], (list, dict)) else row[c] for c in cols])
        return buf.getvalue()
    w.writerow(("key", "value"))
    for k in sorted(data):
        v = data[k]
        w.writerow((k, json.dumps(v) if isinstance(v, (list, dict)) else v))
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        data, code, kind = COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        if exc.source is not None and exc.position is not None:
            print(f"  {exc.source}\n  {' ' * exc.position}^", file=sys.stderr)
        return 2
    except (SDGError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if kind == "raw":
        text = data
    elif args.format == "csv":
        text = _to_csv(jsonable(data))
    else:
        text = json.dumps(jsonable(data), sort_keys=True, indent=2)
    sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
