"""Command-line front end.

Exit codes: 0 success, 2 bad input, 3 a check failed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .curves import (cusps_well_separated, load_curve_json, named_curve, random_test_point,
                     random_trig_curve, verify_prop24)
from .errors import FTCError, InvalidSpinorialData, ParameterOutOfRange, PoleOnPath
from .hitting import (Line3, against_set_planar, against_set_spatial, check_reflection_family,
                      preimages_of_line, random_line)
from .interpolate import InterpolationProblem, solve
from .meromorphic import INF
from .weierstrass import (SpinorialSurface, SurfaceEvaluator, check_regular_complete,
                          invariants, load_catalog)

EXIT_OK, EXIT_INPUT, EXIT_CHECK = 0, 2, 3
MESH_MARGIN = 1e-6


class InputError(ValueError):
    pass


class CheckFailed(Exception):
    pass


# -- helpers -----------------------------------------------------------------------

def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _provenance(args) -> dict:
    keep = {k: v for k, v in vars(args).items() if k not in ("func",) and v is not None}
    return {"program": "ftcsurf", "version": __version__, "config": keep,
            "catalog": os.environ.get("FTC_CATALOG_PATH", "bundled")}


def _parse_floats(text: str, n: int | None = None, what: str = "values") -> list:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise InputError(f"bad {what} {text!r}") from exc
    if n is not None and len(vals) != n:
        raise InputError(f"{what} needs {n} comma-separated numbers, got {text!r}")
    return vals


def load_surface(source: str) -> SpinorialSurface:
    """A catalog name, or a path to a surface JSON file."""
    if os.path.isfile(source):
        try:
            with open(source, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{source}: malformed JSON ({exc})") from exc
        if isinstance(data, dict) and "surface" in data:
            data = data["surface"]
        return SpinorialSurface.from_json(data)
    cat = load_catalog()
    if source not in cat:
        raise InputError(f"unknown surface {source!r}: not a file and not in the catalog "
                         f"({', '.join(sorted(cat))})")
    return cat[source][0]


# -- mesh ----------------------------------------------------------------------------

def parse_grid(spec: str) -> dict:
    """annulus:r0,r1,nr,nt[,cx,cy] | disk:R,nr,nt[,cx,cy] | rect:x0,x1,y0,y1,nx,ny"""
    kind, _, rest = spec.partition(":")
    vals = _parse_floats(rest, what="grid")
    if kind == "annulus" and len(vals) in (4, 6):
        g = {"kind": kind, "r0": vals[0], "r1": vals[1], "nr": int(vals[2]), "nt": int(vals[3]),
             "center": complex(*vals[4:6]) if len(vals) == 6 else 0j}
        if g["nr"] < 1 or g["nt"] < 3 or not 0 < g["r0"] < g["r1"]:
            raise InputError(f"degenerate annulus grid {spec!r}")
    elif kind == "disk" and len(vals) in (3, 5):
        g = {"kind": kind, "r1": vals[0], "nr": int(vals[1]), "nt": int(vals[2]),
             "center": complex(*vals[3:5]) if len(vals) == 5 else 0j}
        if g["nr"] < 1 or g["nt"] < 3 or not g["r1"] > 0:
            raise InputError(f"degenerate disk grid {spec!r}")
    elif kind == "rect" and len(vals) == 6:
        g = {"kind": kind, "x0": vals[0], "x1": vals[1], "y0": vals[2], "y1": vals[3],
             "nx": int(vals[4]), "ny": int(vals[5])}
        if g["nx"] < 1 or g["ny"] < 1 or not (g["x0"] < g["x1"] and g["y0"] < g["y1"]):
            raise InputError(f"degenerate rectangular grid {spec!r}")
    else:
        raise InputError(f"bad grid spec {spec!r}")
    return g


def grid_mesh(grid: dict):
    """Parameter points (complex) and triangles (vertex index triples)."""
    tris = []
    if grid["kind"] in ("annulus", "disk"):
        nr, nt, c = grid["nr"], grid["nt"], grid["center"]
        th = 2 * np.pi * np.arange(nt) / nt
        if grid["kind"] == "annulus":
            radii = np.linspace(grid["r0"], grid["r1"], nr + 1)
            pts = (c + radii[:, None] * np.exp(1j * th)[None, :]).ravel()
            rings = range(nr)
            off = 0
        else:
            radii = np.linspace(0, grid["r1"], nr + 1)[1:]
            pts = np.concatenate([[c], (c + radii[:, None] * np.exp(1j * th)[None, :]).ravel()])
            for j in range(nt):
                tris.append((0, 1 + j, 1 + (j + 1) % nt))
            rings = range(nr - 1)
            off = 1
        for i in rings:
            for j in range(nt):
                a = off + i * nt + j
                b = off + i * nt + (j + 1) % nt
                tris.append((a, b, a + nt))
                tris.append((b, b + nt, a + nt))
    else:
        xs = np.linspace(grid["x0"], grid["x1"], grid["nx"] + 1)
        ys = np.linspace(grid["y0"], grid["y1"], grid["ny"] + 1)
        X, Y = np.meshgrid(xs, ys)
        pts = (X + 1j * Y).ravel()
        w = grid["nx"] + 1
        for i in range(grid["ny"]):
            for j in range(grid["nx"]):
                a = i * w + j
                tris.append((a, a + 1, a + w))
                tris.append((a + 1, a + w + 1, a + w))
    return np.asarray(pts, dtype=complex), np.array(tris, dtype=int)


def _grid_hits_end(s: SpinorialSurface, grid: dict) -> complex | None:
    for e in s.finite_ends:
        if grid["kind"] == "rect":
            inside = (grid["x0"] - MESH_MARGIN <= e.real <= grid["x1"] + MESH_MARGIN
                      and grid["y0"] - MESH_MARGIN <= e.imag <= grid["y1"] + MESH_MARGIN)
        else:
            d = abs(e - grid["center"])
            lo = grid.get("r0", 0.0)
            inside = lo - MESH_MARGIN <= d <= grid["r1"] + MESH_MARGIN
        if inside:
            return e
    return None


def build_mesh(s: SpinorialSurface, grid: dict):
    """Vertices X(z) and triangles over a parameter grid that avoids the ends."""
    e = _grid_hits_end(s, grid)
    if e is not None:
        raise PoleOnPath(f"grid reaches the end at {e}")
    z, tris = grid_mesh(grid)
    X = SurfaceEvaluator(s)(z)
    return z, X, tris


def boundary_loops(tris) -> int:
    """Number of closed boundary curves of a triangle mesh."""
    count = {}
    for t in tris:
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            key = (min(a, b), max(a, b))
            count[key] = count.get(key, 0) + 1
    edges = [k for k, v in count.items() if v == 1]
    adj = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    seen, loops = set(), 0
    for v in adj:
        if v in seen:
            continue
        loops += 1
        stack = [v]
        while stack:
            u = stack.pop()
            if u in seen:
                continue
            seen.add(u)
            stack.extend(adj[u])
    return loops


def mesh_to_obj(X, tris, header: dict) -> str:
    lines = ["# ftcsurf mesh"] + [f"# {k}: {json.dumps(v, sort_keys=True)}" for k, v in
                                   sorted(header.items())]
    lines += [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in X]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in tris]
    return "\n".join(lines) + "\n"


# -- commands ------------------------------------------------------------------------

def cmd_catalog(args) -> int:
    cat = load_catalog()
    if args.name:
        if args.name not in cat:
            raise InputError(f"unknown catalog surface {args.name!r}")
        _emit(_dump(cat[args.name][0].to_json()), args.out)
        return EXIT_OK
    rows, ok = [], True
    for name in sorted(cat):
        s, prov = cat[name]
        reg = check_regular_complete(s)
        try:
            inv = invariants(s)
            jm = True
        except FTCError:
            inv, jm = None, False
        ok &= reg.passed and jm
        rows.append({"name": name, "provenance": prov, "regular": reg.passed, "jorge_meeks": jm,
                     "degN": None if inv is None else inv.degN})
    if args.json:
        _emit(_dump({"surfaces": rows, "provenance": _provenance(args)}), args.out)
    else:
        text = "".join(f"{r['name']}\tdegN={r['degN']}\tregular={r['regular']}\t"
                       f"jorge_meeks={r['jorge_meeks']}\t{r['provenance']}\n" for r in rows)
        _emit(text, args.out)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_invariants(args) -> int:
    s = load_surface(args.surface)
    reg = check_regular_complete(s)
    inv = invariants(s)
    rep = {"surface": s.name or args.surface, "invariants": inv.to_json(),
           "regularity": reg.to_json(), "provenance": _provenance(args)}
    if args.json:
        text = _dump(rep)
    else:
        ends = ", ".join(f"{'inf' if e is INF else complex(e)}:{i}" for e, i in inv.endOrders.items())
        text = (f"surface: {rep['surface']}\n"
                f"degN: {inv.degN}\n"
                f"total_curvature: {inv.totalCurvature:.12g} (= {inv.totalCurvature / math.pi:.6g} pi)\n"
                f"euler_characteristic: {inv.eulerChar}\n"
                f"end_orders: {ends}\n"
                f"hitting_bound: {inv.hittingBound}\n"
                f"regular_complete: {reg.passed}\n")
        for f in reg.failures():
            text += f"  failure: {f}\n"
    _emit(text, args.out)
    return EXIT_OK if reg.passed else EXIT_CHECK


def cmd_export_mesh(args) -> int:
    s = load_surface(args.surface)
    grid = parse_grid(args.grid)
    z, X, tris = build_mesh(s, grid)
    header = {"surface": s.name or args.surface, "grid": args.grid,
              "vertices": len(X), "triangles": len(tris), "provenance": _provenance(args)}
    _emit(mesh_to_obj(X, tris, header), args.out)
    return EXIT_OK


def cmd_hitcount(args) -> int:
    s = load_surface(args.surface)
    if args.line:
        try:
            lines = [Line3.parse(args.line)]
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    else:
        rng = np.random.default_rng(args.seed or 0)
        lines = [random_line(rng) for _ in range(args.random)]
    reports = [preimages_of_line(s, L, grid=args.grid, seed=args.seed or 0) for L in lines]
    bad = [r for r in reports if r.certificateStatus == "bound_violated"]
    if args.json or len(reports) > 1:
        payload = [r.to_json() for r in reports]
        text = _dump({"reports": payload if len(payload) > 1 else payload[0],
                      "violations": len(bad), "provenance": _provenance(args)})
    else:
        r = reports[0]
        text = f"count: {r.count}\nbound: {r.bound}\nstatus: {r.certificateStatus}\n"
        for (z, X, d), m in zip(r.preimages, r.multiplicities):
            text += f"  z={z.real:.12g}{z.imag:+.12g}i  X=({X[0]:.10g}, {X[1]:.10g}, {X[2]:.10g})\n"
        for w in r.warnings:
            text += f"warning: {w}\n"
    _emit(text, args.out)
    return EXIT_CHECK if bad else EXIT_OK


def cmd_hitset(args) -> int:
    make = against_set_spatial if args.spatial else against_set_planar
    A = make(args.r, args.m)
    if args.json:
        payload = A.to_json()
        if args.reflections:
            payload["reflection_group"] = check_reflection_family(A.lines).to_json()
        payload["provenance"] = _provenance(args)
        _emit(_dump(payload), args.out)
    else:
        _emit(A.to_xyz(), args.out)
    return EXIT_OK


def cmd_interpolate(args) -> int:
    try:
        with open(args.problem, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read problem {args.problem}: {exc}") from exc
    try:
        prob = InterpolationProblem.from_json(data)
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad problem JSON: {exc}") from exc
    kw = {"seed": args.seed or 0}
    if args.tol is not None:
        kw["tol"] = args.tol
    res = solve(prob, **kw)
    _emit(_dump({"surface": res.surface.to_json(), "report": res.report.to_json(),
                 "provenance": _provenance(args)}), args.out)
    rep = res.report
    ok = rep.interpolation_error < 1e-6 and rep.period_residual < 1e-8 and rep.flux_error < 1e-8
    return EXIT_OK if ok else EXIT_CHECK


def _load_curve(source: str):
    if os.path.isfile(source):
        try:
            with open(source, encoding="utf-8") as fh:
                return load_curve_json(json.load(fh))
        except json.JSONDecodeError as exc:
            raise InputError(f"{source}: malformed JSON ({exc})") from exc
    try:
        return named_curve(source)
    except KeyError as exc:
        raise InputError(str(exc)) from exc


def cmd_curve(args) -> int:
    if args.curve == "random":
        rng = np.random.default_rng(args.seed or 0)
        rows, fails, k = ["id,w,t,pass"], 0, 0
        while k < args.count:
            c = random_trig_curve(rng)
            if not cusps_well_separated(c):
                continue
            r = verify_prop24(c, random_test_point(c, rng), curve_id=f"random{k:05d}")
            rows.append(r.csv_row())
            fails += not r.passed
            k += 1
        _emit("\n".join(rows) + "\n", args.out)
        return EXIT_CHECK if fails else EXIT_OK
    c = _load_curve(args.curve)
    p = complex(*_parse_floats(args.point, 2, "point"))
    r = verify_prop24(c, p, seed=args.seed or 0, curve_id=c.name)
    if args.json:
        _emit(_dump({**r.to_json(), "provenance": _provenance(args)}), args.out)
    else:
        _emit(f"{c.name}: w={r.w} t={r.t} {'pass' if r.passed else 'fail'}\n", args.out)
    return EXIT_OK if r.passed else EXIT_CHECK


# -- parser --------------------------------------------------------------------------

def _common(default):
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=default, help="random seed")
    p.add_argument("--tol", type=float, default=default, help="solver tolerance (interpolate)")
    p.add_argument("--out", default=default, help="output file (default: stdout)")
    p.add_argument("--json", action="store_true", default=default if default is not None else False,
                   help="JSON output")
    return p


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="ftcsurf", parents=[_common(None)],
                                  description="Minimal surfaces of finite total curvature.")
    sub_common = _common(argparse.SUPPRESS)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", parents=[sub_common], help="list or export catalog surfaces")
    p.add_argument("name", nargs="?", help="export this surface as JSON")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("invariants", parents=[sub_common], help="invariants and regularity")
    p.add_argument("surface", help="catalog name or surface JSON file")
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("export-mesh", parents=[sub_common], help="triangulated mesh (OBJ)")
    p.add_argument("surface")
    p.add_argument("--grid", required=True,
                   help="annulus:r0,r1,nr,nt[,cx,cy] | disk:R,nr,nt[,cx,cy] | rect:x0,x1,y0,y1,nx,ny")
    p.set_defaults(func=cmd_export_mesh)

    p = sub.add_parser("hitcount", parents=[sub_common], help="count preimages of lines")
    p.add_argument("surface")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--line", help="x,y,z:dx,dy,dz")
    g.add_argument("--random", type=int, help="number of seeded random lines")
    p.add_argument("--grid", type=int, default=25, help="seed grid density")
    p.set_defaults(func=cmd_hitcount)

    p = sub.add_parser("hitset", parents=[sub_common], help="against-set point configuration")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--spatial", action="store_true", help="add the off-plane point")
    p.add_argument("--reflections", action="store_true",
                   help="with --json, test whether the line reflections generate a finite group")
    p.set_defaults(func=cmd_hitset)

    p = sub.add_parser("interpolate", parents=[sub_common], help="solve an interpolation problem")
    p.add_argument("problem", help="problem JSON file")
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("curve", parents=[sub_common], help="winding/turning check for a curve")
    p.add_argument("curve", help="generator name, curve JSON file, or 'random'")
    p.add_argument("--point", default="0,0", help="x,y test point")
    p.add_argument("--count", type=int, default=100, help="number of random curves")
    p.set_defaults(func=cmd_curve)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, InvalidSpinorialData, ParameterOutOfRange, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FTCError, CheckFailed) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
