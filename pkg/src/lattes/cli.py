"""Command-line front end.

Every run writes one JSON document ``{command, config, results, diagnostics,
certificates, versions}`` (numbers as decimal strings) plus optional CSV/SVG
views.  Wall-clock data lives in a ``.meta.json`` sidecar so the main JSON is
byte-identical across reruns of the same configuration.

Exit status: 0 success, 2 input error, 3 convergence failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
import tempfile
import time
from fractions import Fraction
from importlib import metadata
from pathlib import Path

import numpy as np

from .core import (
    ARCH,
    DegenerateParameter,
    InadmissiblePoint,
    InvariantViolation,
    LevelCapExceeded,
    Place,
    bad_places,
    closed_resultant,
    lift,
    orbit,
)
from .escape import (
    ComplexConstant,
    _first,
    arch_iteration,
    capacity_closed,
    capacity_limit,
    escape_arch,
    escape_at,
    first_resultant,
)
from .forms import form_resultant, fraction_str
from .heights import capacity_product, is_torsion, neron_tate, weil_limit
from .measure import (
    bifurcation_potential,
    distinct_check,
    equidist_report,
    grid_boxes,
    rho_lambda,
    total_mass,
)
from .parse import ParseError, parse_marked_point
from .quadrature import QuadratureError
from .roots import RootFindingError
from .svg import heatmap, scatter
from .torsion import torsion_set

EXIT_OK, EXIT_INPUT, EXIT_CONVERGENCE = 0, 2, 3


class InputError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


# -- argument helpers ---------------------------------------------------------

def parse_parameter(text: str) -> Fraction | complex:
    """'4/1', '-3', '0.25' -> Fraction; '0.5+0.5i' -> complex."""
    s = text.strip().replace(" ", "")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        pass
    try:
        return complex(s.replace("i", "j"))
    except ValueError:
        raise InputError(f"cannot read parameter {text!r}") from None


def parse_grid(text: str) -> tuple[float, float, float, float, int, int]:
    parts = text.split(",")
    if len(parts) != 6:
        raise InputError("grid spec is x0,x1,y0,y1,nx,ny")
    try:
        x0, x1, y0, y1 = map(float, parts[:4])
        nx, ny = int(parts[4]), int(parts[5])
    except ValueError:
        raise InputError(f"bad grid spec {text!r}") from None
    if not (x0 < x1 and y0 < y1 and nx > 0 and ny > 0):
        raise InputError("grid needs x0 < x1, y0 < y1 and positive counts")
    return x0, x1, y0, y1, nx, ny


def _num(x, digits: int = 15) -> str:
    if isinstance(x, Fraction):
        return fraction_str(x)
    if isinstance(x, complex):
        return f"{x.real:.{digits}g}{x.imag:+.{digits}g}i"
    return f"{float(x):.{digits}g}"


def _versions() -> dict:
    out = {"python": platform.python_version()}
    for pkg in ("artifact", "numpy", "gmpy2", "sympy"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = "unknown"
    return out


def _point(args):
    if not args.point:
        raise InputError("--point is required")
    return parse_marked_point(args.point[0])


def _rational_t(t) -> Fraction:
    if not isinstance(t, Fraction):
        raise InputError("this command needs a rational parameter")
    return t


def _grid_points(spec):
    x0, x1, y0, y1, nx, ny = spec
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    return xs, ys, xs[None, :] + 1j * ys[:, None]


# -- commands -----------------------------------------------------------------
# each returns (results, diagnostics, certificates, views) where views maps a
# suffix to (kind, payload)

def cmd_normalize(args):
    c = _point(args)
    C = lift(c)
    res = {"expression": args.point[0], "normalized": str(c),
           "numerator": [str(x) for x in c.num], "denominator": [str(x) for x in c.den],
           "lift": {"c1": C.c1.to_json(), "c2": C.c2.to_json()}}
    return [res], {}, {}, {}


def cmd_iterate(args):
    c = _point(args)
    states = orbit(lift(c), args.level)
    results = []
    for s in states:
        row = {"level": s.n, "degree": s.degree, "expected_degree": 4 ** (s.n - 1) * s.d}
        if args.forms:
            row.update(s.to_json())
        results.append(row)
    s1 = states[0]
    certs = {"first_iterate_flags": "hold", "d": s1.d,
             "scalars": s1.to_json()["scalars"]}
    return results, {}, certs, {}


def cmd_resultant(args):
    c = _point(args)
    C = lift(c)
    s1 = _first(C)
    res1 = first_resultant(C)
    results = []
    for n in range(1, args.level + 1):
        row = {"level": n, "closed_abs": fraction_str(abs(closed_resultant(s1, n, res1)))}
        if args.sylvester:
            s = orbit(C, n)[-1]
            syl = abs(form_resultant(s.P, s.Q))
            row["sylvester_abs"] = fraction_str(syl)
            row["agree"] = syl == abs(closed_resultant(s1, n, res1))
        results.append(row)
    return results, {}, {"compare": "absolute values"}, {}


def cmd_capacity(args):
    c = _point(args)
    C = lift(c)
    places = [ARCH] + bad_places(_first(C), first_resultant(C))
    closed = [capacity_closed(C, v).to_json() for v in places]
    lim = capacity_limit(C, args.nmax)
    arch = capacity_closed(C, ARCH).value
    res = {
        "closed": closed,
        "limit": {"estimates": [_num(e) for e in lim.estimates], "ratios": [_num(r) for r in lim.ratios]},
        "relative_error": _num(abs(lim.value - arch) / arch, 6),
        "product_over_places": _num(capacity_product(C)),
    }
    return [res], {}, {"closed": "exact log-combination"}, {}


def cmd_escape(args):
    c = _point(args)
    C = lift(c)
    s1 = _first(C)
    results, views = [], {}
    certs = {}
    for text in args.t or []:
        t = parse_parameter(text)
        if isinstance(t, Fraction):
            place = Place(args.place) if args.place else ARCH
            v = escape_at(C, t.numerator, t.denominator, place, tol=args.tol)
        else:
            v = escape_arch(s1, t, 1, tol=args.tol, nmax=args.nmax)
        results.append({"t": _num(t), "place": str(Place(args.place) if args.place else ARCH), **v.to_json()})
        if v.certificate.kind == "level-capped":
            certs.setdefault("level_capped", []).append(_num(t))
    if args.grid:
        spec = parse_grid(args.grid)
        xs, ys, T = _grid_points(spec)
        G, inc, _ = arch_iteration(s1, T, np.ones_like(T), tol=args.tol, nmax=args.nmax)
        rows = [(f"{z.real:.10g}", f"{z.imag:.10g}", f"{g:.12g}") for z, g in zip(T.ravel(), np.asarray(G).ravel())]
        views["grid.csv"] = ("csv", (["re", "im", "value"], rows))
        views["grid.svg"] = ("svg", heatmap(np.asarray(G, dtype=float), spec[:4], f"G at {c}"))
        certs["grid_max_increment"] = _num(float(np.max(inc)), 3)
    if not results and not args.grid:
        raise InputError("give --t and/or --grid")
    return results, {}, certs, views


def cmd_height(args):
    c = _point(args)
    C = lift(c)
    results = []
    for text in args.t or []:
        t = _rational_t(parse_parameter(text))
        h = neron_tate(C, t)
        row = h.to_json()
        row["weil_limit"] = {"n": args.weil, "value": _num(weil_limit(C, t, args.weil))}
        if args.verdict:
            row["torsion"] = is_torsion(C, t).to_json()
        results.append(row)
    if not results:
        raise InputError("--t is required")
    return results, {}, {"kinds": sorted({r["certificate"] for r in results})}, {}


def cmd_torsion(args):
    c = _point(args)
    C = lift(c)
    S = torsion_set(C, args.level, precision=args.precision)
    rows = []
    for p in S.points:
        row = p.to_row()
        row["exact"] = fraction_str(p.rational) if p.rational is not None else ""
        rows.append(row)
    res = {"level": S.level, "size": len(S), "with_multiplicity": sum(p.multiplicity for p in S.points),
           "points": rows}
    diag = {"excluded_near_0_or_1": [p.to_row() for p in S.excluded],
            "max_residual": _num(max((p.residual for p in S.points), default=0.0), 3)}
    header = ["re", "im", "exact", "multiplicity", "condition", "level", "residual"]
    views = {
        "points.csv": ("csv", (header, [tuple(str(r[h]) for h in header) for r in rows])),
        "points.svg": ("svg", scatter([p.value for p in S.points], title=f"torsion parameters, level {S.level}",
                                      marked=[p.rational is not None for p in S.points])),
    }
    return [res], diag, {"rational_elements": "verified exactly"}, views


def cmd_equidist(args):
    c = _point(args)
    C = lift(c)
    levels = [int(x) for x in args.levels.split(",")]
    probes = [parse_parameter(p) for p in args.probe]
    boxes = []
    if args.boxes:
        x0, x1, y0, y1, nx, ny = parse_grid(args.boxes)
        boxes = grid_boxes(x0, x1, y0, y1, nx, ny)
    rep = equidist_report(C, levels, [complex(p) for p in probes], boxes, args.box_level, indent=args.indent)
    out = rep.to_json()
    diag = {}
    for s, errs in rep.errors.items():
        diag[_num(s)] = {"monotone_decreasing": all(b < a for a, b in zip(errs, errs[1:]))}
    views = {}
    if boxes:
        rows = [(*[f"{x:.6g}" for x in b], f"{f:.6f}", f"{m:.6f}") for b, f, m in zip(rep.boxes, rep.fractions, rep.masses)]
        views["boxes.csv"] = ("csv", (["x0", "x1", "y0", "y1", "fraction", "mass"], rows))
    return [out], diag, {"box_mass": "flux contour, Richardson-extrapolated differences"}, views


def cmd_density(args):
    results = []
    for text in args.t or []:
        t = complex(parse_parameter(text))
        r = rho_lambda(t)
        results.append({"t": _num(t), "rho": _num(r.rho), "D": _num(r.D), "error": _num(r.error, 3),
                        "unit_mass": _num(total_mass(t)), "rho_one_minus_t": _num(rho_lambda(1 - t).rho)})
    views = {}
    if args.grid:
        if not args.t:
            raise InputError("--grid for density needs one --t")
        t = complex(parse_parameter(args.t[0]))
        spec = parse_grid(args.grid)
        _, _, Z = _grid_points(spec)
        D = rho_lambda(t).D
        with np.errstate(divide="ignore", invalid="ignore"):
            dens = D / 2 / np.abs(Z * (Z - 1) * (Z - t))
        rows = [(f"{z.real:.10g}", f"{z.imag:.10g}", f"{v:.12g}") for z, v in zip(Z.ravel(), dens.ravel())]
        views["grid.csv"] = ("csv", (["re", "im", "value"], rows))
        views["grid.svg"] = ("svg", heatmap(np.log(dens), spec[:4], f"log density of mu_t, t={_num(t, 6)}"))
    if not results:
        raise InputError("--t is required")
    return results, {}, {"rho": "quadrature with error estimate"}, views


def cmd_measure_compare(args):
    if not args.point:
        raise InputError("--point is required")
    pts = [parse_marked_point(p) for p in args.point]
    results = []
    ts = [complex(parse_parameter(x)) for x in (args.t or ["2", "-1", "0.5+0.5i"])]
    worst = 0.0
    for c in pts:
        C = lift(c)
        for t in ts:
            q = bifurcation_potential(C, t)
            g = escape_arch(C, t, 1).value
            worst = max(worst, abs(q.value - g))
            results.append({"point": str(c), "t": _num(t), "integral_formula": _num(q.value),
                            "escape_rate": _num(g), "difference": _num(abs(q.value - g), 3),
                            "quadrature_error": _num(q.error, 3)})
    certs = {"max_difference": _num(worst, 3)}
    diag = {}
    if len(pts) == 2:
        a, b = pts
        if a.is_constant and b.is_constant:
            va, vb = Fraction(a.num[0], a.den[0]), Fraction(b.num[0], b.den[0])
            diag["distinct"] = distinct_check(va, vb).to_json()
    return results, diag, certs, {}


COMMANDS = {
    "normalize": cmd_normalize,
    "iterate": cmd_iterate,
    "resultant": cmd_resultant,
    "capacity": cmd_capacity,
    "escape": cmd_escape,
    "height": cmd_height,
    "torsion": cmd_torsion,
    "equidist": cmd_equidist,
    "density": cmd_density,
    "measure-compare": cmd_measure_compare,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lattes", description="Lattès-family parameter-space toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--point", action="append", help="marked point expression in t (repeatable where meaningful)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--name", default=None, help="file stem (default: command name)")
        p.add_argument("--csv", action="store_true", help="also write CSV views")
        p.add_argument("--svg", action="store_true", help="also write SVG views")
        return p

    add("normalize", "parse and normalize a marked point")
    p = add("iterate", "degrees and forms of F_n")
    p.add_argument("--level", type=int, default=3)
    p.add_argument("--forms", action="store_true", help="include coefficient lists")
    p = add("resultant", "closed resultant of F_n (optionally against Sylvester)")
    p.add_argument("--level", type=int, default=3)
    p.add_argument("--sylvester", action="store_true")
    p = add("capacity", "homogeneous capacity, closed form and limit")
    p.add_argument("--nmax", type=int, default=6)
    p = add("escape", "escape rate G at parameters or on a grid")
    p.add_argument("--t", action="append")
    p.add_argument("--place", type=int, default=0, help="prime p, or 0 for the archimedean place")
    p.add_argument("--grid", help="x0,x1,y0,y1,nx,ny")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--nmax", type=int, default=60)
    p = add("height", "Néron–Tate height at rational parameters")
    p.add_argument("--t", action="append")
    p.add_argument("--weil", type=int, default=7)
    p.add_argument("--verdict", action="store_true", help="also decide torsion")
    p = add("torsion", "torsion parameters up to a level")
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--precision", type=float, default=1e-14)
    p = add("equidist", "equidistribution report")
    p.add_argument("--levels", default="2,3,4")
    p.add_argument("--probe", action="append", default=[])
    p.add_argument("--boxes", help="x0,x1,y0,y1,nx,ny")
    p.add_argument("--box-level", type=int, default=None)
    p.add_argument("--indent", type=float, default=0.05,
                   help="detour radius where box edges pass through 0 or 1")
    p = add("density", "hyperbolic density and maximal-entropy density")
    p.add_argument("--t", action="append")
    p.add_argument("--grid", help="x0,x1,y0,y1,nx,ny")
    p = add("measure-compare", "integral formula against escape rates")
    p.add_argument("--t", action="append")
    return ap


# -- output -------------------------------------------------------------------

def _atomic_write(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _config(args) -> dict:
    skip = {"out", "name"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    stem = args.name or args.command
    out_dir = Path(args.out)
    doc = {"command": args.command, "config": _config(args), "results": [], "diagnostics": {},
           "certificates": {}, "versions": _versions(), "status": "ok"}
    started = time.time()
    code = EXIT_OK
    views = {}
    try:
        results, diag, certs, views = COMMANDS[args.command](args)
        doc.update(results=results, diagnostics=diag, certificates=certs)
    except (ParseError, InadmissiblePoint, DegenerateParameter, LevelCapExceeded, InputError) as e:
        doc.update(status="input-error", error=str(e))
        code = EXIT_INPUT
    except (QuadratureError, RootFindingError, ConvergenceError, InvariantViolation) as e:
        doc.update(status="convergence-failure", error=str(e), partial=True)
        code = EXIT_CONVERGENCE
    text = json.dumps(doc, indent=2, sort_keys=False) + "\n"
    _atomic_write(out_dir / f"{stem}.json", text)
    meta = {"started": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime(started)),
            "elapsed_seconds": round(time.time() - started, 3)}
    _atomic_write(out_dir / f"{stem}.meta.json", json.dumps(meta) + "\n")
    for suffix, (kind, payload) in sorted(views.items()):
        if kind == "csv" and args.csv:
            _atomic_write(out_dir / f"{stem}.{suffix}", _csv_text(*payload))
        elif kind == "svg" and args.svg:
            _atomic_write(out_dir / f"{stem}.{suffix}", payload)
    if code:
        print(doc["error"], file=sys.stderr)
    else:
        print(str(out_dir / f"{stem}.json"))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
