"""Command line interface.

Exit codes: 0 on success, 1 on a domain error (the message names the error
case), 2 on a usage error.  A surface argument is a file path, ``-`` for
standard input, or ``@name[:arg,...]`` for a built-in generator, for example
``@torus:golden`` or ``@lshape:3,2``.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import fileio
from .cover import (build_double_cover, cover_from_permutations, project_curve,
                    random_closed_geodesics, serialize_cover, verify_systole_comparison)
from .errors import FlatSurfaceError, InvalidSurface
from .generators import NAMES, generate
from .surface import area, cone_points, euler_characteristic, validate


def load_surface(spec):
    if spec.startswith("@"):
        name, _, rest = spec[1:].partition(":")
        args = [a for a in rest.split(",") if a] if rest else []
        return generate(name, *args)
    if spec == "-":
        text = sys.stdin.read()
    else:
        with open(spec, encoding="utf-8") as fh:
            text = fh.read()
    return fileio.parse_surface(text)


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _positive(name):
    def conv(text):
        try:
            x = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number") from None
        if not x > 0 or not math.isfinite(x):
            raise argparse.ArgumentTypeError(f"{name} must be positive")
        return x
    return conv


def _nonneg(name):
    def conv(text):
        try:
            x = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number") from None
        if x < 0 or not math.isfinite(x):
            raise argparse.ArgumentTypeError(f"{name} must be non-negative")
        return x
    return conv


def _posint(name):
    def conv(text):
        try:
            k = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer") from None
        if k < 1:
            raise argparse.ArgumentTypeError(f"{name} must be at least 1")
        return k
    return conv


def _f(x):
    return fileio.fmt_cell(float(x))


# -- commands ---------------------------------------------------------------------

def _checked(spec):
    s = load_surface(spec)
    bad = validate(s)
    if bad:
        raise InvalidSurface("; ".join(str(v) for v in bad))
    return s


def cmd_validate(a):
    _checked(a.surface)
    print("valid")
    return 0


def cmd_info(a):
    s = _checked(a.surface)
    cps = cone_points(s)
    chi = euler_characteristic(s)
    sum_k = sum(cp.order_k for cp in cps)
    print(f"polygons {len(s.polygons)}")
    print(f"gluings {len(s.gluings)}")
    print(f"area {_f(area(s))}")
    print(f"euler_characteristic {chi}")
    print(f"translation {'yes' if all(g.kind == 'T' for g in s.gluings) else 'no'}")
    for cp in cps:
        pid, i = cp.representative
        kind = "marked" if cp.is_marked else "cone"
        print(f"point {pid}.v{i} angle {_f(cp.angle / math.pi)}pi k {cp.order_k} {kind}")
    print(f"sum_k {sum_k}")
    print(f"minus_two_chi {-2 * chi}")
    print(f"gauss_bonnet {'ok' if sum_k == -2 * chi else 'FAILED'}")
    return 0


def cmd_gen(a):
    kw = {}
    if a.slope is not None:
        kw["slope"] = a.slope
    s = generate(a.name, *a.params, **kw)
    _emit(fileio.serialize_surface(s), a.out)
    return 0


def cmd_cover(a):
    c = build_double_cover(load_surface(a.surface))
    _emit(serialize_cover(c), a.out)
    state = "connected" if c.connected else "disconnected"
    print(f"# {state}, branch points {len(c.branch_points)}", file=sys.stderr)
    return 0


def cmd_flow(a):
    from .teich import flow_to
    s = flow_to(load_surface(a.surface), a.t, normalize_result=a.normalize)
    _emit(fileio.serialize_surface(s), a.out)
    return 0


def cmd_systole(a):
    from .geodesics.systole import systole_estimate
    s = load_surface(a.surface)
    est = systole_estimate(s, a.depth, a.treat_marked_as_singular)
    print(f"systole {_f(est.value)}")
    print(f"kind {est.kind}")
    print(f"lower_confidence {'yes' if est.lower_confidence else 'no'}")
    print(f"punctured {'yes' if est.punctured else 'no'}")
    print(f"search_radius {_f(est.search_radius)}")
    for pid, p, q in est.certificate.segments:
        print(f"segment {pid} {_f(p.x)},{_f(p.y)} {_f(q.x)},{_f(q.y)}")
    return 0


def cmd_criterion(a):
    from .geodesics.criterion import criterion_integral
    from .teich import build_flow_track
    track = build_flow_track(load_surface(a.surface), a.tmax, a.dt)
    rep = criterion_integral(track, a.depth, treat_marked_as_singular=a.treat_marked_as_singular)
    _emit(fileio.csv_text(fileio.CRITERION_HEADER, rep.rows), a.out)
    if a.out:
        print(f"verdict {rep.verdict_hint}")
        print(f"integral {_f(rep.integral)}")
    return 0


def cmd_thm3(a):
    from .geodesics.criterion import theorem3_report
    from .teich import build_flow_track
    track = build_flow_track(load_surface(a.surface), a.tmax, a.dt)
    rep = theorem3_report(track, a.eta, a.eps, a.res, treat_marked_as_singular=a.treat_marked_as_singular)
    _emit(fileio.csv_text(fileio.THEOREM3_HEADER, rep.rows), a.out)
    if a.out:
        print(f"integral {_f(rep.integral)}")
    return 0


def cmd_trace(a):
    from .dynamics import as_cover, box_discrepancy, trace_leaf
    cover = as_cover(load_surface(a.surface))
    pid = a.polygon if a.polygon is not None else cover.total.polygons[0].id
    tr = trace_leaf(cover, (pid, (a.x, a.y)), a.len)
    rows = box_discrepancy(tr, a.grid, n=int(math.floor(a.len)))
    _emit(fileio.csv_text(fileio.DISCREPANCY_HEADER, rows), a.out)
    if a.out:
        print(f"terminated_by {tr.terminated_by}")
        print(f"length {_f(tr.total_length)}")
    return 0


def cmd_return_map(a):
    from .dynamics import Transversal, as_cover, first_return_map
    cover = as_cover(load_surface(a.surface))
    rm = first_return_map(cover, Transversal.parse(a.transversal), budget=a.budget)
    print(f"intervals {len(rm.intervals)}")
    for k, ((ln, img, pres), lo, sh, tm) in enumerate(zip(rm.intervals, rm.cuts, rm.shifts, rm.return_times)):
        print(f"interval {k} start {_f(lo)} length {_f(ln)} image {img} "
              f"shift {_f(sh)} time {_f(tm)} {'preserving' if pres else 'reversing'}")
    return 0


def cmd_panel(a):
    from .dynamics import as_cover, birkhoff_panel, random_starts
    cover = as_cover(load_surface(a.surface))
    rng = np.random.default_rng(a.seed)
    starts = random_starts(cover, a.starts, rng)
    rep = birkhoff_panel(cover, starts, budget=int(a.len), G=a.grid)
    _emit(fileio.csv_text(fileio.PANEL_HEADER, rep.birkhoff_table), a.out)
    if a.out:
        print(f"verdict {rep.verdict_hint}")
        print(f"max_gap {_f(rep.max_gap)}")
        for N, D in rep.discrepancy_series:
            print(f"discrepancy {N} {_f(D)}")
    return 0


def cmd_cover_check(a):
    from .geodesics.tighten import tighten_curve
    s = load_surface(a.surface)
    cover = build_double_cover(s)
    label = "orientation double cover"
    if cover.branched:
        cover = cover_from_permutations(s, 2, {})
        label = "disjoint double cover"
    rng = np.random.default_rng(a.seed)
    curves = random_closed_geodesics(cover.total, a.samples, rng, a.max_length)
    worst = -math.inf
    bad = 0
    for g in curves:
        b = project_curve(cover, g)
        worst = max(worst, b.length - g.length)
        tb = tighten_curve(cover.base, b)
        if b.length > g.length + 1e-9 or tb.meta["trivial"]:
            bad += 1
    cmp_ = verify_systole_comparison(cover)
    print(f"cover {label}")
    print(f"samples {len(curves)}")
    print(f"max_length_excess {_f(worst)}")
    print(f"failures {bad}")
    print(f"sys_total {_f(cmp_.sys_total)}")
    print(f"sys_base {_f(cmp_.sys_base)}")
    print(f"systole_comparison {'ok' if cmp_.ok else 'FAILED'}")
    return 0 if bad == 0 and cmp_.ok else 1


# -- parser -------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="flatue", description="Flat surfaces, Teichmüller flow and unique ergodicity.")
    sub = p.add_subparsers(dest="command", required=True)

    def surf(sp):
        sp.add_argument("surface", help="surface file, '-' for stdin, or @generator[:args]")
        return sp

    def marked(sp):
        sp.add_argument("--treat-marked-as-singular", action=argparse.BooleanOptionalAction, default=True,
                        help="count angle-2pi marked points as singular (default on)")

    surf(sub.add_parser("validate", help="check surface invariants")).set_defaults(func=cmd_validate)
    surf(sub.add_parser("info", help="cone points and Gauss-Bonnet check")).set_defaults(func=cmd_info)

    sp = sub.add_parser("gen", help="write a built-in surface")
    sp.add_argument("name", choices=NAMES)
    sp.add_argument("params", nargs="*")
    sp.add_argument("--slope")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gen)

    sp = surf(sub.add_parser("cover", help="orientation double cover"))
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_cover)

    sp = surf(sub.add_parser("flow", help="apply g_t"))
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--normalize", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_flow)

    sp = surf(sub.add_parser("systole", help="systole estimate"))
    sp.add_argument("--depth", type=_posint("depth"), default=2)
    marked(sp)
    sp.set_defaults(func=cmd_systole)

    sp = surf(sub.add_parser("criterion", help="running integral of kappa(t)^2"))
    sp.add_argument("--tmax", type=_nonneg("tmax"), required=True)
    sp.add_argument("--dt", type=_positive("dt"), default=0.1)
    sp.add_argument("--depth", type=_posint("depth"), default=2)
    sp.add_argument("--out")
    marked(sp)
    sp.set_defaults(func=cmd_criterion)

    sp = surf(sub.add_parser("thm3", help="thick-thin decomposition integral"))
    sp.add_argument("--eta", type=_positive("eta"), required=True)
    sp.add_argument("--eps", type=_positive("eps"), required=True)
    sp.add_argument("--res", type=_positive("res"), default=None)
    sp.add_argument("--tmax", type=_nonneg("tmax"), required=True)
    sp.add_argument("--dt", type=_positive("dt"), default=0.1)
    sp.add_argument("--out")
    marked(sp)
    sp.set_defaults(func=cmd_thm3)

    sp = surf(sub.add_parser("trace", help="trace a horizontal leaf; box discrepancy CSV"))
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--y", type=float, required=True)
    sp.add_argument("--polygon", help="total-surface polygon id (default: the first)")
    sp.add_argument("--len", type=_positive("len"), required=True)
    sp.add_argument("--grid", type=_posint("grid"), default=8)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_trace)

    sp = surf(sub.add_parser("return-map", help="first return map to a transversal"))
    sp.add_argument("--transversal", required=True, help="pid:x,y:dx,dy:length on the cover")
    sp.add_argument("--budget", type=_positive("budget"), default=1e4)
    sp.set_defaults(func=cmd_return_map)

    sp = surf(sub.add_parser("panel", help="Birkhoff averages from random starts"))
    sp.add_argument("--starts", type=_posint("starts"), required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--len", type=_positive("len"), required=True)
    sp.add_argument("--grid", type=_posint("grid"), default=4)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_panel)

    sp = surf(sub.add_parser("cover-check", help="curve projection and systole comparison on a cover"))
    sp.add_argument("--samples", type=_posint("samples"), required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--max-length", type=_positive("max-length"), default=4.0)
    sp.set_defaults(func=cmd_cover_check)
    return p


def main(argv=None):
    parser = build_parser()
    a = parser.parse_args(argv)
    if getattr(a, "command", None) == "panel" and a.starts < 2:
        parser.error("--starts must be at least 2")
    try:
        return a.func(a)
    except FlatSurfaceError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
