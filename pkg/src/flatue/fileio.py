"""Plain-text surface format and CSV report writers.

::

    flatsurf v1
    # comment
    polygon 0 0,0 1,0 1,1 0,1
    glue 0.0 0.2 T
    glue 0.1 0.3 T
    marked 0.v0

Coordinates may be decimals or rationals ``p/q``.  Cover files add
``sheet <total-id> <base-id> <sheet>`` lines (see :mod:`flatue.cover`).
"""

from __future__ import annotations

import io
import math
from fractions import Fraction

from .errors import DuplicateGluing, SurfaceSyntaxError, UnknownEdge
from .surface import (
    FLIP,
    TRANSLATION,
    EdgeRef,
    FlatSurface,
    Gluing,
    Polygon,
    canonical,
    id_key,
)

HEADER = "flatsurf v1"


def parse_number(tok):
    if "/" in tok:
        p, q = tok.split("/", 1)
        return float(Fraction(int(p), int(q)))
    x = float(tok)
    if not math.isfinite(x):
        raise ValueError(tok)
    return x


def format_number(x):
    x = float(x)
    if x == 0:
        x = 0.0  # drop the sign of -0.0
    return repr(x)


def _parse_edge(tok, lineno):
    if "." not in tok:
        raise SurfaceSyntaxError(f"bad edge reference {tok!r}", lineno)
    pid, e = tok.rsplit(".", 1)
    try:
        return EdgeRef(pid, int(e))
    except ValueError:
        raise SurfaceSyntaxError(f"bad edge reference {tok!r}", lineno) from None


def parse_document(text):
    """Parse into ``(surface, extra)`` where ``extra`` collects unknown-to-surface lines."""
    lines = text.splitlines()
    body = [(n, ln.split("#", 1)[0].strip()) for n, ln in enumerate(lines, 1)]
    body = [(n, ln) for n, ln in body if ln]
    if not body or body[0][1] != HEADER:
        raise SurfaceSyntaxError(f"expected header {HEADER!r}", body[0][0] if body else 1)
    polys = []
    poly_line = {}
    glue = []
    marked = set()
    sheets = []
    flags = set()
    for lineno, ln in body[1:]:
        toks = ln.split()
        head = toks[0]
        if head == "polygon":
            if len(toks) < 5:
                raise SurfaceSyntaxError("polygon needs an id and at least 3 vertices", lineno)
            pid = toks[1]
            if pid in poly_line:
                raise SurfaceSyntaxError(f"polygon {pid} defined twice", lineno)
            verts = []
            for tok in toks[2:]:
                try:
                    xs, ys = tok.split(",")
                    verts.append((parse_number(xs), parse_number(ys)))
                except (ValueError, ZeroDivisionError):
                    raise SurfaceSyntaxError(f"bad vertex {tok!r}", lineno) from None
            polys.append(Polygon(pid, verts))
            poly_line[pid] = lineno
        elif head == "glue":
            if len(toks) != 4 or toks[3] not in (TRANSLATION, FLIP):
                raise SurfaceSyntaxError("expected: glue <id>.<e> <id>.<e> <T|F>", lineno)
            glue.append((lineno, _parse_edge(toks[1], lineno), _parse_edge(toks[2], lineno), toks[3]))
        elif head == "marked":
            if len(toks) != 2 or ".v" not in toks[1]:
                raise SurfaceSyntaxError("expected: marked <id>.v<k>", lineno)
            pid, k = toks[1].rsplit(".v", 1)
            try:
                marked.add((pid, int(k), lineno))
            except ValueError:
                raise SurfaceSyntaxError(f"bad vertex reference {toks[1]!r}", lineno) from None
        elif head == "sheet":
            if len(toks) != 4:
                raise SurfaceSyntaxError("expected: sheet <total-id> <base-id> <sheet>", lineno)
            try:
                sheets.append((toks[1], toks[2], int(toks[3])))
            except ValueError:
                raise SurfaceSyntaxError("sheet index must be an integer", lineno) from None
        elif head == "disconnected":
            flags.add("disconnected")
        else:
            raise SurfaceSyntaxError(f"unknown directive {head!r}", lineno)

    sizes = {p.id: len(p) for p in polys}
    used = {}
    gluings = []
    for lineno, a, b, kind in glue:
        for e in (a, b):
            if e.polygon not in sizes or not 0 <= e.edge_index < sizes[e.polygon]:
                raise UnknownEdge(f"unknown edge {e}", lineno)
            if e in used:
                raise DuplicateGluing(e, (used[e], lineno))
            used[e] = lineno
        gluings.append(Gluing(a, b, kind))
    mk = set()
    for pid, k, lineno in marked:
        if pid not in sizes or not 0 <= k < sizes[pid]:
            raise SurfaceSyntaxError(f"unknown vertex {pid}.v{k}", lineno)
        mk.add((pid, k))
    surface = FlatSurface(polys, gluings, mk, "disconnected" in flags)
    return surface, {"sheets": sheets, "flags": flags}


def parse_surface(text):
    return parse_document(text)[0]


def serialize_surface(surface, extra_lines=()):
    s = canonical(surface)
    out = [HEADER]
    if s.allow_disconnected:
        out.append("disconnected")
    for p in s.polygons:
        coords = " ".join(f"{format_number(v.x)},{format_number(v.y)}" for v in p.vertices)
        out.append(f"polygon {p.id} {coords}")
    for g in s.gluings:
        out.append(f"glue {g.a} {g.b} {g.kind}")
    for pid, k in sorted(s.marked, key=lambda c: (id_key(c[0]), c[1])):
        out.append(f"marked {pid}.v{k}")
    out.extend(extra_lines)
    return "\n".join(out) + "\n"


def read_surface(path):
    with open(path, encoding="utf-8") as fh:
        return parse_surface(fh.read())


# -- CSV reports --------------------------------------------------------------

CRITERION_HEADER = ("t", "kappa", "delta_sc", "d_t", "integrand", "integral")
THEOREM3_HEADER = ("t", "C", "sumD", "delta", "integrand", "integral", "cond1", "cond2")
DISCREPANCY_HEADER = ("N", "D_N")
PANEL_HEADER = ("start_id", "box_id", "N", "avg")


def fmt_cell(x):
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        s = f"{x:.12g}"
        return "0" if s == "-0" else s
    return str(x)


def csv_text(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt_cell(v) for v in row) + "\n")
    return buf.getvalue()
