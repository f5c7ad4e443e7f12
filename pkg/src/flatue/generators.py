"""Named example surfaces."""

from __future__ import annotations

import math

from .errors import BadParams
from .fileio import parse_number
from .surface import (
    FLIP,
    TRANSLATION,
    EdgeRef,
    FlatSurface,
    Gluing,
    Polygon,
    apply_matrix,
    check_valid,
    cone_points,
    rotation_matrix,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

NAMES = ("torus", "pillowcase", "lshape", "regular-2ngon", "torus-cover")


def _g(a, i, b, j, kind=TRANSLATION):
    return Gluing(EdgeRef(str(a), i), EdgeRef(str(b), j), kind)


def mark_regular_vertices(surface):
    """Flag every angle-2pi vertex class as a marked point."""
    marked = {cp.representative for cp in cone_points(surface) if cp.order_k == 0}
    return surface.with_(marked=marked)


def square_torus():
    sq = Polygon("0", [(0, 0), (1, 0), (1, 1), (0, 1)])
    return FlatSurface([sq], [_g(0, 0, 0, 2), _g(0, 1, 0, 3)], {("0", 0)})


def torus(slope=0.0):
    """Unit square torus rotated so that the direction of slope ``slope`` is horizontal."""
    base = square_torus()
    if slope == 0:
        return base
    return apply_matrix(base, rotation_matrix(-math.atan(slope)))


def pillowcase(side=1 / math.sqrt(2.0)):
    """Sphere with four angle-pi points: two side-by-side squares whose outer
    vertical sides are translated together and whose bottom and top edges are
    folded by flips.  Area ``2*side**2`` (default 1)."""
    if not side > 0:
        raise BadParams("pillowcase side must be positive")
    s = float(side)
    polys = [Polygon("0", [(0, 0), (s, 0), (s, s), (0, s)]),
             Polygon("1", [(s, 0), (2 * s, 0), (2 * s, s), (s, s)])]
    glue = [_g(0, 1, 1, 3), _g(0, 3, 1, 1), _g(0, 0, 1, 0, FLIP), _g(0, 2, 1, 2, FLIP)]
    return FlatSurface(polys, glue)


def lshape(a=2.0, b=2.0):
    """L-shaped table: unit square with arms of lengths ``a`` (right) and ``b`` (up)."""
    if not (a > 1 and b > 1):
        raise BadParams("lshape needs A > 1 and B > 1")
    polys = [
        Polygon("0", [(0, 0), (1, 0), (1, 1), (0, 1)]),
        Polygon("1", [(1, 0), (a, 0), (a, 1), (1, 1)]),
        Polygon("2", [(0, 1), (1, 1), (1, b), (0, b)]),
    ]
    glue = [_g(0, 1, 1, 3), _g(1, 1, 0, 3), _g(0, 2, 2, 0), _g(2, 2, 0, 0),
            _g(1, 2, 1, 0), _g(2, 1, 2, 3)]
    return mark_regular_vertices(FlatSurface(polys, glue))


def regular_2ngon(n=4):
    """Regular ``2n``-gon with unit sides and opposite sides identified by translation."""
    n = int(n)
    if n < 2:
        raise BadParams("regular-2ngon needs N >= 2")
    m = 2 * n
    R = 1.0 / (2.0 * math.sin(math.pi / m))
    start = -math.pi / 2 - math.pi / m
    verts = [(R * math.cos(start + 2 * math.pi * k / m), R * math.sin(start + 2 * math.pi * k / m))
             for k in range(m)]
    glue = [_g(0, i, 0, i + n) for i in range(n)]
    return mark_regular_vertices(FlatSurface([Polygon("0", verts)], glue))


def torus_cover(k=2):
    """Degree-``k`` cover of the square torus: ``k`` unit squares in a row."""
    k = int(k)
    if k < 1:
        raise BadParams("torus-cover needs K >= 1")
    polys = [Polygon(str(j), [(j, 0), (j + 1, 0), (j + 1, 1), (j, 1)]) for j in range(k)]
    glue = []
    for j in range(k):
        glue.append(_g(j, 1, (j + 1) % k, 3))
        glue.append(_g(j, 2, j, 0))
    return FlatSurface(polys, glue, {(str(j), 0) for j in range(k)})


def parse_slope(text):
    if str(text).lower() in ("golden", "phi"):
        return GOLDEN
    return parse_number(str(text))


def generate(name, *args, **kw):
    """Build a named surface; positional ``args`` follow the command-line order."""
    try:
        if name == "torus":
            slope = kw.get("slope", args[0] if args else 0.0)
            surf = torus(parse_slope(slope))
        elif name == "pillowcase":
            side = kw.get("side", args[0] if args else 1 / math.sqrt(2.0))
            surf = pillowcase(parse_number(str(side)))
        elif name == "lshape":
            a = kw.get("a", args[0] if args else 2)
            b = kw.get("b", args[1] if len(args) > 1 else 2)
            surf = lshape(parse_number(str(a)), parse_number(str(b)))
        elif name == "regular-2ngon":
            surf = regular_2ngon(int(kw.get("n", args[0] if args else 4)))
        elif name == "torus-cover":
            surf = torus_cover(int(kw.get("k", args[0] if args else 2)))
        else:
            raise BadParams(f"unknown generator {name!r}; choose from {', '.join(NAMES)}")
    except (ValueError, ZeroDivisionError) as exc:
        raise BadParams(f"bad parameters for {name}: {exc}") from None
    return check_valid(surf)
