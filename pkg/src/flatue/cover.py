"""Finite covers of flat surfaces, the orientation double cover, and curve projection.

Every sheet of a cover is a copy of the base polygons.  A total polygon
carries a chart ``(base id, sign)``: the point ``w`` of the total polygon lies
over the point ``sign * w`` of its base polygon.  The orientation double cover
stores sheet 1 rotated by pi (``sign = -1``) so that every gluing upstairs is a
translation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import BadParams, BranchedCover, NotClosed, NotSimple, PointOffSurface
from .fileio import parse_document, serialize_surface
from .paths import CurvePath
from .surface import (
    EPS_GLUE,
    TRANSLATION,
    EdgeRef,
    FlatSurface,
    Gluing,
    Polygon,
    Vec2,
    area,
    cone_points,
    connected_components,
    edge_isometry,
    euler_characteristic,
    id_key,
    vertex_classes,
)


@dataclass
class CoverData:
    base: FlatSurface
    total: FlatSurface
    sheet_of: dict  # total id -> (base id, sheet)
    chart: dict  # total id -> (base id, sign)
    involution: dict = None  # total id -> (total id, sign); degree 2 only
    branch_points: list = field(default_factory=list)
    degree: int = 2

    @property
    def connected(self):
        return len(connected_components(self.total)) == 1

    @property
    def branched(self):
        return bool(self.branch_points)

    def riemann_hurwitz(self):
        """``(chi(total), degree * chi(base) - ramification)`` as exact integers."""
        ram = 0
        over = _classes_over(self)
        for cp in cone_points(self.base):
            ram += self.degree - len(over[cp.vertex_class])
        return euler_characteristic(self.total), self.degree * euler_characteristic(self.base) - ram


def _tid(pid, sheet):
    return f"{pid}_{sheet}"


def _lift_marked(base, degree):
    return {(_tid(pid, k), i) for pid, i in base.marked for k in range(degree)}


def _classes_over(cover):
    """Base vertex class -> list of total vertex classes above it."""
    base_cls = {}
    for cls in vertex_classes(cover.base):
        for c in cls:
            base_cls[c] = cls
    out = {cls: [] for cls in vertex_classes(cover.base)}
    for cls in vertex_classes(cover.total):
        tid, i = next(iter(cls))
        out[base_cls[(cover.chart[tid][0], i)]].append(cls)
    return out


def _finish(cover):
    # the total surface carries the disconnected flag only when it really is disconnected
    if len(connected_components(cover.total)) == 1:
        cover.total = cover.total.with_(allow_disconnected=False)
    cover.branch_points = _branch_points(cover)
    return cover


def _branch_points(cover):
    """Base cone points over which the cover is ramified."""
    over = _classes_over(cover)
    return [cp for cp in cone_points(cover.base) if len(over[cp.vertex_class]) < cover.degree]


def build_double_cover(base):
    """Orientation double cover: the translation surface on which the square root of the
    quadratic differential is defined."""
    polys = []
    sheet_of, chart, inv = {}, {}, {}
    for p in base.polygons:
        for k, sg in ((0, 1.0), (1, -1.0)):
            tid = _tid(p.id, k)
            polys.append(Polygon(tid, [(sg * v.x, sg * v.y) for v in p.vertices]))
            sheet_of[tid] = (p.id, k)
            chart[tid] = (p.id, sg)
            inv[tid] = (_tid(p.id, 1 - k), -1.0)
    glue = []
    for g in base.gluings:
        a, b = g.a, g.b
        for k in (0, 1):
            kb = k if g.kind == TRANSLATION else 1 - k
            glue.append(Gluing(EdgeRef(_tid(a.polygon, k), a.edge_index),
                               EdgeRef(_tid(b.polygon, kb), b.edge_index), TRANSLATION))
    total = FlatSurface(polys, glue, _lift_marked(base, 2), allow_disconnected=True)
    return _finish(CoverData(base, total, sheet_of, chart, inv, [], 2))


def cover_from_permutations(base, degree, perms):
    """Cover with ``degree`` sheets; ``perms[g]`` (a list) tells which sheet edge ``g.b``
    reaches from sheet ``k`` of edge ``g.a``.  ``g`` indexes ``base.gluings``; missing
    entries mean the identity."""
    degree = int(degree)
    if degree < 1:
        raise BadParams("degree must be at least 1")
    polys, sheet_of, chart = [], {}, {}
    for p in base.polygons:
        for k in range(degree):
            tid = _tid(p.id, k)
            polys.append(Polygon(tid, p.vertices))
            sheet_of[tid] = (p.id, k)
            chart[tid] = (p.id, 1.0)
    glue = []
    for gi, g in enumerate(base.gluings):
        sigma = list(perms.get(gi, range(degree)))
        if sorted(sigma) != list(range(degree)):
            raise BadParams(f"gluing {gi}: {sigma} is not a permutation of the sheets")
        for k in range(degree):
            glue.append(Gluing(EdgeRef(_tid(g.a.polygon, k), g.a.edge_index),
                               EdgeRef(_tid(g.b.polygon, sigma[k]), g.b.edge_index), g.kind))
    total = FlatSurface(polys, glue, _lift_marked(base, degree), allow_disconnected=True)
    inv = None
    if degree == 2:
        inv = {tid: (_tid(sheet_of[tid][0], 1 - sheet_of[tid][1]), 1.0) for tid in sheet_of}
    return _finish(CoverData(base, total, sheet_of, chart, inv, [], degree))


def lattice_double_cover(base, gluing_index=0):
    """Degree-2 cover in which crossing gluing ``gluing_index`` switches sheets."""
    return cover_from_permutations(base, 2, {gluing_index: [1, 0]})


# -- points -----------------------------------------------------------------------

def _check_point(surface, pid, p):
    if pid not in surface.polygon_map:
        raise PointOffSurface(f"no polygon {pid!r}")
    p = Vec2(*p)
    if not surface.polygon(pid).contains(p, tol=EPS_GLUE):
        raise PointOffSurface(f"point {tuple(p)} is not in polygon {pid}")
    return p


def _boundary_images(surface, pid, p, tol=EPS_GLUE):
    """All ``(pid, point)`` representations of ``p`` reachable through one gluing, or
    ``('v', class)`` when ``p`` is a vertex."""
    poly = surface.polygon(pid)
    for i, v in enumerate(poly.vertices):
        if (p - v).norm <= tol:
            for cls in vertex_classes(surface):
                if (pid, i) in cls:
                    return {("v", cls)}
    out = {(pid, (round(p.x, 9), round(p.y, 9)))}
    for i in range(len(poly)):
        a, b = poly.vertices[i], poly.vertices[(i + 1) % len(poly)]
        e = b - a
        L = e.norm
        if abs(e.x * (p.y - a.y) - e.y * (p.x - a.x)) <= tol * L:
            u = ((p.x - a.x) * e.x + (p.y - a.y) * e.y) / (L * L)
            if -tol <= u <= 1 + tol:
                f, s, c = edge_isometry(surface, EdgeRef(pid, i))
                q = Vec2(s * p.x + c.x, s * p.y + c.y)
                out.add((f.polygon, (round(q.x, 9), round(q.y, 9))))
    return out


def same_point(surface, pa, a, pb, b, tol=EPS_GLUE):
    """Whether ``(pa, a)`` and ``(pb, b)`` are the same point of ``surface``."""
    a, b = Vec2(*a), Vec2(*b)
    if pa == pb and (a - b).norm <= tol:
        return True
    ia = _boundary_images(surface, pa, a, tol)
    ib = _boundary_images(surface, pb, b, tol)
    if any(x[0] == "v" for x in ia) or any(x[0] == "v" for x in ib):
        return ia == ib
    for qa, za in ia:
        for qb, zb in ib:
            if qa == qb and math.hypot(za[0] - zb[0], za[1] - zb[1]) <= 10 * tol:
                return True
    return False


def project_point(cover, tid, w):
    """Image in the base of the point ``w`` of total polygon ``tid``."""
    w = _check_point(cover.total, tid, w)
    bid, sg = cover.chart[tid]
    return bid, Vec2(sg * w.x, sg * w.y)


def lift_point(cover, bid, z):
    """Distinct preimages of the base point ``z`` of polygon ``bid``."""
    z = _check_point(cover.base, bid, z)
    out = []
    for tid in sorted(cover.chart, key=id_key):
        b, sg = cover.chart[tid]
        if b != bid:
            continue
        w = Vec2(sg * z.x, sg * z.y)
        if not any(same_point(cover.total, tid, w, q, v) for q, v in out):
            out.append((tid, w))
    return out


def involution(cover, tid, w):
    """The deck involution of a degree-2 cover."""
    if cover.involution is None:
        raise BadParams("the involution is defined for degree-2 covers only")
    w = _check_point(cover.total, tid, w)
    t2, sg = cover.involution[tid]
    return t2, Vec2(sg * w.x, sg * w.y)


# -- curves -------------------------------------------------------------------------

def _seg_hit(a, b, c, d, tol=1e-12):
    """Parameters ``(u, v)`` of the first point of ``ab`` lying on ``cd``, or None."""
    rx, ry = b.x - a.x, b.y - a.y
    sx, sy = d.x - c.x, d.y - c.y
    den = rx * sy - ry * sx
    qx, qy = c.x - a.x, c.y - a.y
    scale = max(math.hypot(rx, ry) * math.hypot(sx, sy), 1e-300)
    if abs(den) <= tol * scale:
        if abs(qx * ry - qy * rx) > tol * max(math.hypot(rx, ry), 1e-300):
            return None
        # collinear: overlap along ab
        rr = rx * rx + ry * ry
        if rr == 0:
            return None
        t0 = (qx * rx + qy * ry) / rr
        t1 = ((d.x - a.x) * rx + (d.y - a.y) * ry) / rr
        lo, hi = min(t0, t1), max(t0, t1)
        if hi < -tol or lo > 1 + tol:
            return None
        u = max(lo, 0.0)
        v = (u - t0) / (t1 - t0) if t1 != t0 else 0.0
        return u, v
    u = (qx * sy - qy * sx) / den
    v = (qx * ry - qy * rx) / den
    if -tol <= u <= 1 + tol and -tol <= v <= 1 + tol:
        return min(max(u, 0.0), 1.0), min(max(v, 0.0), 1.0)
    return None


_END = 1e-9


def _first_return(segs, closed):
    """Earliest ``(k, u, j, v)``: the point at ``u`` on segment ``k`` revisits the point at
    ``v`` on an earlier segment ``j``."""
    n = len(segs)
    for k in range(n):
        pk, a, b = segs[k]
        best = None
        for j in range(k):
            pj, c, d = segs[j]
            if pj != pk:
                continue
            h = _seg_hit(a, b, c, d)
            if h is None:
                continue
            u, v = h
            if j == k - 1 and u <= _END and v >= 1 - _END:
                continue  # the shared junction
            if closed and k == n - 1 and j == 0 and u >= 1 - _END and v <= _END:
                continue  # the closing junction
            if best is None or u < best[1]:
                best = (k, u, j, v)
        if best is not None:
            return best
    return None


def _lerp(a, b, u):
    return Vec2(a.x + u * (b.x - a.x), a.y + u * (b.y - a.y))


def check_closed(surface, curve):
    if not curve.closed or not curve.segments:
        raise NotClosed("curve is not marked closed")
    segs = curve.segments
    for (p1, _, b), (p2, a, _) in zip(segs, segs[1:] + segs[:1]):
        if not same_point(surface, p1, b, p2, a):
            raise NotClosed(f"segment ending at {p1}:{tuple(b)} does not continue at {p2}:{tuple(a)}")


def check_simple(surface, curve):
    if _first_return(list(curve.segments), curve.closed) is not None:
        raise NotSimple("curve meets itself")


def project_curve(cover, gamma):
    """Closed simple curve ``beta`` in the base, no longer than ``gamma``.

    ``beta`` is the projection of ``gamma`` up to its first self-return: the
    least ``s`` for which ``p(gamma(s)) = p(gamma(r))`` with ``r < s``.
    """
    if cover.branched:
        raise BranchedCover(f"cover is branched over {len(cover.branch_points)} points")
    check_closed(cover.total, gamma)
    check_simple(cover.total, gamma)
    proj = []
    for tid, a, b in gamma.segments:
        bid, sg = cover.chart[tid]
        proj.append((bid, Vec2(sg * a.x, sg * a.y), Vec2(sg * b.x, sg * b.y)))
    hit = _first_return(proj, True)
    meta = {"degree": cover.degree, "full": hit is None}
    if hit is None:
        return CurvePath(tuple(proj), True, meta)
    k, u, j, v = hit
    pieces = []
    pj, c, d = proj[j]
    pieces.append((pj, _lerp(c, d, v), d))
    pieces.extend(proj[j + 1:k])
    pk, a, b = proj[k]
    pieces.append((pk, a, _lerp(a, b, u)))
    pieces = [q for q in pieces if (q[2] - q[1]).norm > 0]
    meta.update(r=(j, v), s=(k, u))
    return CurvePath(tuple(pieces), True, meta)


# -- systoles -------------------------------------------------------------------------

@dataclass
class SystoleComparison:
    sys_total: float
    sys_base: float
    ok: bool
    tol: float = 1e-6


def verify_systole_comparison(cover, depth=2, node_cap=None, tol=1e-6):
    """Compare the systole of the total surface with that of the base."""
    from .geodesics.saddle import DEFAULT_NODE_CAP
    from .geodesics.systole import systole_estimate

    if cover.branched:
        raise BranchedCover("systole comparison needs an unbranched cover")
    cap = node_cap or DEFAULT_NODE_CAP
    st = systole_estimate(cover.total, depth, node_cap=cap).value
    sb = systole_estimate(cover.base, depth, node_cap=cap).value
    return SystoleComparison(st, sb, st >= sb - tol, tol)


# -- files --------------------------------------------------------------------------

def serialize_cover(cover):
    """Total surface in the surface format with one ``sheet`` line per polygon."""
    lines = [f"sheet {tid} {bid} {k}"
             for tid, (bid, k) in sorted(cover.sheet_of.items(), key=lambda kv: id_key(kv[0]))]
    return serialize_surface(cover.total, lines)


def parse_cover(text, base):
    """Rebuild a cover from its serialization and the base surface."""
    total, extra = parse_document(text)
    sheet_of, chart = {}, {}
    for tid, bid, k in extra["sheets"]:
        sheet_of[tid] = (bid, k)
        same = all((tp - bp).norm <= 1e-9
                   for tp, bp in zip(total.polygon(tid).vertices, base.polygon(bid).vertices))
        sg = 1.0 if same else -1.0
        chart[tid] = (bid, sg)
    degree = max(k for _, k in sheet_of.values()) + 1
    inv = None
    if degree == 2:
        inv = {tid: (_tid(bid, 1 - k), chart[tid][1] * chart[_tid(bid, 1 - k)][1])
               for tid, (bid, k) in sheet_of.items()}
    cover = CoverData(base, total, sheet_of, chart, inv, [], degree)
    cover.branch_points = _branch_points(cover)
    return cover


def area_ratio(cover):
    return area(cover.total) / area(cover.base)


def random_closed_geodesics(surface, n, rng, max_length=4.0, node_cap=None):
    """``n`` closed leaves of cylinders, each at a random height and cylinder.

    Cylinders with circumference up to ``max_length`` are found once; each sample
    picks one of them uniformly and a height uniformly in the middle 90%.
    """
    from .geodesics.saddle import DEFAULT_NODE_CAP, as_mesh, detect_cylinders, parallel_leaf

    mesh = as_mesh(surface)
    cyls = detect_cylinders(mesh, max_length, node_cap=node_cap or DEFAULT_NODE_CAP)
    if not cyls:
        raise BadParams(f"no cylinder with circumference <= {max_length}")
    out = []
    while len(out) < n:
        cyl = cyls[int(rng.integers(len(cyls)))]
        shift = (rng.random() - 0.5) * 0.9 * cyl.height
        leaf = parallel_leaf(mesh, cyl, shift)
        if leaf is not None:
            out.append(leaf)
    return out
