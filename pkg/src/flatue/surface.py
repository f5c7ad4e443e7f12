"""Half-translation surfaces presented as Euclidean polygons with edge gluings.

Edge ``i`` of a polygon runs from vertex ``i`` to vertex ``i + 1``.  Polygons are
counterclockwise.  A gluing identifies two edges by an isometry of the plane:

* ``T`` (translation, ``z -> z + c``): the two edge vectors are opposite,
* ``F`` (flip, ``z -> -z + c``): the two edge vectors are equal.

In both cases the start of one edge is sent to the end of the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import (
    AngleNotMultipleOfPi,
    DegeneratePolygon,
    InvalidSurface,
    SingularMatrix,
)

EPS_GLUE = 1e-9
EPS_ANGLE = 1e-7
EPS_DELAUNAY = 1e-9
EPS_DET = 1e-12

TRANSLATION = "T"
FLIP = "F"


class Vec2(NamedTuple):
    x: float
    y: float

    def __add__(self, other):
        return Vec2(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Vec2(self.x - other[0], self.y - other[1])

    def __neg__(self):
        return Vec2(-self.x, -self.y)

    def __mul__(self, k):
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    @property
    def norm(self):
        return math.hypot(self.x, self.y)


def cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def dot(a, b):
    return a[0] * b[0] + a[1] * b[1]


def id_key(pid):
    """Sort key putting numeric ids in numeric order before other ids."""
    s = str(pid)
    if s.isdigit():
        return (0, int(s), s)
    return (1, 0, s)


@dataclass(frozen=True)
class Polygon:
    id: str
    vertices: tuple

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(Vec2(float(x), float(y)) for x, y in self.vertices))

    def __len__(self):
        return len(self.vertices)

    def edge_vector(self, i):
        n = len(self.vertices)
        return self.vertices[(i + 1) % n] - self.vertices[i]

    def signed_area(self):
        v = self.vertices
        n = len(v)
        return 0.5 * sum(cross(v[i], v[(i + 1) % n]) for i in range(n))

    def interior_angle(self, i):
        v = self.vertices
        n = len(v)
        u = v[(i + 1) % n] - v[i]
        w = v[(i - 1) % n] - v[i]
        a = math.atan2(cross(u, w), dot(u, w))
        return a if a > 0 else a + 2 * math.pi

    def contains(self, p, tol=1e-9):
        """Closed containment test (boundary counts) by winding number."""
        v = self.vertices
        n = len(v)
        for i in range(n):
            a, b = v[i], v[(i + 1) % n]
            ab = b - a
            ap = Vec2(p[0] - a.x, p[1] - a.y)
            L = ab.norm
            if abs(cross(ab, ap)) <= tol * L and -tol * L <= dot(ab, ap) <= L * L + tol * L:
                return True
        wn = 0
        for i in range(n):
            a, b = v[i], v[(i + 1) % n]
            if a.y <= p[1]:
                if b.y > p[1] and cross(b - a, Vec2(p[0] - a.x, p[1] - a.y)) > 0:
                    wn += 1
            elif b.y <= p[1] and cross(b - a, Vec2(p[0] - a.x, p[1] - a.y)) < 0:
                wn -= 1
        return wn != 0


@dataclass(frozen=True, order=True)
class EdgeRef:
    polygon: str
    edge_index: int

    def sort_key(self):
        return (id_key(self.polygon), self.edge_index)

    def __str__(self):
        return f"{self.polygon}.{self.edge_index}"


@dataclass(frozen=True)
class Gluing:
    a: EdgeRef
    b: EdgeRef
    kind: str = TRANSLATION

    def canonical(self):
        if self.b.sort_key() < self.a.sort_key():
            return Gluing(self.b, self.a, self.kind)
        return self


@dataclass(frozen=True)
class ConePoint:
    vertex_class: frozenset
    angle: float
    order_k: int
    is_marked: bool

    @property
    def representative(self):
        return min(self.vertex_class, key=lambda c: (id_key(c[0]), c[1]))


@dataclass(frozen=True)
class Violation:
    where: str
    message: str

    def __str__(self):
        return f"{self.where}: {self.message}"


@dataclass(frozen=True)
class FlatSurface:
    polygons: tuple
    gluings: tuple
    marked: frozenset = frozenset()
    allow_disconnected: bool = False

    def __post_init__(self):
        object.__setattr__(self, "polygons", tuple(self.polygons))
        object.__setattr__(self, "gluings", tuple(self.gluings))
        object.__setattr__(self, "marked", frozenset(self.marked))

    @cached_property
    def polygon_map(self):
        return {p.id: p for p in self.polygons}

    def polygon(self, pid):
        return self.polygon_map[pid]

    @cached_property
    def partner_map(self):
        """EdgeRef -> (EdgeRef, kind); later duplicates overwrite earlier ones."""
        out = {}
        for g in self.gluings:
            out[g.a] = (g.b, g.kind)
            out[g.b] = (g.a, g.kind)
        return out

    def partner(self, e):
        return self.partner_map[e]

    def edge_vector(self, e):
        return self.polygon(e.polygon).edge_vector(e.edge_index)

    def edges(self):
        for p in self.polygons:
            for i in range(len(p)):
                yield EdgeRef(p.id, i)

    def is_triangulated(self):
        return all(len(p) == 3 for p in self.polygons)

    def with_(self, **kw):
        d = dict(polygons=self.polygons, gluings=self.gluings, marked=self.marked,
                 allow_disconnected=self.allow_disconnected)
        d.update(kw)
        return FlatSurface(**d)


def edge_isometry(surface, e):
    """Return ``(partner, s, c)`` with ``z -> s*z + c`` mapping edge ``e`` onto its partner."""
    f, kind = surface.partner(e)
    pe = surface.polygon(e.polygon)
    pf = surface.polygon(f.polygon)
    p0 = pe.vertices[e.edge_index]
    q1 = pf.vertices[(f.edge_index + 1) % len(pf)]
    s = 1.0 if kind == TRANSLATION else -1.0
    return f, s, Vec2(q1.x - s * p0.x, q1.y - s * p0.y)


def _segments_intersect(p1, p2, q1, q2, tol=1e-12):
    d1 = cross(p2 - p1, q1 - p1)
    d2 = cross(p2 - p1, q2 - p1)
    d3 = cross(q2 - q1, p1 - q1)
    d4 = cross(q2 - q1, p2 - q1)
    if ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and \
            ((d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol)):
        return True
    return False


def _polygon_is_simple(poly):
    v = poly.vertices
    n = len(v)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]):
                return False
    return True


def validate(surface):
    """Return the list of violated invariants; an empty list means valid."""
    out = []
    seen_ids = set()
    for p in surface.polygons:
        where = f"polygon {p.id}"
        if p.id in seen_ids:
            out.append(Violation(where, "duplicate polygon id"))
        seen_ids.add(p.id)
        if len(p) < 3:
            out.append(Violation(where, "fewer than 3 vertices"))
            continue
        if not all(math.isfinite(c) for v in p.vertices for c in v):
            out.append(Violation(where, "non-finite coordinate"))
            continue
        if p.signed_area() <= 0:
            out.append(Violation(where, "not counterclockwise (signed area must be positive)"))
        if not _polygon_is_simple(p):
            out.append(Violation(where, "polygon is not simple"))

    counts = {}
    pm = surface.polygon_map
    for g in surface.gluings:
        where = f"glue {g.a} {g.b}"
        bad = False
        for e in (g.a, g.b):
            if e.polygon not in pm or not 0 <= e.edge_index < len(pm[e.polygon]):
                out.append(Violation(where, f"unknown edge {e}"))
                bad = True
        if g.kind not in (TRANSLATION, FLIP):
            out.append(Violation(where, f"unknown gluing kind {g.kind!r}"))
            bad = True
        if g.a == g.b:
            out.append(Violation(where, "edge glued to itself"))
            bad = True
        for e in (g.a, g.b):
            counts[e] = counts.get(e, 0) + 1
        if bad:
            continue
        wa, wb = surface.edge_vector(g.a), surface.edge_vector(g.b)
        if g.kind == TRANSLATION:
            if (wa + wb).norm > EPS_GLUE:
                out.append(Violation(where, "Translation requires opposite edge vectors"))
        elif (wa - wb).norm > EPS_GLUE:
            out.append(Violation(where, "Flip requires equal edge vectors"))
    for e in surface.edges():
        c = counts.get(e, 0)
        if c != 1:
            out.append(Violation(f"edge {e}", f"appears in {c} gluings (expected exactly 1)"))
    for pid, i in surface.marked:
        if pid not in pm or not 0 <= i < len(pm[pid]):
            out.append(Violation(f"marked {pid}.v{i}", "unknown vertex"))
    if out:
        return out

    if not surface.allow_disconnected and len(connected_components(surface)) > 1:
        out.append(Violation("surface", "surface is not connected"))
    if not area(surface) > 0:
        out.append(Violation("surface", "total area must be positive"))
    try:
        cps = cone_points(surface)
    except AngleNotMultipleOfPi as exc:
        out.append(Violation("surface", str(exc)))
    else:
        for pid, i in surface.marked:
            cp = next(c for c in cps if (pid, i) in c.vertex_class)
            if cp.order_k != 0:
                out.append(Violation(f"marked {pid}.v{i}", "marked point must have cone angle 2pi"))
    return out


def check_valid(surface):
    problems = validate(surface)
    if problems:
        raise InvalidSurface("; ".join(str(v) for v in problems))
    return surface


def connected_components(surface):
    """Polygon ids grouped by connectivity through gluings, in canonical order."""
    parent = {p.id: p.id for p in surface.polygons}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in surface.gluings:
        if g.a.polygon in parent and g.b.polygon in parent:
            ra, rb = find(g.a.polygon), find(g.b.polygon)
            if ra != rb:
                parent[ra] = rb
    groups = {}
    for p in surface.polygons:
        groups.setdefault(find(p.id), []).append(p.id)
    comps = [sorted(g, key=id_key) for g in groups.values()]
    return sorted(comps, key=lambda g: id_key(g[0]))


def vertex_classes(surface):
    """Orbits of polygon corners ``(pid, i)`` under the gluing identifications."""
    parent = {}
    for p in surface.polygons:
        for i in range(len(p)):
            parent[(p.id, i)] = (p.id, i)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    pm = surface.polygon_map
    for g in surface.gluings:
        na, nb = len(pm[g.a.polygon]), len(pm[g.b.polygon])
        i, j = g.a.edge_index, g.b.edge_index
        union((g.a.polygon, i), (g.b.polygon, (j + 1) % nb))
        union((g.a.polygon, (i + 1) % na), (g.b.polygon, j))
    groups = {}
    for c in parent:
        groups.setdefault(find(c), set()).add(c)
    key = lambda c: (id_key(c[0]), c[1])
    classes = [frozenset(g) for g in groups.values()]
    return sorted(classes, key=lambda g: key(min(g, key=key)))


def cone_points(surface):
    """Every vertex class with its total angle; angle-2pi classes are marked points."""
    pm = surface.polygon_map
    out = []
    for cls in vertex_classes(surface):
        angle = sum(pm[pid].interior_angle(i) for pid, i in cls)
        m = angle / math.pi
        mi = round(m)
        if abs(m - mi) > EPS_ANGLE or mi < 1:
            rep = min(cls, key=lambda c: (id_key(c[0]), c[1]))
            raise AngleNotMultipleOfPi(
                f"vertex class of {rep[0]}.v{rep[1]} has angle {m!r}*pi, not a multiple of pi")
        out.append(ConePoint(cls, angle, mi - 2, mi == 2))
    return out


def euler_characteristic(surface):
    return len(vertex_classes(surface)) - len(surface.gluings) + len(surface.polygons)


def area(surface):
    return float(sum(p.signed_area() for p in surface.polygons))


def teichmuller_matrix(t):
    return np.array([[math.exp(-t), 0.0], [0.0, math.exp(t)]])


def rotation_matrix(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def apply_matrix(surface, m):
    """Image of the surface under a real 2x2 matrix acting on every chart."""
    m = np.asarray(m, dtype=float)
    det = float(np.linalg.det(m))
    if abs(det) < EPS_DET:
        raise SingularMatrix(f"matrix determinant {det!r} is (numerically) zero")
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]

    def img(v):
        return (a * v.x + b * v.y, c * v.x + d * v.y)

    if det > 0:
        polys = [Polygon(p.id, [img(v) for v in p.vertices]) for p in surface.polygons]
        return surface.with_(polygons=polys)

    # Orientation reversing: reverse vertex order so polygons stay counterclockwise.
    # Old vertex i becomes n-1-i and old edge i becomes n-2-i.
    sizes = {p.id: len(p) for p in surface.polygons}
    polys = [Polygon(p.id, [img(v) for v in reversed(p.vertices)]) for p in surface.polygons]

    def eref(e):
        n = sizes[e.polygon]
        return EdgeRef(e.polygon, (n - 2 - e.edge_index) % n)

    glue = [Gluing(eref(g.a), eref(g.b), g.kind) for g in surface.gluings]
    marked = {(pid, sizes[pid] - 1 - i) for pid, i in surface.marked}
    return surface.with_(polygons=polys, gluings=glue, marked=marked)


def _ear_clip(poly):
    """Triangles as index triples into ``poly.vertices``; each triple is counterclockwise."""
    v = poly.vertices
    n = len(v)
    scale = max(poly.edge_vector(i).norm for i in range(n))
    # straight-angle corners are allowed (they can be cone points of angle pi);
    # they are never ear tips, and every emitted triangle must be non-degenerate
    idx = list(range(n))
    tris = []
    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 10 * n * n:
            raise DegeneratePolygon(f"polygon {poly.id} could not be triangulated")
        m = len(idx)
        for k in range(m):
            ia, ib, ic = idx[(k - 1) % m], idx[k], idx[(k + 1) % m]
            a, b, c = v[ia], v[ib], v[ic]
            if cross(b - a, c - b) <= 0:
                continue
            ok = True
            for j in idx:
                if j in (ia, ib, ic):
                    continue
                p = v[j]
                if cross(b - a, p - a) >= 0 and cross(c - b, p - b) >= 0 and cross(a - c, p - c) >= 0:
                    ok = False
                    break
            if ok:
                tris.append((ia, ib, ic))
                del idx[k]
                break
    tris.append(tuple(idx))
    for ia, ib, ic in tris:
        if cross(v[ib] - v[ia], v[ic] - v[ia]) <= EPS_GLUE * scale * scale:
            raise DegeneratePolygon(f"polygon {poly.id} could not be triangulated without slivers")
    return tris


def triangulate_with_parents(surface):
    """Triangulate; return ``(surface, parent)`` with ``parent[tri_id] = polygon_id``.

    Triangles keep the coordinates of the polygon they came from.  Polygons that
    already are triangles keep their id.
    """
    if surface.is_triangulated():
        return surface, {p.id: p.id for p in surface.polygons}
    polys = []
    parent = {}
    edge_map = {}
    internal = {}
    corner_map = {}
    for p in surface.polygons:
        n = len(p)
        if n == 3:
            polys.append(p)
            parent[p.id] = p.id
            for i in range(3):
                edge_map[EdgeRef(p.id, i)] = EdgeRef(p.id, i)
                corner_map[(p.id, i)] = (p.id, i)
            continue
        for j, tri in enumerate(_ear_clip(p)):
            tid = f"{p.id}/{j}"
            polys.append(Polygon(tid, [p.vertices[k] for k in tri]))
            parent[tid] = p.id
            for e in range(3):
                a, b = tri[e], tri[(e + 1) % 3]
                corner_map.setdefault((p.id, a), (tid, e))
                if b == (a + 1) % n:
                    edge_map[EdgeRef(p.id, a)] = EdgeRef(tid, e)
                else:
                    internal.setdefault((p.id, min(a, b), max(a, b)), []).append(EdgeRef(tid, e))
    gl = [Gluing(edge_map[g.a], edge_map[g.b], g.kind) for g in surface.gluings]
    for refs in internal.values():
        gl.append(Gluing(refs[0], refs[1], TRANSLATION))
    marked = {corner_map[c] for c in surface.marked}
    out = surface.with_(polygons=polys, gluings=gl, marked=marked)
    return out, parent


def triangulate(surface):
    return triangulate_with_parents(surface)[0]


def delaunay_normalize(surface, max_flips=None):
    """Flip edges until the triangulation is Delaunay; return ``(surface, flip_count)``."""
    from .mesh import TriMesh

    if not surface.is_triangulated():
        raise ValueError("delaunay_normalize requires a triangulated surface")
    mesh = TriMesh(surface)
    flips = mesh.make_delaunay(max_flips=max_flips)
    return mesh.to_surface(), flips


def canonical(surface):
    """Canonical ordering: polygons by id, gluings normalised and sorted."""
    polys = sorted(surface.polygons, key=lambda p: id_key(p.id))
    glue = sorted((g.canonical() for g in surface.gluings),
                  key=lambda g: (g.a.sort_key(), g.b.sort_key(), g.kind))
    return surface.with_(polygons=polys, gluings=glue)


def max_aspect_ratio(surface):
    """Largest ``longest_edge**2 / area`` over the polygons."""
    worst = 0.0
    for p in surface.polygons:
        longest = max(p.edge_vector(i).norm for i in range(len(p)))
        worst = max(worst, longest * longest / p.signed_area())
    return worst
