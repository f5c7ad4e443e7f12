"""Saddle connections and cylinders by wedge development.

From every corner at a vertex of the triangulation we develop the open wedge
of directions spanned by that corner across neighbouring triangles.  Each
time the far vertex of a newly entered triangle falls strictly inside the
wedge it is the end of a saddle connection, and the wedge is split there (no
straight segment can pass through a vertex).  Wedges whose exit edge no
longer meets the search region are dropped, which makes the search complete
for convex regions containing the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import NoConePoints, SearchBudgetExceeded
from ..mesh import TriMesh
from ..paths import CurvePath, merge_pieces
from ..surface import Vec2

DEFAULT_NODE_CAP = 10_000_000
_REL = 1e-12
_ABS = 1e-11


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def _angle_from(ux, uy, wx, wy):
    """Counterclockwise angle in [0, 2pi) from u to w."""
    a = math.atan2(_cross(ux, uy, wx, wy), ux * wx + uy * wy)
    return a if a >= 0 else a + 2 * math.pi


def as_mesh(surface, marked_singular=True):
    return surface if isinstance(surface, TriMesh) else TriMesh(surface, marked_singular)


# -- search regions --------------------------------------------------------------

class Disk:
    """Holonomy vectors of length at most ``radius``."""

    def __init__(self, radius):
        self.radius = float(radius)

    def contains(self, x, y):
        return math.hypot(x, y) <= self.radius * (1 + 1e-12)

    def meets(self, p, q):
        px, py = p
        dx, dy = q[0] - px, q[1] - py
        dd = dx * dx + dy * dy
        u = 0.0 if dd == 0 else min(1.0, max(0.0, -(px * dx + py * dy) / dd))
        return math.hypot(px + u * dx, py + u * dy) <= self.radius * (1 + 1e-12)


class Box:
    """Holonomy vectors with ``|x| <= hx`` and ``|y| <= hy``."""

    def __init__(self, hx, hy):
        self.hx, self.hy = float(hx), float(hy)

    def contains(self, x, y):
        return abs(x) <= self.hx * (1 + 1e-12) and abs(y) <= self.hy * (1 + 1e-12)

    def meets(self, p, q):
        # Liang-Barsky clip of the segment against the box
        u0, u1 = 0.0, 1.0
        dx, dy = q[0] - p[0], q[1] - p[1]
        hx, hy = self.hx * (1 + 1e-12), self.hy * (1 + 1e-12)
        for pk, qk in ((-dx, p[0] + hx), (dx, hx - p[0]), (-dy, p[1] + hy), (dy, hy - p[1])):
            if pk == 0:
                if qk < 0:
                    return False
            else:
                r = qk / pk
                if pk < 0:
                    u0 = max(u0, r)
                else:
                    u1 = min(u1, r)
                if u0 > u1:
                    return False
        return True


# -- data types --------------------------------------------------------------

@dataclass
class SaddleConnection:
    """Straight segment between two vertex classes with no vertex in its interior.

    ``holonomy`` is expressed in the frame of the starting triangle.  The angular
    positions ``start_angle`` / ``end_angle`` measure, inside the cone angle of the
    respective point, where the connection leaves the start and where its
    reversal leaves the end.
    """

    holonomy: Vec2
    start: int
    end: int
    start_corner: tuple
    end_corner: tuple
    start_angle: float
    end_angle: float
    end_sign: float = 1.0
    mesh: TriMesh = field(default=None, repr=False, compare=False)

    @property
    def length(self):
        return self.holonomy.norm

    def reverse_holonomy(self):
        """Holonomy of the reversed connection in the frame of the end triangle."""
        return Vec2(-self.end_sign * self.holonomy.x, -self.end_sign * self.holonomy.y)

    def pieces(self):
        """``(triangle, a, b)`` pieces found by re-developing the segment."""
        m = self.mesh
        t, i = self.start_corner
        L = self.length
        d = (self.holonomy.x / L, self.holonomy.y / L)
        out = []
        for tt, a, b, _, tau, hit, _ in m.walk(t, m.P[t][i], d, start_corner=i):
            out.append((tt, a, b))
            L -= tau
            if hit is not None or L < -1e-7:
                break
        return out

    @property
    def path(self):
        return merge_pieces([(self.mesh.owner(t), a, b) for t, a, b in self.pieces()])


@dataclass
class Cylinder:
    core_holonomy: Vec2
    circumference: float
    height: float
    boundary: list
    core: CurvePath = field(default=None, repr=False)
    anchor: tuple = field(default=None, repr=False)  # (triangle, point, direction) on the core

    @property
    def modulus(self):
        return self.height / self.circumference


# -- enumeration -------------------------------------------------------------

def _sweep(mesh, region, node_cap, classes=None):
    """Yield every saddle connection whose holonomy lies in ``region``."""
    P = mesh.P
    nbr = mesh.nbr
    nodes = 0
    scale = max(abs(c) for T in P for v in T for c in v)
    for t0 in range(len(P)):
        for i in range(3):
            k = mesh.cls[t0][i]
            if classes is not None and k not in classes:
                continue
            ox, oy = P[t0][i]
            ax, ay = P[t0][(i + 1) % 3][0] - ox, P[t0][(i + 1) % 3][1] - oy
            bx, by = P[t0][(i - 1) % 3][0] - ox, P[t0][(i - 1) % 3][1] - oy
            off = mesh.corner_offset[(t0, i)]

            def record(cx, cy, t2, c2, sg):
                # angle of the reversed direction at the end corner
                Q = P[t2]
                ux, uy = Q[(c2 + 1) % 3][0] - Q[c2][0], Q[(c2 + 1) % 3][1] - Q[c2][1]
                end_ang = mesh.corner_offset[(t2, c2)] + _angle_from(ux, uy, -sg * cx, -sg * cy)
                return SaddleConnection(
                    Vec2(cx, cy), k, mesh.cls[t2][c2], (t0, i), (t2, c2),
                    off + _angle_from(ax, ay, cx, cy), end_ang, sg, mesh)

            # the edge leaving the corner is itself a connection
            if region.contains(ax, ay):
                yield record(ax, ay, t0, (i + 1) % 3, 1.0)
            # stack items: (triangle, edge to leave by, sign, dx, dy, wedge a, wedge b)
            stack = [(t0, (i + 1) % 3, 1.0, -ox, -oy, ax, ay, bx, by)]
            while stack:
                t, f, sg, dx, dy, wax, way, wbx, wby = stack.pop()
                nodes += 1
                if nodes > node_cap:
                    raise SearchBudgetExceeded(f"saddle-connection search exceeded {node_cap} nodes")
                t2, f2, s = nbr[t][f]
                Q = P[t2]
                q1 = Q[(f2 + 1) % 3]
                p0 = P[t][f]
                ccx, ccy = q1[0] - s * p0[0], q1[1] - s * p0[1]
                sg2 = sg * s
                dx2, dy2 = dx - sg2 * ccx, dy - sg2 * ccy
                # developed vertices: X = edge start (left), Y = edge end (right), C = apex
                c2 = (f2 + 2) % 3
                Xx, Xy = sg2 * Q[f2][0] + dx2, sg2 * Q[f2][1] + dy2
                Yx, Yy = sg2 * q1[0] + dx2, sg2 * q1[1] + dy2
                Cx, Cy = sg2 * Q[c2][0] + dx2, sg2 * Q[c2][1] + dy2
                # distance of C from the wedge rays, against the rounding scale of the development
                tol = _ABS * (scale + abs(dx2) + abs(dy2) + math.hypot(Cx, Cy))
                right_of_b = _cross(Cx, Cy, wbx, wby) > tol * math.hypot(wbx, wby)
                left_of_a = _cross(wax, way, Cx, Cy) > tol * math.hypot(wax, way)
                if left_of_a and right_of_b:
                    if region.contains(Cx, Cy):
                        yield record(Cx, Cy, t2, c2, sg2)
                    parts = ((f2 + 1) % 3, wax, way, Cx, Cy, Yx, Yy, Cx, Cy), \
                            ((f2 + 2) % 3, Cx, Cy, wbx, wby, Cx, Cy, Xx, Xy)
                elif not left_of_a:
                    parts = (((f2 + 2) % 3, wax, way, wbx, wby, Cx, Cy, Xx, Xy),)
                else:
                    parts = (((f2 + 1) % 3, wax, way, wbx, wby, Yx, Yy, Cx, Cy),)
                for e, ax2, ay2, bx2, by2, Rx, Ry, Lx, Ly in parts:
                    if _cross(ax2, ay2, bx2, by2) <= _REL * math.hypot(ax2, ay2) * math.hypot(bx2, by2):
                        continue
                    r = _clip(Rx, Ry, Lx, Ly, ax2, ay2, bx2, by2)
                    if r is None or not region.meets(r[0], r[1]):
                        continue
                    stack.append((t2, e, sg2, dx2, dy2, ax2, ay2, bx2, by2))


def _ray_hit(Rx, Ry, Lx, Ly, wx, wy):
    ex, ey = Lx - Rx, Ly - Ry
    den = _cross(wx, wy, ex, ey)
    if den == 0:
        return None
    u = -_cross(wx, wy, Rx, Ry) / den
    u = min(1.0, max(0.0, u))
    return (Rx + u * ex, Ry + u * ey)


def _clip(Rx, Ry, Lx, Ly, ax, ay, bx, by):
    """Part of segment R->L (R on the right as seen from the origin) inside wedge (a, b)."""
    r = (Rx, Ry) if _cross(ax, ay, Rx, Ry) >= 0 else _ray_hit(Rx, Ry, Lx, Ly, ax, ay)
    l = (Lx, Ly) if _cross(Lx, Ly, bx, by) >= 0 else _ray_hit(Rx, Ry, Lx, Ly, bx, by)
    if r is None or l is None:
        return ((Rx, Ry), (Lx, Ly))
    return (r, l)


def enumerate_saddle_connections(surface, L, node_cap=DEFAULT_NODE_CAP, region=None):
    """All oriented saddle connections of length at most ``L``.

    ``surface`` may be a FlatSurface or a prepared TriMesh.  Every connection is
    listed once from each end, so the holonomy set is closed under reversal.
    """
    mesh = as_mesh(surface)
    if region is None:
        if not L > 0:
            return []
        region = Disk(L)
    out = list(_sweep(mesh, region, node_cap))
    out.sort(key=lambda sc: (sc.length, sc.start, sc.start_angle))
    return out


def min_edge_length(mesh):
    """Shortest triangle edge; every edge is a saddle connection."""
    return min(math.hypot(P[(i + 1) % 3][0] - P[i][0], P[(i + 1) % 3][1] - P[i][1])
               for P in mesh.P for i in range(3))


def shortest_saddle_connection(surface, node_cap=DEFAULT_NODE_CAP):
    """``(length, witness)`` of a shortest saddle connection."""
    mesh = as_mesh(surface)
    if mesh.n_classes == 0:
        raise NoConePoints("surface has no cone or marked points")
    L = min_edge_length(mesh)
    while True:
        scs = enumerate_saddle_connections(mesh, L, node_cap)
        if scs:
            return scs[0].length, scs[0]
        L *= 2


# -- cylinders --------------------------------------------------------------

_CYL_OFFSET = 1e-7


def _trace_closed(mesh, t, p, d, max_len):
    """Trace the leaf from ``p`` in unit direction ``d``; return pieces if it closes."""
    pieces = []
    total = 0.0
    for tt, a, b, e, tau, hit, cur in mesh.walk(t, p, d):
        if hit is not None:
            return None
        if pieces and tt == t and cur[0] * d[0] + cur[1] * d[1] > 0.5:
            # back in the start triangle heading the same way: do we pass through p?
            u = (p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]
            if -1e-9 <= u <= tau + 1e-9 and abs(_cross(d[0], d[1], p[0] - a[0], p[1] - a[1])) <= 1e-9:
                pieces.append((tt, a, p, e, cur))
                return pieces, total + u
        pieces.append((tt, a, b, e, cur))
        total += tau
        if total > max_len:
            return None


def _cylinder_from(mesh, sc, max_len):
    """Cylinder on the left of ``sc`` if there is one with circumference <= max_len."""
    # start beside the middle of the longest piece, safely inside one triangle
    tm, a, b = max(sc.pieces(), key=lambda q: math.hypot(q[2][0] - q[1][0], q[2][1] - q[1][1]))
    seg = math.hypot(b[0] - a[0], b[1] - a[1])
    d = ((b[0] - a[0]) / seg, (b[1] - a[1]) / seg)
    nx, ny = -d[1], d[0]
    mx, my = 0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])
    start = (mx + _CYL_OFFSET * nx, my + _CYL_OFFSET * ny)
    res = _trace_closed(mesh, tm, start, d, max_len)
    if res is None:
        return None
    pieces, circ = res
    # heights of crossed-triangle vertices relative to the traced leaf
    up = math.inf
    down = math.inf
    for tt, a, b, e, dd in pieces:
        enx, eny = -dd[1], dd[0]
        for v in mesh.P[tt]:
            y = (v[0] - a[0]) * enx + (v[1] - a[1]) * eny
            if y > 1e-12:
                up = min(up, y)
            elif y < -1e-12:
                down = min(down, -y)
    height = up + down
    if not math.isfinite(height):
        return None
    return pieces, circ, height, (tm, start, d), up


def detect_cylinders(surface, L, direction=None, node_cap=DEFAULT_NODE_CAP, connections=None):
    """Maximal cylinders with circumference at most ``L``.

    If ``direction`` is given only cylinders parallel to it (up to sign) are kept.
    """
    mesh = as_mesh(surface)
    if connections is None:
        connections = enumerate_saddle_connections(mesh, L, node_cap)
    found = {}
    for sc in connections:
        if direction is not None:
            dx, dy = direction
            if abs(_cross(dx, dy, sc.holonomy.x, sc.holonomy.y)) > 1e-9 * sc.length * math.hypot(dx, dy):
                continue
        r = _cylinder_from(mesh, sc, L * (1 + 1e-9) + 1e-9)
        if r is None:
            continue
        pieces, circ, height, (tm, start, d), up = r
        # canonical representative: the core leaf at mid-height
        shift = 0.5 * height - _CYL_OFFSET
        core = _core_leaf(mesh, tm, start, d, shift, circ)
        if core is None:
            continue
        key = _leaf_key(mesh, core[0])
        if key in found:
            found[key][0].append(sc)
            continue
        cp, cc = core
        t0, a0, _, _, dd = cp[0]
        found[key] = ([sc], Cylinder(Vec2(circ * dd[0], circ * dd[1]), circ, height, None,
                                     merge_pieces([(mesh.owner(t), a, b) for t, a, b, _, _ in cp],
                                                  closed=True), (t0, a0, dd)))
    out = []
    for bnd, cyl in found.values():
        cyl.boundary = bnd
        out.append(cyl)
    out.sort(key=lambda c: (c.circumference, -c.height))
    return out


def _leaf_key(mesh, pieces):
    """Orientation-free signature of a closed leaf: where and how it crosses edges."""
    out = set()
    for t, a, b, e, d in pieces[:-1]:  # the last piece stops short at the start point
        t2, e2, _ = mesh.nbr[t][e]
        if (t2, e2) < (t, e):
            # describe the crossing from the partner side
            _, _, s, cx, cy = mesh.edge_map(t, e)
            b = (s * b[0] + cx, s * b[1] + cy)
            d = (s * d[0], s * d[1])
            t, e = t2, e2
        P0, P1 = mesh.P[t][e], mesh.P[t][(e + 1) % 3]
        ex, ey = P1[0] - P0[0], P1[1] - P0[1]
        n = math.hypot(ex, ey)
        u = ((b[0] - P0[0]) * ex + (b[1] - P0[1]) * ey) / (n * n)
        c = (d[0] * ex + d[1] * ey) / n
        if _cross(ex, ey, d[0], d[1]) < 0:
            c = -c
        out.add((t, e, round(u, 6), round(c, 6)))
    return frozenset(out)


def _core_leaf(mesh, t, p, d, shift, circ):
    """Trace the parallel leaf ``shift`` to the left of ``p``."""
    rem = shift
    for tt, a, b, e, tau, hit, cur in mesh.walk(t, p, (-d[1], d[0])):
        if tau >= rem:
            q = (a[0] + rem * cur[0], a[1] + rem * cur[1])
            # the leaf direction is the perpendicular rotated back clockwise
            return _trace_closed(mesh, tt, q, (cur[1], -cur[0]), circ * (1 + 1e-6) + 1e-9)
        if hit is not None:
            return None
        rem -= tau


def parallel_leaf(mesh, cyl, shift):
    """Closed leaf of ``cyl`` at signed distance ``shift`` to the left of its core."""
    if abs(shift) >= 0.5 * cyl.height:
        return None
    t, p, d = cyl.anchor
    if shift < 0:
        d = (-d[0], -d[1])
    res = _core_leaf(mesh, t, p, d, abs(shift), cyl.circumference) if shift else \
        _trace_closed(mesh, t, p, d, cyl.circumference * (1 + 1e-6) + 1e-9)
    if res is None:
        return None
    pieces, _ = res
    return merge_pieces([(mesh.owner(tt), a, b) for tt, a, b, _, _ in pieces], closed=True)
