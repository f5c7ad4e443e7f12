"""Index-based triangle mesh over a flat surface.

Geometric algorithms (developing straight lines, flipping edges, sweeping
wedges) work here on integer triangle indices and float tuples; results are
converted back to :class:`~flatue.surface.FlatSurface` at the boundary.
"""

from __future__ import annotations

import math

from .errors import FlipLimitExceeded, PointOffSurface
from .surface import (
    FLIP,
    TRANSLATION,
    EdgeRef,
    FlatSurface,
    Gluing,
    Polygon,
    id_key,
    triangulate_with_parents,
)

EPS_HIT = 1e-9
TWO_PI = 2 * math.pi


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def _corner_angle(P, i):
    ax, ay = P[i]
    bx, by = P[(i + 1) % 3]
    cx, cy = P[(i - 1) % 3]
    ux, uy = bx - ax, by - ay
    wx, wy = cx - ax, cy - ay
    a = math.atan2(ux * wy - uy * wx, ux * wx + uy * wy)
    return a if a > 0 else a + TWO_PI


class TriMesh:
    """Triangulated surface with adjacency, vertex classes and gluing isometries.

    ``P[t]`` holds the three vertices of triangle ``t`` as ``(x, y)`` tuples.
    ``nbr[t][e] = (t2, e2, s)`` says edge ``e`` of ``t`` is glued to edge ``e2``
    of ``t2`` by ``z -> s*z + c``.
    """

    def __init__(self, surface: FlatSurface, marked_singular: bool = True):
        tri, parent = triangulate_with_parents(surface)
        self.source = surface
        self.marked_singular = marked_singular
        self.ids = [p.id for p in tri.polygons]
        self.index = {pid: k for k, pid in enumerate(self.ids)}
        self.parent = [parent[pid] for pid in self.ids]
        self.P = [[(v.x, v.y) for v in p.vertices] for p in tri.polygons]
        self.nbr = [[None] * 3 for _ in self.ids]
        for g in tri.gluings:
            s = 1.0 if g.kind == TRANSLATION else -1.0
            ta, tb = self.index[g.a.polygon], self.index[g.b.polygon]
            self.nbr[ta][g.a.edge_index] = (tb, g.b.edge_index, s)
            self.nbr[tb][g.b.edge_index] = (ta, g.a.edge_index, s)
        self.marked_corners = set((self.index[pid], i) for pid, i in tri.marked)
        self.allow_disconnected = surface.allow_disconnected
        self.flipped = False
        self._build_classes()

    # -- vertex classes ----------------------------------------------------------
    def _build_classes(self):
        T = len(self.P)
        self.cls = [[-1] * 3 for _ in range(T)]
        self.class_corners = []
        for t in range(T):
            for i in range(3):
                if self.cls[t][i] >= 0:
                    continue
                k = len(self.class_corners)
                ring = []
                c = (t, i)
                while True:
                    self.cls[c[0]][c[1]] = k
                    ring.append(c)
                    c = self.ccw_next(*c)
                    if c == (t, i):
                        break
                    if self.cls[c[0]][c[1]] >= 0:
                        break
                self.class_corners.append(ring)
        self.class_cum = []
        self.class_angle = []
        self.corner_offset = {}
        for ring in self.class_corners:
            acc = 0.0
            cum = []
            for c in ring:
                cum.append(acc)
                self.corner_offset[c] = acc
                acc += _corner_angle(self.P[c[0]], c[1])
            self.class_cum.append(cum)
            self.class_angle.append(acc)
        self.class_marked = [abs(a - TWO_PI) < 1e-6 for a in self.class_angle]
        self.class_singular = [(not m) or self.marked_singular for m in self.class_marked]

    def ccw_next(self, t, i):
        """Next corner counterclockwise around the vertex at corner ``(t, i)``."""
        t2, e2, _ = self.nbr[t][(i - 1) % 3]
        return (t2, e2)

    def cw_next(self, t, i):
        t2, e2, _ = self.nbr[t][i]
        return (t2, (e2 + 1) % 3)

    @property
    def n_classes(self):
        return len(self.class_corners)

    def singular_classes(self):
        return [k for k in range(self.n_classes) if self.class_singular[k]]

    # -- isometries ----------------------------------------------------------
    def edge_map(self, t, e):
        """``(t2, e2, s, cx, cy)`` with ``z -> s*z + c`` carrying edge ``e`` of ``t`` to its partner."""
        t2, e2, s = self.nbr[t][e]
        p0 = self.P[t][e]
        q1 = self.P[t2][(e2 + 1) % 3]
        return t2, e2, s, q1[0] - s * p0[0], q1[1] - s * p0[1]

    def area(self):
        tot = 0.0
        for P in self.P:
            (ax, ay), (bx, by), (cx, cy) = P
            tot += 0.5 * _cross(bx - ax, by - ay, cx - ax, cy - ay)
        return tot

    # -- point location ----------------------------------------------------------
    def triangles_of(self, pid):
        if self.flipped:
            return [self.index[pid]] if pid in self.index else []
        return [t for t, par in enumerate(self.parent) if par == pid]

    def locate(self, pid, p, direction=None, tol=1e-9):
        """Triangle of polygon ``pid`` containing ``p``.

        If ``direction`` is given the triangle must also contain a short initial
        piece of the ray from ``p`` (needed when ``p`` is on an edge or vertex).
        """
        cands = self.triangles_of(pid)
        if not cands:
            raise PointOffSurface(f"unknown polygon {pid!r}")
        best = None
        for t in cands:
            P = self.P[t]
            ok = True
            worst = 0.0
            for e in range(3):
                ax, ay = P[e]
                bx, by = P[(e + 1) % 3]
                L = math.hypot(bx - ax, by - ay)
                c = _cross(bx - ax, by - ay, p[0] - ax, p[1] - ay) / L
                if c < -tol:
                    ok = False
                    break
                if direction is not None and abs(c) <= tol:
                    cd = _cross(bx - ax, by - ay, direction[0], direction[1])
                    if cd < -1e-12 * L * math.hypot(*direction):
                        ok = False
                        break
                worst = min(worst, c)
            if ok:
                if best is None or worst > best[1]:
                    best = (t, worst)
        if best is None:
            raise PointOffSurface(f"point {tuple(p)} is not in polygon {pid!r}")
        return best[0]

    def owner(self, t):
        """Polygon id that curve pieces in triangle ``t`` are reported against."""
        return self.ids[t] if self.flipped else self.parent[t]

    def vertex_at(self, t, p, tol=EPS_HIT):
        for i in range(3):
            if math.hypot(self.P[t][i][0] - p[0], self.P[t][i][1] - p[1]) <= tol:
                return i
        return None

    # -- straight-line walking -------------------------------------------------
    def walk(self, t, p, d, entry=None, start_corner=None):
        """Develop the ray from ``p`` in direction ``d`` (unit) through the mesh.

        Yields ``(t, (x0, y0), (x1, y1), exit_edge, length, hit, (dx, dy))`` per
        triangle,
        where ``hit`` is the corner index the ray runs into (within ``EPS_HIT``)
        or ``None``.  After a hit the generator stops; otherwise it continues
        into the neighbouring triangle forever, so consumers must break.
        """
        px, py = p
        dx, dy = d
        exclude = set()
        if entry is not None:
            exclude.add(entry)
        if start_corner is not None:
            exclude.add(start_corner)
            exclude.add((start_corner - 1) % 3)
        while True:
            P = self.P[t]
            best_tau = math.inf
            best_e = -1
            for e in range(3):
                if e in exclude:
                    continue
                ax, ay = P[e]
                bx, by = P[(e + 1) % 3]
                ex, ey = bx - ax, by - ay
                den = _cross(ex, ey, dx, dy)
                if den >= 0:
                    continue
                tau = _cross(ex, ey, px - ax, py - ay) / -den
                if tau < best_tau:
                    best_tau = tau
                    best_e = e
            if best_e < 0:
                # Numerically grazing: leave through the edge we are closest to crossing.
                best_e = min((e for e in range(3) if e not in exclude), key=lambda e: 0)
                best_tau = 0.0
            if best_tau < 0:
                best_tau = 0.0
            qx, qy = px + best_tau * dx, py + best_tau * dy
            hit = None
            for k in (best_e, (best_e + 1) % 3):
                vx, vy = P[k]
                if abs(qx - vx) <= EPS_HIT and abs(qy - vy) <= EPS_HIT and \
                        math.hypot(qx - vx, qy - vy) <= EPS_HIT:
                    hit = k
            yield t, (px, py), (qx, qy), best_e, best_tau, hit, (dx, dy)
            if hit is not None:
                return
            t2, e2, s = self.nbr[t][best_e]
            p0 = P[best_e]
            q1 = self.P[t2][(e2 + 1) % 3]
            cx, cy = q1[0] - s * p0[0], q1[1] - s * p0[1]
            px, py = s * qx + cx, s * qy + cy
            dx, dy = s * dx, s * dy
            t = t2
            exclude = {e2}

    # -- Delaunay flips ------------------------------------------------------
    def _opposite_angle_sum(self, t, e):
        t2, e2, s = self.nbr[t][e]
        return _corner_angle(self.P[t], (e + 2) % 3) + _corner_angle(self.P[t2], (e2 + 2) % 3)

    def is_delaunay_edge(self, t, e, eps=1e-9):
        t2, e2, _ = self.nbr[t][e]
        if t2 == t:
            return True
        return self._opposite_angle_sum(t, e) <= math.pi + eps

    def flip(self, t, e):
        """Flip the diagonal ``e`` of triangle ``t``; triangles keep their indices."""
        t2, e2, s = self.nbr[t][e]
        if t2 == t:
            raise ValueError("cannot flip an edge glued within one triangle")
        P = self.P[t]
        Pp, Qp, R = P[e], P[(e + 1) % 3], P[(e + 2) % 3]
        # develop t2 into t's frame
        P2 = self.P[t2]
        q1 = P2[(e2 + 1) % 3]
        cx, cy = q1[0] - s * Pp[0], q1[1] - s * Pp[1]

        def back(z):  # t2 coords -> t coords
            return (s * (z[0] - cx), s * (z[1] - cy))

        U = back(P2[(e2 + 2) % 3])
        cls_P, cls_Q, cls_R = self.cls[t][e], self.cls[t][(e + 1) % 3], self.cls[t][(e + 2) % 3]
        cls_U = self.cls[t2][(e2 + 2) % 3]
        old = {
            (t, (e + 1) % 3): (t2, 1),       # Q->R becomes T2 edge 1
            (t, (e + 2) % 3): (t, 0),        # R->P becomes T1 edge 0
            (t2, (e2 + 1) % 3): (t, 1),      # P->U becomes T1 edge 1
            (t2, (e2 + 2) % 3): (t2, 0),     # U->Q becomes T2 edge 0
        }
        partners = {k: self.nbr[k[0]][k[1]] for k in old}
        marked_classes = {self.cls[a][b] for a, b in self.marked_corners}
        self.flipped = True
        self.P[t] = [R, Pp, U]
        self.P[t2] = [U, Qp, R]
        self.cls[t] = [cls_R, cls_P, cls_U]
        self.cls[t2] = [cls_U, cls_Q, cls_R]
        self.nbr[t] = [None, None, (t2, 2, 1.0)]
        self.nbr[t2] = [None, None, (t, 2, 1.0)]
        for k, (nt, ne) in old.items():
            pt, pe, _ = partners[k]
            target = old.get((pt, pe), (pt, pe))
            a = self.P[nt][ne]
            b = self.P[nt][(ne + 1) % 3]
            c = self.P[target[0]][target[1]]
            d = self.P[target[0]][(target[1] + 1) % 3]
            wa = (b[0] - a[0], b[1] - a[1])
            wb = (d[0] - c[0], d[1] - c[1])
            sk = 1.0 if math.hypot(wa[0] + wb[0], wa[1] + wb[1]) <= math.hypot(wa[0] - wb[0], wa[1] - wb[1]) else -1.0
            self.nbr[nt][ne] = (target[0], target[1], sk)
            self.nbr[target[0]][target[1]] = (nt, ne, sk)
        self.marked_corners = set()
        for k in marked_classes:
            for tt in range(len(self.P)):
                for i in range(3):
                    if self.cls[tt][i] == k:
                        self.marked_corners.add((tt, i))

    def make_delaunay(self, max_flips=None):
        T = len(self.P)
        if max_flips is None:
            max_flips = max(1000, 200 * T * T)
        flips = 0
        changed = True
        while changed:
            changed = False
            for t in range(T):
                for e in range(3):
                    if not self.is_delaunay_edge(t, e):
                        if flips >= max_flips:
                            raise FlipLimitExceeded(f"more than {max_flips} flips")
                        self.flip(t, e)
                        flips += 1
                        changed = True
                        break
        self._build_classes()
        return flips

    def to_surface(self):
        polys = [Polygon(pid, P) for pid, P in zip(self.ids, self.P)]
        glue = []
        for t in range(len(self.P)):
            for e in range(3):
                t2, e2, s = self.nbr[t][e]
                if (t, e) <= (t2, e2):
                    glue.append(Gluing(EdgeRef(self.ids[t], e), EdgeRef(self.ids[t2], e2),
                                       TRANSLATION if s > 0 else FLIP))
        marked = set()
        seen = set()
        for t, i in sorted(self.marked_corners, key=lambda c: (id_key(self.ids[c[0]]), c[1])):
            k = self.cls[t][i]
            if k not in seen:
                seen.add(k)
                marked.add((self.ids[t], i))
        return FlatSurface(polys, glue, marked, self.allow_disconnected)
