"""Shortening a curve to the flat geodesic in its homotopy class.

The curve is first converted into a *channel*: the cyclic list of triangle
edges it crosses, with the crossing position ``lam`` in [0, 1] along each
edge.  Where the curve runs into a vertex it is routed around that vertex
through the fan of triangles on the side with the larger angle.  Length is a
convex function of the crossing positions, and it is minimised by exact
coordinate moves plus straightening of longer windows developed into a
single chart.  Immediate back-and-forth crossings of one edge are cancelled
first, since they never change the homotopy class relative to the vertices.
"""

from __future__ import annotations

import math

from ..errors import IterationLimit, PointOffSurface
from ..paths import CurvePath, merge_pieces
from ..surface import EPS_GLUE
from .saddle import _angle_from, _cross, as_mesh

MAX_SWEEPS = 20000


def _unit(dx, dy):
    n = math.hypot(dx, dy)
    return (dx / n, dy / n)


class Channel:
    """Crossing sequence ``[(t, e, lam), ...]``: leave triangle ``t`` through edge ``e``."""

    def __init__(self, mesh, crossings, closed=True, start=None, end=None):
        self.mesh = mesh
        self.cross = [list(c) for c in crossings]
        self.closed = closed
        self.start = start  # (t, point) for pinned curves
        self.end = end

    # point of crossing k in the frame of the triangle it leaves / enters
    def _out_point(self, k):
        t, e, lam = self.cross[k]
        P = self.mesh.P[t]
        a, b = P[e], P[(e + 1) % 3]
        return (a[0] + lam * (b[0] - a[0]), a[1] + lam * (b[1] - a[1]))

    def _in_point(self, k):
        t, e, lam = self.cross[k]
        t2, e2, _ = self.mesh.nbr[t][e]
        P = self.mesh.P[t2]
        a, b = P[e2], P[(e2 + 1) % 3]
        mu = 1.0 - lam
        return (a[0] + mu * (b[0] - a[0]), a[1] + mu * (b[1] - a[1]))

    def pieces(self):
        """``(t, a, b)`` straight pieces of the current polyline."""
        n = len(self.cross)
        out = []
        if not self.closed:
            if n == 0:
                t, p = self.start
                return [(t, p, self.end[1])]
            out.append((self.cross[0][0], self.start[1], self._out_point(0)))
            for k in range(n - 1):
                out.append((self.mesh.nbr[self.cross[k][0]][self.cross[k][1]][0],
                            self._in_point(k), self._out_point(k + 1)))
            out.append((self.end[0], self._in_point(n - 1), self.end[1]))
            return out
        for k in range(n):
            t2 = self.mesh.nbr[self.cross[k][0]][self.cross[k][1]][0]
            out.append((t2, self._in_point(k), self._out_point((k + 1) % n)))
        return out

    def length(self):
        return math.fsum(math.hypot(b[0] - a[0], b[1] - a[1]) for _, a, b in self.pieces())

    def cancel_backtracks(self):
        nbr = self.mesh.nbr
        changed = True
        while changed and self.cross:
            changed = False
            n = len(self.cross)
            limit = n if self.closed else n - 1
            for k in range(limit):
                t, e, _ = self.cross[k]
                t2, e2, _ = self.cross[(k + 1) % n]
                if n >= 2 and nbr[t][e][:2] == (t2, e2):
                    if self.closed and k == n - 1:
                        del self.cross[n - 1]
                        del self.cross[0]
                    else:
                        del self.cross[k:k + 2]
                    changed = True
                    break

    # -- optimisation -------------------------------------------------------
    def _develop_chain(self, k, m):
        """Edges of crossings k..k+m-1 developed in the frame of triangle cross[k].t.

        Returns ``(edges, far_map)`` where ``edges[j] = (A, B)`` developed edge
        endpoints and ``far_map`` maps points of the triangle entered by the last
        crossing into the common frame."""
        mesh = self.mesh
        n = len(self.cross)
        sg, dx, dy = 1.0, 0.0, 0.0  # developed = sg * z + d
        edges = []
        for j in range(m):
            t, e, _ = self.cross[(k + j) % n]
            P = mesh.P[t]
            a, b = P[e], P[(e + 1) % 3]
            edges.append(((sg * a[0] + dx, sg * a[1] + dy), (sg * b[0] + dx, sg * b[1] + dy)))
            _, _, s, cx, cy = mesh.edge_map(t, e)
            # z_t = s * (z_next - c)
            sg2 = sg * s
            dx, dy = dx - sg2 * cx, dy - sg2 * cy
            sg = sg2
        return edges, (sg, dx, dy)

    def _prev_point(self, k):
        """Point before crossing k, in the frame of the triangle crossing k leaves."""
        n = len(self.cross)
        if self.closed:
            return self._in_point((k - 1) % n) if n > 1 else None
        return self._in_point(k - 1) if k > 0 else self.start[1]

    def _next_point(self, k):
        """Point after crossing k, in the frame of the triangle crossing k enters."""
        n = len(self.cross)
        if self.closed:
            return self._out_point((k + 1) % n) if n > 1 else None
        return self._out_point(k + 1) if k < n - 1 else self.end[1]

    def _move(self, k):
        """Exact one-coordinate move of crossing k; True if the length dropped."""
        n = len(self.cross)
        A = self._prev_point(k)
        Bz = self._next_point(k)
        if A is None or Bz is None:
            return False
        (a, b), = self._develop_chain(k, 1)[0]
        sg, dx, dy = self._develop_chain(k, 1)[1]
        B = (sg * Bz[0] + dx, sg * Bz[1] + dy)
        vx, vy = B[0] - A[0], B[1] - A[1]
        ex, ey = b[0] - a[0], b[1] - a[1]
        den = _cross(vx, vy, ex, ey)
        if abs(den) < 1e-300:
            return False
        lam = min(1.0, max(0.0, _cross(vx, vy, A[0] - a[0], A[1] - a[1]) / den))
        old = self.cross[k][2]
        before = self._local_length(k, 1)
        self.cross[k][2] = lam
        if self._local_length(k, 1) > before - 1e-16:
            self.cross[k][2] = old
            return False
        return n > 0

    def _local_length(self, k, m):
        n = len(self.cross)
        tot = 0.0
        A = self._prev_point(k)
        for j in range(m):
            kk = (k + j) % n
            p = self._out_point(kk)
            tot += math.hypot(p[0] - A[0], p[1] - A[1])
            A = self._in_point(kk)
        B = self._next_point((k + m - 1) % n)
        tot += math.hypot(B[0] - A[0], B[1] - A[1])
        return tot

    def _funnel(self, k, m, A, Bz):
        """Shortest path from ``A`` (frame of the triangle crossing k leaves) through
        crossings k..k+m-1 to ``Bz`` (frame of the triangle the last one enters);
        writes the optimal crossing positions."""
        n = len(self.cross)
        edges, (sg, dx, dy) = self._develop_chain(k, m)
        B = (sg * Bz[0] + dx, sg * Bz[1] + dy)
        # travelling out of a triangle through edge a->b: b is on the left, a on the right
        portals = [(A, A)] + [(b, a) for a, b in edges] + [(B, B)]
        pts, idx = _string_pull(portals)
        for j, (a, b) in enumerate(edges):
            i = j + 1
            # polyline segment covering portal i
            r = 0
            while r + 1 < len(idx) and idx[r + 1] <= i:
                r += 1
            if idx[r] == i or r + 1 >= len(pts):
                p = pts[r]
                ex, ey = b[0] - a[0], b[1] - a[1]
                lam = ((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / (ex * ex + ey * ey)
            else:
                P0, P1 = pts[r], pts[r + 1]
                vx, vy = P1[0] - P0[0], P1[1] - P0[1]
                ex, ey = b[0] - a[0], b[1] - a[1]
                den = _cross(vx, vy, ex, ey)
                lam = self.cross[(k + j) % n][2] if abs(den) < 1e-300 else \
                    _cross(vx, vy, P0[0] - a[0], P0[1] - a[1]) / den
            self.cross[(k + j) % n][2] = min(1.0, max(0.0, lam))

    def optimise(self, max_sweeps=MAX_SWEEPS, tol=1e-10):
        n = len(self.cross)
        if n == 0:
            return 0
        if not self.closed:
            self._funnel(0, n, self.start[1], self.end[1])
            return 1
        prev = self.length()
        for sweep in range(1, max_sweeps + 1):
            for k in range(n):
                if n > 1:
                    # hold crossing k fixed and pull the rest of the loop taut
                    X = self._in_point(k)
                    Xo = self._out_point(k)
                    self._funnel((k + 1) % n, n - 1, X, Xo)
                self._move(k)
            cur = self.length()
            if prev - cur < tol:
                return sweep
            prev = cur
        raise IterationLimit(f"curve tightening did not settle in {max_sweeps} sweeps")


def _string_pull(portals):
    """Funnel algorithm.  ``portals[i] = (left, right)``; the first and last are the
    end points.  Returns the path corner points and the portal index of each."""
    apex = portals[0][0]
    pl = pr = apex
    ai = li = ri = 0
    pts, idx = [apex], [0]
    i = 1
    N = len(portals)
    while i < N:
        left, right = portals[i]
        # tighten the right side
        if _cross(pr[0] - apex[0], pr[1] - apex[1], right[0] - apex[0], right[1] - apex[1]) >= 0:
            if _same(apex, pr) or _cross(pl[0] - apex[0], pl[1] - apex[1],
                                         right[0] - apex[0], right[1] - apex[1]) < 0:
                pr, ri = right, i
            else:
                apex, ai = pl, li
                pts.append(apex)
                idx.append(ai)
                pl = pr = apex
                li = ri = ai
                i = ai + 1
                continue
        # tighten the left side
        if _cross(pl[0] - apex[0], pl[1] - apex[1], left[0] - apex[0], left[1] - apex[1]) <= 0:
            if _same(apex, pl) or _cross(pr[0] - apex[0], pr[1] - apex[1],
                                         left[0] - apex[0], left[1] - apex[1]) > 0:
                pl, li = left, i
            else:
                apex, ai = pr, ri
                pts.append(apex)
                idx.append(ai)
                pl = pr = apex
                li = ri = ai
                i = ai + 1
                continue
        i += 1
    end = portals[-1][0]
    if not _same(pts[-1], end) or len(pts) == 1:
        pts.append(end)
        idx.append(N - 1)
    return pts, idx


def _same(p, q):
    return abs(p[0] - q[0]) <= 1e-15 and abs(p[1] - q[1]) <= 1e-15


# -- conversion from a CurvePath ------------------------------------------------

def _corner_pos(mesh, t, c, d):
    """Angular position (within the vertex class) of direction ``d`` leaving corner (t, c)."""
    P = mesh.P[t]
    ux, uy = P[(c + 1) % 3][0] - P[c][0], P[(c + 1) % 3][1] - P[c][1]
    a = _angle_from(ux, uy, d[0], d[1])
    if a > 2 * math.pi - 1e-9:  # on the outgoing edge itself
        a = 0.0
    return mesh.corner_offset[(t, c)] + a


def _in_corner(mesh, t, c, d):
    P = mesh.P[t]
    ux, uy = P[(c + 1) % 3][0] - P[c][0], P[(c + 1) % 3][1] - P[c][1]
    wx, wy = P[(c - 1) % 3][0] - P[c][0], P[(c - 1) % 3][1] - P[c][1]
    a = _angle_from(ux, uy, d[0], d[1])
    return a < _angle_from(ux, uy, wx, wy) - 1e-12 or a > 2 * math.pi - 1e-9


def _corner_angle(mesh, t, c):
    P = mesh.P[t]
    return _angle_from(P[(c + 1) % 3][0] - P[c][0], P[(c + 1) % 3][1] - P[c][1],
                       P[(c - 1) % 3][0] - P[c][0], P[(c - 1) % 3][1] - P[c][1])


def _route(mesh, t_in, c_in, d_in, t_out, c_out, d_out, crossings):
    """Append the fan crossings that carry the curve around a vertex.

    The curve arrives along ``d_in`` into corner ``(t_in, c_in)`` and leaves along
    ``d_out`` from ``(t_out, c_out)``; it is routed through the side with the
    larger angle, where it is taut.  Returns that angle.
    """
    k = mesh.cls[t_in][c_in]
    Theta = mesh.class_angle[k]
    th_in = _corner_pos(mesh, t_in, c_in, (-d_in[0], -d_in[1]))
    th_out = _corner_pos(mesh, t_out, c_out, d_out)
    alpha = (th_out - th_in) % Theta  # counterclockwise sweep = right-hand side
    cap = 4 * len(mesh.class_corners[k]) + 4
    t, c = t_in, c_in
    if alpha >= 0.5 * Theta - 1e-12:
        dist = mesh.corner_offset[(t, c)] + _corner_angle(mesh, t, c) - th_in
        while alpha >= dist - 1e-12 and len(crossings) < 10 ** 9:
            crossings.append((t, (c - 1) % 3, 1.0))
            t, c = mesh.ccw_next(t, c)
            dist += _corner_angle(mesh, t, c)
            cap -= 1
            if cap < 0:  # pragma: no cover
                raise PointOffSurface("could not route curve around a vertex")
        side = alpha
    else:
        beta = Theta - alpha
        dist = th_in - mesh.corner_offset[(t, c)]
        while beta > dist + 1e-12:
            crossings.append((t, c, 0.0))
            t, c = mesh.cw_next(t, c)
            dist += _corner_angle(mesh, t, c)
            cap -= 1
            if cap < 0:  # pragma: no cover
                raise PointOffSurface("could not route curve around a vertex")
        side = beta
    if (t, c) != (t_out, c_out):
        raise PointOffSurface("vertex routing ended in an unexpected corner")
    return side


def _locate_start(mesh, pid, a, d):
    t = mesh.locate(pid, a, direction=d)
    c = mesh.vertex_at(t, a)
    return t, c


def _find_frame(mesh, t, q, pid, a2, d2, crossings):
    """Move from triangle ``t`` (point ``q`` on its boundary) into the triangle of
    polygon ``pid`` where the next segment starts, recording crossed edges."""
    if mesh.owner(t) == pid and math.hypot(q[0] - a2[0], q[1] - a2[1]) <= 1e-7:
        if _points_inside(mesh, t, a2, d2):
            return t, a2
    P = mesh.P[t]
    for e in range(3):
        a, b = P[e], P[(e + 1) % 3]
        ex, ey = b[0] - a[0], b[1] - a[1]
        L = math.hypot(ex, ey)
        if abs(_cross(ex, ey, q[0] - a[0], q[1] - a[1])) / L > 1e-7:
            continue
        lam = ((q[0] - a[0]) * ex + (q[1] - a[1]) * ey) / (L * L)
        if not -1e-9 <= lam <= 1 + 1e-9:
            continue
        t2, e2, s, cx, cy = mesh.edge_map(t, e)
        q2 = (s * q[0] + cx, s * q[1] + cy)
        if mesh.owner(t2) == pid and math.hypot(q2[0] - a2[0], q2[1] - a2[1]) <= 1e-7 \
                and _points_inside(mesh, t2, a2, d2):
            crossings.append((t, e, min(1.0, max(0.0, lam))))
            return t2, a2
    raise PointOffSurface(f"curve is not connected at {tuple(q)} -> {pid}:{tuple(a2)}")


def _points_inside(mesh, t, p, d):
    P = mesh.P[t]
    for e in range(3):
        a, b = P[e], P[(e + 1) % 3]
        ex, ey = b[0] - a[0], b[1] - a[1]
        L = math.hypot(ex, ey)
        c = _cross(ex, ey, p[0] - a[0], p[1] - a[1]) / L
        if c < -1e-7:
            return False
        if abs(c) <= 1e-7 and _cross(ex, ey, d[0], d[1]) < -1e-12:
            return False
    return True


def curve_to_channel(mesh, curve):
    """Convert a CurvePath into a :class:`Channel` on ``mesh``."""
    segs = [(pid, (a.x, a.y), (b.x, b.y)) for pid, a, b in curve.segments
            if math.hypot(b.x - a.x, b.y - a.y) > 1e-15]
    if not segs:
        raise PointOffSurface("empty curve")
    if curve.closed:
        # start in the middle of the first segment, away from vertices
        pid, a, b = segs[0]
        m = (0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]))
        segs = [(pid, m, b)] + segs[1:] + [(pid, a, m)]
    crossings = []
    pid, a, b = segs[0]
    d = _unit(b[0] - a[0], b[1] - a[1])
    t, c = _locate_start(mesh, pid, a, d)
    start = (t, a)
    p = a
    at_vertex = c  # corner index of current vertex, or None
    for idx, (pid, a, b) in enumerate(segs):
        d = _unit(b[0] - a[0], b[1] - a[1])
        if idx > 0:
            if at_vertex is not None:
                # we are sitting on a vertex: find the departure corner
                t_in, c_in, d_in = at_vertex
                t_out, c_out = _departure(mesh, t_in, c_in, pid, a, d)
                _route(mesh, t_in, c_in, d_in, t_out, c_out, d, crossings)
                t, p, c = t_out, mesh.P[t_out][c_out], c_out
            else:
                t, p = _find_frame(mesh, t, p, pid, a, d, crossings)
                c = None
        remaining = math.hypot(b[0] - a[0], b[1] - a[1])
        at_vertex = None
        while True:
            done = False
            for tt, pa, pb, e, tau, hit, cur in mesh.walk(t, p, d, start_corner=c):
                if tau >= remaining - 1e-12 * max(1.0, remaining):
                    q = (pa[0] + remaining * cur[0], pa[1] + remaining * cur[1])
                    if hit is not None and abs(tau - remaining) <= 1e-9:
                        at_vertex = (tt, hit, cur)
                        q = mesh.P[tt][hit]
                    t, p, d = tt, q, cur
                    done = True
                    break
                if hit is not None:
                    # straight passage through a vertex in mid-segment
                    remaining -= tau
                    corner = _straight_out(mesh, tt, hit, cur)
                    _route(mesh, tt, hit, cur, corner[0], corner[1], corner[2], crossings)
                    t, c, d = corner
                    p = mesh.P[t][c]
                    break
                crossings.append((tt, e, _lam_on(mesh, tt, e, pb)))
                remaining -= tau
            if done:
                break
    if curve.closed:
        if at_vertex is not None:  # pragma: no cover - start point is mid-segment
            raise PointOffSurface("closed curve ends on a vertex")
        if t != start[0]:
            t, _ = _find_frame(mesh, t, p, mesh.owner(start[0]), start[1], _unit(*_dir0(segs)), crossings)
        if t != start[0] or math.hypot(p[0] - start[1][0], p[1] - start[1][1]) > 1e-6:
            raise PointOffSurface("closed curve does not return to its start")
        # rotate so the channel starts with the crossing leaving the start triangle
        return Channel(mesh, crossings, closed=True)
    end = (t, p)
    return Channel(mesh, crossings, closed=False, start=start, end=end)


def _dir0(segs):
    pid, a, b = segs[0]
    return (b[0] - a[0], b[1] - a[1])


def _lam_on(mesh, t, e, q):
    P = mesh.P[t]
    a, b = P[e], P[(e + 1) % 3]
    ex, ey = b[0] - a[0], b[1] - a[1]
    lam = ((q[0] - a[0]) * ex + (q[1] - a[1]) * ey) / (ex * ex + ey * ey)
    return min(1.0, max(0.0, lam))


def _departure(mesh, t_in, c_in, pid, a, d):
    k = mesh.cls[t_in][c_in]
    for t, c in mesh.class_corners[k]:
        if mesh.owner(t) != pid:
            continue
        v = mesh.P[t][c]
        if math.hypot(v[0] - a[0], v[1] - a[1]) > 1e-7:
            continue
        if _in_corner(mesh, t, c, d):
            return t, c
    raise PointOffSurface(f"no corner of polygon {pid} at {tuple(a)} contains the next direction")


def _straight_out(mesh, t, c, d):
    """Corner and direction continuing straight (angle pi on the right) through a vertex."""
    k = mesh.cls[t][c]
    th = (_corner_pos(mesh, t, c, (-d[0], -d[1])) + math.pi) % mesh.class_angle[k]
    for tt, cc in mesh.class_corners[k]:
        off = mesh.corner_offset[(tt, cc)]
        P = mesh.P[tt]
        ux, uy = P[(cc + 1) % 3][0] - P[cc][0], P[(cc + 1) % 3][1] - P[cc][1]
        wx, wy = P[(cc - 1) % 3][0] - P[cc][0], P[(cc - 1) % 3][1] - P[cc][1]
        ang = _angle_from(ux, uy, wx, wy)
        if off - 1e-12 <= th < off + ang - 1e-12:
            r = th - off
            cs, sn = math.cos(r), math.sin(r)
            n = math.hypot(ux, uy)
            return tt, cc, ((ux * cs - uy * sn) / n, (ux * sn + uy * cs) / n)
    raise PointOffSurface("could not continue through vertex")  # pragma: no cover


# -- public entry point ---------------------------------------------------------

def tighten_curve(surface, curve, max_sweeps=MAX_SWEEPS):
    """Local geodesic homotopic to ``curve`` (relative to the vertices).

    The result's ``meta`` holds ``trivial`` (length below ``EPS_GLUE``) and the
    number of sweeps used.
    """
    mesh = as_mesh(surface)
    ch = curve_to_channel(mesh, curve)
    ch.cancel_backtracks()
    if ch.closed and not ch.cross:
        return CurvePath((), True, {"trivial": True, "sweeps": 0, "length": 0.0})
    sweeps = ch.optimise(max_sweeps)
    pieces = [(mesh.owner(t), a, b) for t, a, b in ch.pieces()]
    out = merge_pieces(pieces, closed=ch.closed)
    length = ch.length()
    out.meta.update({"trivial": length < EPS_GLUE, "sweeps": sweeps, "length": length,
                     "channel": ch})
    return out
