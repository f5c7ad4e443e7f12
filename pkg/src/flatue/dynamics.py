"""The horizontal foliation: leaf tracing, first returns, and occupation statistics.

Leaves are traced on the total surface of a translation cover, where the
horizontal direction is globally defined, and projected to the base for
statistics.  A surface with only translation gluings serves as its own cover.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cover import CoverData, build_double_cover, cover_from_permutations
from .errors import BadParams, BudgetExceeded, CylinderDetected, PointOffSurface, StartAtConePoint
from .mesh import EPS_HIT, TriMesh
from .paths import CurvePath, merge_pieces
from .surface import FLIP, FlatSurface, Vec2, area

LENGTH_BUDGET = "LengthBudget"
HIT_CONE_POINT = "HitConePoint"
CLOSED_UP = "ClosedUp"

UE_LIKE = "UELike"
NON_UE_LIKE = "NonUELike"
INCONCLUSIVE = "Inconclusive"

HORIZONTAL = (1.0, 0.0)


def as_cover(x):
    """``x`` itself if it is a cover; else the trivial cover of a translation surface or
    the orientation double cover of a half-translation surface."""
    if isinstance(x, CoverData):
        return x
    if not isinstance(x, FlatSurface):
        raise BadParams("expected a surface or a cover")
    if any(g.kind == FLIP for g in x.gluings):
        return build_double_cover(x)
    return cover_from_permutations(x, 1, {})


def cover_mesh(cover):
    """Triangulation of the total surface, cached on the cover (all vertices count as stops)."""
    hit = cover.__dict__.get("_mesh")
    if hit is None or hit[0] is not cover.total:
        hit = (cover.total, TriMesh(cover.total, marked_singular=True))
        cover.__dict__["_mesh"] = hit
    return hit[1]


@dataclass
class LeafTrace:
    start: tuple  # (total polygon id, point)
    segments: CurvePath
    total_length: float
    terminated_by: str
    pieces: list = field(default_factory=list, repr=False)  # (triangle, a, b) on the mesh
    cover: CoverData = field(default=None, repr=False)
    direction: tuple = HORIZONTAL


def _start_triangle(mesh, pid, p, d):
    # reject vertices before asking for a triangle that contains the outgoing ray:
    # at a corner that ray may leave the polygon at once
    if mesh.vertex_at(mesh.locate(pid, p), p) is not None:
        raise StartAtConePoint(f"start {tuple(p)} is a vertex of the surface")
    return mesh.locate(pid, p, direction=d)


def trace_leaf(cover, start, length_budget, direction=HORIZONTAL):
    """Follow the horizontal leaf through ``start = (total polygon id, (x, y))``."""
    cover = as_cover(cover)
    if not length_budget > 0:
        raise BadParams("length budget must be positive")
    mesh = cover_mesh(cover)
    pid, p = start
    p = (float(p[0]), float(p[1]))
    d = (float(direction[0]), float(direction[1]))
    t0 = _start_triangle(mesh, str(pid), p, d)
    pieces = []
    total = 0.0
    how = LENGTH_BUDGET
    for tt, a, b, e, tau, hit, cur in mesh.walk(t0, p, d):
        if pieces and tt == t0 and abs(cur[0] - d[0]) + abs(cur[1] - d[1]) <= 1e-12:
            u = (p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]
            off = abs((p[0] - a[0]) * d[1] - (p[1] - a[1]) * d[0])
            if -1e-12 <= u <= tau + 1e-12 and off <= EPS_HIT and total + u <= length_budget:
                pieces.append((tt, a, p))
                total += u
                how = CLOSED_UP
                break
        if total + tau >= length_budget:
            r = length_budget - total
            pieces.append((tt, a, (a[0] + r * cur[0], a[1] + r * cur[1])))
            total = length_budget
            break
        pieces.append((tt, a, b))
        total += tau
        if hit is not None:
            how = HIT_CONE_POINT
            break
    path = merge_pieces([(mesh.owner(tt), a, b) for tt, a, b in pieces], closed=how == CLOSED_UP)
    return LeafTrace((str(pid), Vec2(*p)), path, total, how, pieces, cover, d)


def project_trace(trace):
    """Pieces of the trace pushed to the base surface."""
    out = []
    for pid, a, b in trace.segments.segments:
        bid, sg = trace.cover.chart[pid]
        out.append((bid, Vec2(sg * a.x, sg * a.y), Vec2(sg * b.x, sg * b.y)))
    return CurvePath(tuple(out), trace.segments.closed)


# -- sampling ------------------------------------------------------------------------

def sample_points(trace, n):
    """Base points at arclength ``0.5, 1.5, ..., n - 0.5`` along the trace.

    A closed trace is followed periodically; an open one yields at most as many
    samples as fit in its length.  Returns ``(base ids, xy array)``.
    """
    segs = project_trace(trace).segments
    L = trace.total_length
    if L <= 0 or not segs:
        return [], np.zeros((0, 2))
    if trace.terminated_by != CLOSED_UP:
        n = min(n, int(math.floor(L - 0.5)) + 1 if L >= 0.5 else 0)
    s = (np.arange(n) + 0.5)
    if trace.terminated_by == CLOSED_UP:
        s = np.mod(s, L)
    lens = np.array([(b - a).norm for _, a, b in segs])
    ends = np.cumsum(lens)
    k = np.minimum(np.searchsorted(ends, s, side="right"), len(segs) - 1)
    starts = ends - lens
    A = np.array([tuple(a) for _, a, _ in segs])
    B = np.array([tuple(b) for _, _, b in segs])
    with np.errstate(invalid="ignore", divide="ignore"):
        f = np.where(lens[k] > 0, (s - starts[k]) / lens[k], 0.0)
    xy = A[k] + f[:, None] * (B[k] - A[k])
    ids = [segs[i][0] for i in k]
    return ids, xy


@dataclass
class BoxGrid:
    """``G x G`` partition of each base polygon's bounding box, clipped to the polygon."""

    surface: FlatSurface
    G: int
    boxes: list = field(default_factory=list)  # (polygon id, i, j, measure)

    def __post_init__(self):
        from shapely.geometry import Polygon as SPolygon, box

        self.frame = {}
        for p in self.surface.polygons:
            xs = [v.x for v in p.vertices]
            ys = [v.y for v in p.vertices]
            x0, y0, x1, y1 = min(xs), min(ys), max(xs), max(ys)
            self.frame[p.id] = (x0, y0, (x1 - x0) / self.G, (y1 - y0) / self.G, len(self.boxes))
            poly = SPolygon([tuple(v) for v in p.vertices])
            for i in range(self.G):
                for j in range(self.G):
                    cell = box(x0 + i * (x1 - x0) / self.G, y0 + j * (y1 - y0) / self.G,
                               x0 + (i + 1) * (x1 - x0) / self.G, y0 + (j + 1) * (y1 - y0) / self.G)
                    self.boxes.append((p.id, i, j, poly.intersection(cell).area))
        self.measure = np.array([b[3] for b in self.boxes]) / area(self.surface)

    def index(self, ids, xy):
        out = np.empty(len(ids), dtype=int)
        for k, (pid, (x, y)) in enumerate(zip(ids, xy)):
            x0, y0, wx, wy, off = self.frame[pid]
            i = min(max(int((x - x0) / wx), 0), self.G - 1)
            j = min(max(int((y - y0) / wy), 0), self.G - 1)
            out[k] = off + i * self.G + j
        return out


def checkpoints(n):
    """``10^2, 10^3, ...`` up to ``n``, with ``n`` itself appended."""
    out = []
    N = 100
    while N <= n:
        out.append(N)
        N *= 10
    if not out or out[-1] != n:
        out.append(n)
    return out


def box_discrepancy(trace, G, n=None, grid=None):
    """``[(N, D_N)]``: worst box deviation of the first ``N`` unit samples from area."""
    grid = grid or BoxGrid(trace.cover.base, int(G))
    if n is None:
        n = int(math.floor(trace.total_length)) if trace.terminated_by != CLOSED_UP else 10 ** 4
    ids, xy = sample_points(trace, n)
    n = len(ids)
    if n == 0:
        return [(0, float(grid.measure.max()))]
    idx = grid.index(ids, xy)
    out = []
    for N in checkpoints(n):
        counts = np.bincount(idx[:N], minlength=len(grid.measure))
        out.append((N, float(np.abs(counts / N - grid.measure).max())))
    return out


# -- Birkhoff panel ------------------------------------------------------------------

@dataclass
class ErgodicityReport:
    discrepancy_series: list
    birkhoff_table: list  # (start_id, box_id, N, average)
    verdict_hint: str
    max_gap: float = 0.0


def birkhoff_panel(cover, starts, test_boxes=None, budget=10 ** 5, G=4):
    """Running box averages along the leaves through ``starts`` (total-surface points)."""
    cover = as_cover(cover)
    if len(starts) < 2:
        raise BadParams("a panel needs at least two starts")
    grid = BoxGrid(cover.base, G)
    n_boxes = len(grid.boxes)
    boxes = list(range(n_boxes)) if test_boxes is None else list(test_boxes)
    traces = [trace_leaf(cover, s, budget + 1) for s in starts]
    ns = [len(sample_points(tr, budget)[0]) for tr in traces]
    n = min(ns)
    marks = checkpoints(n) if n > 0 else []
    avgs = []  # per start: array (len(marks), n_boxes)
    series = {}
    for tr in traces:
        ids, xy = sample_points(tr, n)
        idx = grid.index(ids, xy)
        rows = []
        for N in marks:
            c = np.bincount(idx[:N], minlength=n_boxes) / N
            rows.append(c)
            series[N] = max(series.get(N, 0.0), float(np.abs(c - grid.measure).max()))
        avgs.append(np.array(rows))
    table = [(si, b, N, float(avgs[si][k][b])) for si in range(len(traces)) for b in boxes
             for k, N in enumerate(marks)]
    disc = sorted(series.items())
    verdict, gap = _panel_verdict(avgs, boxes, marks, disc)
    return ErgodicityReport(disc, table, verdict, gap)


def _panel_verdict(avgs, boxes, marks, disc):
    if not marks:
        return INCONCLUSIVE, math.nan
    gaps = []
    for k in range(len(marks)):
        g = 0.0
        for a in range(len(avgs)):
            for b in range(a + 1, len(avgs)):
                g = max(g, float(np.abs(avgs[a][k][boxes] - avgs[b][k][boxes]).max()))
        gaps.append(g)
    last = marks[-1]
    decade = [k for k, N in enumerate(marks) if N * 10 >= last]
    if gaps[-1] <= 0.02 and disc[-1][1] <= disc[0][1]:
        return UE_LIKE, gaps[-1]
    if all(gaps[k] > 0.1 for k in decade):
        return NON_UE_LIKE, gaps[-1]
    return INCONCLUSIVE, gaps[-1]


def random_starts(cover, n, rng):
    """``n`` points of the total surface, uniform with respect to area."""
    cover = as_cover(cover)
    mesh = cover_mesh(cover)
    areas = np.array([abs(_tri_area(P)) for P in mesh.P])
    out = []
    for _ in range(n):
        t = int(rng.choice(len(areas), p=areas / areas.sum()))
        u, v = rng.random(2)
        if u + v > 1:
            u, v = 1 - u, 1 - v
        P = mesh.P[t]
        x = P[0][0] + u * (P[1][0] - P[0][0]) + v * (P[2][0] - P[0][0])
        y = P[0][1] + u * (P[1][1] - P[0][1]) + v * (P[2][1] - P[0][1])
        out.append((mesh.owner(t), (x, y)))
    return out


def _tri_area(P):
    return 0.5 * ((P[1][0] - P[0][0]) * (P[2][1] - P[0][1]) - (P[1][1] - P[0][1]) * (P[2][0] - P[0][0]))


# -- transversals and first returns ----------------------------------------------------

@dataclass(frozen=True)
class Transversal:
    """Straight segment ``base + s * direction`` for ``0 <= s <= length`` on the total surface."""

    polygon: str
    base: tuple
    direction: tuple
    length: float

    @staticmethod
    def parse(text):
        """``pid:x,y:dx,dy:length``."""
        try:
            pid, b, d, L = text.split(":")
            bx, by = (float(v) for v in b.split(","))
            dx, dy = (float(v) for v in d.split(","))
            return Transversal(pid, (bx, by), (dx, dy), float(L))
        except ValueError:
            raise BadParams(f"bad transversal {text!r}; expected pid:x,y:dx,dy:length") from None


class _Crossings:
    """Transversal pieces registered per triangle, for crossing tests."""

    def __init__(self, mesh, tv):
        n = math.hypot(*tv.direction)
        if not n > 0:
            raise BadParams("transversal direction must be nonzero")
        self.u = (tv.direction[0] / n, tv.direction[1] / n)
        self.length = float(tv.length)
        self.by_tri = {}
        if not self.length > 0:
            return
        t = mesh.locate(tv.polygon, tv.base, direction=self.u)
        s = 0.0
        for tt, a, b, e, tau, hit, cur in mesh.walk(t, tv.base, self.u):
            take = min(tau, self.length - s)
            bb = (a[0] + take * cur[0], a[1] + take * cur[1])
            self._add(mesh, tt, a, bb, cur, s)
            s += take
            if s >= self.length - 1e-15:
                break
            if hit is not None:
                raise PointOffSurface("transversal runs into a vertex before its end")

    def _add(self, mesh, t, a, b, cur, s0):
        self.by_tri.setdefault(t, []).append((a, b, cur, s0))
        # a piece lying on an edge is seen from both sides
        P = mesh.P[t]
        for e in range(3):
            p0, p1 = P[e], P[(e + 1) % 3]
            ex, ey = p1[0] - p0[0], p1[1] - p0[1]
            L = math.hypot(ex, ey)
            da = (ex * (a[1] - p0[1]) - ey * (a[0] - p0[0])) / L
            db = (ex * (b[1] - p0[1]) - ey * (b[0] - p0[0])) / L
            if abs(da) <= 1e-12 and abs(db) <= 1e-12:
                t2, _, sg, cx, cy = mesh.edge_map(t, e)
                self.by_tri.setdefault(t2, []).append(
                    ((sg * a[0] + cx, sg * a[1] + cy), (sg * b[0] + cx, sg * b[1] + cy),
                     (sg * cur[0], sg * cur[1]), s0))

    def hits(self, t, a, d, tau):
        """Crossings ``(distance along leaf in (0, tau], transversal parameter)`` in order."""
        out = []
        for p, q, w, s0 in self.by_tri.get(t, ()):
            ln = math.hypot(q[0] - p[0], q[1] - p[1])
            den = d[0] * w[1] - d[1] * w[0]
            if abs(den) < 1e-15 or ln <= 0:
                continue
            rx, ry = p[0] - a[0], p[1] - a[1]
            lam = (rx * w[1] - ry * w[0]) / den  # along the leaf
            mu = (rx * d[1] - ry * d[0]) / den  # along the transversal
            if 1e-12 < lam <= tau + 1e-12 and -1e-12 <= mu <= ln + 1e-12:
                out.append((lam, s0 + min(max(mu, 0.0), ln)))
        out.sort()
        return out


def _next_return(mesh, cr, t, p, d, budget):
    """Distance and transversal parameter of the next crossing after ``p``."""
    total = 0.0
    for tt, a, b, e, tau, hit, cur in mesh.walk(t, p, d):
        h = cr.hits(tt, a, cur, tau)
        if h:
            return total + h[0][0], h[0][1]
        total += tau
        if hit is not None:
            return None
        if total > budget:
            raise BudgetExceeded(f"no return to the transversal within length {budget}")


def _point_on(mesh, tv, cr, s):
    """Triangle and coordinates of the transversal point at parameter ``s``."""
    t = mesh.locate(tv.polygon, tv.base, direction=cr.u)
    rem = s
    for tt, a, b, e, tau, hit, cur in mesh.walk(t, tv.base, cr.u):
        if rem <= tau:
            return tt, (a[0] + rem * cur[0], a[1] + rem * cur[1])
        rem -= tau


@dataclass
class ReturnMap:
    transversal: Transversal
    intervals: list  # (length, image index, orientation preserved)
    return_times: list
    cuts: list = field(default_factory=list)  # left endpoints on the transversal
    shifts: list = field(default_factory=list)

    def apply(self, s):
        """Image of transversal parameter ``s`` under the extracted interval exchange."""
        k = int(np.searchsorted(self.cuts, s, side="right")) - 1
        k = min(max(k, 0), len(self.intervals) - 1)
        return s + self.shifts[k]


def _backward_hits(mesh, cr, budget):
    """Transversal parameters of the first crossings of leaves running backwards from
    every vertex (singular leaves) and from the transversal endpoints."""
    back = (-HORIZONTAL[0], -HORIZONTAL[1])
    out = []
    for t in range(len(mesh.P)):
        P = mesh.P[t]
        for i in range(3):
            ax, ay = P[(i + 1) % 3][0] - P[i][0], P[(i + 1) % 3][1] - P[i][1]
            bx, by = P[(i - 1) % 3][0] - P[i][0], P[(i - 1) % 3][1] - P[i][1]
            # half-open corner: direction in [edge a, edge b)
            ca = ax * back[1] - ay * back[0]
            cb = back[0] * by - back[1] * bx
            on_a = abs(ca) <= 1e-14 * math.hypot(ax, ay) and ax * back[0] + ay * back[1] > 0
            if not (on_a or (ca > 0 and cb > 0)):
                continue
            r = _next_from(mesh, cr, t, P[i], back, budget, start_corner=i)
            if r is not None:
                out.append(r)
    return out


def _next_from(mesh, cr, t, p, d, budget, start_corner=None):
    total = 0.0
    for tt, a, b, e, tau, hit, cur in mesh.walk(t, p, d, start_corner=start_corner):
        h = cr.hits(tt, a, cur, tau)
        if h:
            return h[0][1]
        total += tau
        if hit is not None or total > budget:
            return None


def first_return_map(cover, transversal, budget=1e4, max_iter=None):
    """Interval exchange induced on ``transversal`` by the horizontal flow."""
    cover = as_cover(cover)
    tv = transversal if isinstance(transversal, Transversal) else Transversal.parse(transversal)
    if not tv.length > 0:
        raise BadParams("transversal has zero length")
    mesh = cover_mesh(cover)
    cr = _Crossings(mesh, tv)
    if abs(cr.u[0] * HORIZONTAL[1] - cr.u[1] * HORIZONTAL[0]) < 1e-9:
        raise BadParams("transversal is parallel to the foliation")
    L = cr.length
    cuts = [0.0, L]
    cuts += _backward_hits(mesh, cr, budget)
    # points sent to the transversal endpoints
    for s_end in (0.0, L):
        t, p = _point_on(mesh, tv, cr, s_end)
        back = (-HORIZONTAL[0], -HORIZONTAL[1])
        try:
            r = _next_from(mesh, cr, t, p, back, budget)
        except PointOffSurface:
            r = None
        if r is not None:
            cuts.append(r)
    cuts = sorted(min(max(c, 0.0), L) for c in cuts)
    pts = [cuts[0]]
    for c in cuts[1:]:
        if c - pts[-1] > 1e-9:
            pts.append(c)
    if L - pts[-1] > 1e-9:
        pts.append(L)
    else:
        pts[-1] = L
    lefts, shifts, times, lens = [], [], [], []
    for lo, hi in zip(pts, pts[1:]):
        mids = (0.5 * (lo + hi), lo + 1e-3 * (hi - lo), hi - 1e-3 * (hi - lo))
        res = []
        for s in mids:
            t, p = _point_on(mesh, tv, cr, s)
            r = _next_return(mesh, cr, t, p, HORIZONTAL, budget)
            if r is None:
                raise BudgetExceeded("an interval runs into a cone point before returning")
            res.append((r[0], r[1] - s))
        shift = res[0][1]
        if max(abs(x[1] - shift) for x in res) > 1e-7:
            raise BudgetExceeded("return map is not a translation on an extracted interval")
        lefts.append(lo)
        shifts.append(shift)
        times.append(res[0][0])
        lens.append(hi - lo)
    images = [lo + sh for lo, sh in zip(lefts, shifts)]
    order = sorted(range(len(images)), key=lambda k: images[k])
    rank = {k: r for r, k in enumerate(order)}
    rmap = ReturnMap(tv, [(lens[k], rank[k], True) for k in range(len(lens))], times, lefts, shifts)
    _check_periodic(rmap, max_iter or 50 * len(lens))
    return rmap


def _check_periodic(rmap, n):
    """A leaf whose returns come back to the start has closed up: a cylinder."""
    for lo, (ln, _, _) in zip(rmap.cuts, rmap.intervals):
        s0 = lo + 0.5 * ln
        s = s0
        for _ in range(n):
            s = rmap.apply(s)
            if abs(s - s0) <= 1e-9:
                raise CylinderDetected("a leaf through the transversal closes up")


def direct_returns(cover, transversal, s, n, budget=1e4):
    """Transversal parameters of the first ``n`` returns of the leaf through ``s``."""
    cover = as_cover(cover)
    tv = transversal if isinstance(transversal, Transversal) else Transversal.parse(transversal)
    mesh = cover_mesh(cover)
    cr = _Crossings(mesh, tv)
    t, p = _point_on(mesh, tv, cr, s)
    out = []
    total = 0.0
    for tt, a, b, e, tau, hit, cur in mesh.walk(t, p, HORIZONTAL):
        for lam, mu in cr.hits(tt, a, cur, tau):
            out.append(mu)
            if len(out) >= n:
                return out
        total += tau
        if hit is not None:
            break
        if total > budget * n:
            raise BudgetExceeded("direct tracing exceeded its budget")
    return out


def transverse_measure_estimate(cover, transversal, trace, eps_width=1.0, n=None):
    """Crossings of ``transversal`` by the first ``n`` length units of ``trace``, scaled by
    area / n.  A crossing within ``eps_width`` of the end of the window counts only the
    fraction of its flow box that the window contains."""
    cover = as_cover(cover)
    tv = transversal if isinstance(transversal, Transversal) else Transversal.parse(transversal)
    if not tv.length > 0:
        return 0.0
    mesh = cover_mesh(cover)
    cr = _Crossings(mesh, tv)
    L = trace.total_length
    n = L if n is None else float(n)
    if trace.terminated_by != CLOSED_UP:
        n = min(n, L)
    if not n > 0:
        return 0.0
    hits = []
    s = 0.0
    for tt, a, b in trace.pieces:
        tau = math.hypot(b[0] - a[0], b[1] - a[1])
        for lam, _ in cr.hits(tt, a, trace.direction if tau == 0 else
                              ((b[0] - a[0]) / tau, (b[1] - a[1]) / tau), tau):
            hits.append(s + lam)
        s += tau
    hits = np.array(hits)
    if trace.terminated_by == CLOSED_UP and L > 0:
        reps = int(math.ceil(n / L))
        hits = (hits[None, :] + L * np.arange(reps)[:, None]).ravel()
    hits = hits[hits <= n]
    w = np.minimum(1.0, (n - hits) / eps_width) if eps_width > 0 else np.ones_like(hits)
    return float(w.sum() * area(cover.total) / n)
