"""Thick part of a flat surface: points at distance at least eps from the singularities.

The surface is sampled by a grid of quadrature nodes (spacing at most ``h``,
each carrying the area of its cell).  The clearance of a node is its flat
distance to the nearest singular point, found by developing straight rays
from the node.  Nodes with clearance at least ``eps`` form a neighbourhood
graph whose connected components approximate the components of the thick part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import cKDTree

from ..errors import BadParams, ResolutionTooCoarse, SearchBudgetExceeded
from ..mesh import TriMesh
from .saddle import _clip, _cross

CLEARANCE_NODE_CAP = 200_000


@dataclass
class Component:
    id: int
    area: float
    diameter: float
    nodes: int


@dataclass
class Decomposition:
    epsilon: float
    components: list
    C: int
    delta: float
    removed_area: float
    resolution: float = 0.0
    nodes: object = field(default=None, repr=False)  # (triangle, xy, weight, clearance) arrays

    @property
    def sum_diameters(self):
        return math.fsum(c.diameter for c in self.components)


# -- sampling -------------------------------------------------------------------

def _triangle_nodes(P, h):
    """Quadrature nodes of one triangle: rows parallel to its longest edge."""
    i = max(range(3), key=lambda k: math.hypot(P[(k + 1) % 3][0] - P[k][0], P[(k + 1) % 3][1] - P[k][1]))
    A, B, Cv = (np.array(P[(i + k) % 3], dtype=float) for k in range(3))
    base = B - A
    blen = float(np.hypot(*base))
    u = base / blen
    n = np.array([-u[1], u[0]])
    H = float((Cv - A) @ n)
    cu = float((Cv - A) @ u)
    m = max(1, math.ceil(H / h))
    pts, wts = [], []
    for r in range(m):
        v = (r + 0.5) * H / m
        f = v / H
        lo, hi = f * cu, blen + f * (cu - blen)
        q = max(1, math.ceil((hi - lo) / h))
        us = lo + (np.arange(q) + 0.5) * (hi - lo) / q
        pts.append(A + np.outer(us, u) + v * n)
        wts.append(np.full(q, (H / m) * (hi - lo) / q))
    pts = np.vstack(pts)
    wts = np.concatenate(wts)
    wts *= 0.5 * blen * H / wts.sum()
    return pts, wts


# -- clearance ------------------------------------------------------------------

def clearance(mesh, t, p, limit=math.inf, node_cap=CLEARANCE_NODE_CAP):
    """Flat distance from ``p`` (in triangle ``t``) to the nearest singular point.

    Rays are developed across triangles inside three wedges, one per edge of
    ``t``; a wedge is split at every vertex it meets.  Returns ``limit`` when no
    singular point is closer.
    """
    P = mesh.P
    best = limit
    px, py = p
    for i in range(3):
        if mesh.class_singular[mesh.cls[t][i]]:
            best = min(best, math.hypot(P[t][i][0] - px, P[t][i][1] - py))
    stack = []
    for f in range(3):
        ax, ay = P[t][f][0] - px, P[t][f][1] - py
        bx, by = P[t][(f + 1) % 3][0] - px, P[t][(f + 1) % 3][1] - py
        stack.append((t, f, 1.0, -px, -py, ax, ay, bx, by))
    nodes = 0
    while stack:
        tt, f, sg, dx, dy, wax, way, wbx, wby = stack.pop()
        nodes += 1
        if nodes > node_cap:
            raise SearchBudgetExceeded("clearance search exceeded its node budget")
        t2, f2, s, cx, cy = mesh.edge_map(tt, f)
        Q = P[t2]
        sg2 = sg * s
        dx2, dy2 = dx - sg2 * cx, dy - sg2 * cy
        c2 = (f2 + 2) % 3
        Xx, Xy = sg2 * Q[f2][0] + dx2, sg2 * Q[f2][1] + dy2
        Yx, Yy = sg2 * Q[(f2 + 1) % 3][0] + dx2, sg2 * Q[(f2 + 1) % 3][1] + dy2
        Cx, Cy = sg2 * Q[c2][0] + dx2, sg2 * Q[c2][1] + dy2
        right_of_b = _cross(Cx, Cy, wbx, wby) > 0
        left_of_a = _cross(wax, way, Cx, Cy) > 0
        if left_of_a and right_of_b:
            if mesh.class_singular[mesh.cls[t2][c2]]:
                best = min(best, math.hypot(Cx, Cy))
            parts = ((f2 + 1) % 3, wax, way, Cx, Cy, Yx, Yy, Cx, Cy), \
                    ((f2 + 2) % 3, Cx, Cy, wbx, wby, Cx, Cy, Xx, Xy)
        elif not left_of_a:
            parts = (((f2 + 2) % 3, wax, way, wbx, wby, Cx, Cy, Xx, Xy),)
        else:
            parts = (((f2 + 1) % 3, wax, way, wbx, wby, Yx, Yy, Cx, Cy),)
        for e, ax2, ay2, bx2, by2, Rx, Ry, Lx, Ly in parts:
            if _cross(ax2, ay2, bx2, by2) <= 0:
                continue
            r = _clip(Rx, Ry, Lx, Ly, ax2, ay2, bx2, by2)
            if r is None or _segment_distance(r[0], r[1]) >= best:
                continue
            stack.append((t2, e, sg2, dx2, dy2, ax2, ay2, bx2, by2))
    return best


def _segment_distance(a, b):
    """Distance from the origin to the segment ``ab``."""
    ax, ay = a
    ex, ey = b[0] - ax, b[1] - ay
    ee = ex * ex + ey * ey
    u = 0.0 if ee == 0 else min(1.0, max(0.0, -(ax * ex + ay * ey) / ee))
    return math.hypot(ax + u * ex, ay + u * ey)


# -- graph ----------------------------------------------------------------------

def sample_surface(mesh, h, limit=math.inf):
    """Nodes ``(tri, xy, weight, clearance)`` and the neighbourhood edges ``(i, j, length)``."""
    tri, xy, w = [], [], []
    for t, P in enumerate(mesh.P):
        pts, wts = _triangle_nodes(P, h)
        tri.append(np.full(len(pts), t))
        xy.append(pts)
        w.append(wts)
    start = np.cumsum([0] + [len(a) for a in xy])
    tri = np.concatenate(tri)
    w = np.concatenate(w)
    clr = np.array([clearance(mesh, int(t), (float(x), float(y)), limit)
                    for t, (x, y) in zip(tri, np.vstack(xy))])
    radius = 2.5 * h
    edges = {}
    for t in range(len(mesh.P)):
        own = xy[t]
        idx = [np.arange(start[t], start[t + 1])]
        pts = [own]
        for e in range(3):
            t2, e2, s, cx, cy = mesh.edge_map(t, e)
            # partner coordinates back into the frame of t: z = s*(w - c)
            pts.append(s * (xy[t2] - np.array([cx, cy])))
            idx.append(np.arange(start[t2], start[t2 + 1]))
        pts = np.vstack(pts)
        idx = np.concatenate(idx)
        n_own = len(own)
        tree = cKDTree(pts)
        for a, b in tree.query_pairs(radius):
            if a >= n_own and b >= n_own:
                continue
            i, j = int(idx[a]), int(idx[b])
            if i == j:
                continue
            d = float(np.hypot(*(pts[a] - pts[b])))
            key = (i, j) if i < j else (j, i)
            if d < edges.get(key, math.inf):
                edges[key] = d
    return tri, np.vstack(xy), w, clr, edges


def _graph(n, edges, keep=None):
    if keep is not None:
        edges = {k: d for k, d in edges.items() if keep[k[0]] and keep[k[1]]}
    if not edges:
        return coo_matrix((n, n)).tocsr()
    ij = np.array(list(edges.keys()))
    d = np.array(list(edges.values()))
    d = np.maximum(d, 1e-15)  # zero weights would read as missing edges
    return coo_matrix((d, (ij[:, 0], ij[:, 1])), shape=(n, n)).tocsr()


def graph_diameter(g, nodes):
    """Double-sweep estimate of the graph diameter restricted to ``nodes``."""
    src = int(nodes[0])
    far = src
    for _ in range(2):
        dist = dijkstra(g, directed=False, indices=far)
        sub = dist[nodes]
        far = int(nodes[int(np.argmax(sub))])
        diam = float(sub.max())
    return diam


def _merge_level(edges, clr, labels, thick):
    """Largest bottleneck clearance of a path joining two distinct thick components."""
    n = len(clr)
    parent = list(range(n))
    comp = [labels[i] if thick[i] else -1 for i in range(n)]

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    order = sorted(edges, key=lambda k: -min(clr[k[0]], clr[k[1]]))
    for i, j in order:
        a, b = find(i), find(j)
        if a == b:
            continue
        if comp[a] >= 0 and comp[b] >= 0 and comp[a] != comp[b]:
            return float(min(clr[i], clr[j]))
        parent[a] = b
        if comp[b] < 0:
            comp[b] = comp[a]
    return math.inf


def thick_thin_decomposition(surface, eps, h=None, treat_marked_as_singular=True):
    """Components of ``{x : d(x, Sigma) >= eps}`` with diameters and bottleneck clearance."""
    if not eps > 0:
        raise BadParams("eps must be positive")
    if h is None:
        h = eps / 10
    if not h > 0:
        raise BadParams("h must be positive")
    mesh = surface if isinstance(surface, TriMesh) else TriMesh(surface, treat_marked_as_singular)
    # clearances above eps only matter as "thick", so the ray search stops there
    tri, xy, w, clr, edges = sample_surface(mesh, h, limit=eps)
    n = len(w)
    thick = clr >= eps
    g = _graph(n, edges, thick)
    _, labels = connected_components(g, directed=False)
    comps = {}
    for i in np.flatnonzero(thick):
        comps.setdefault(int(labels[i]), []).append(int(i))
    if not comps:
        raise ResolutionTooCoarse(f"no sample point has clearance >= {eps}")
    out = []
    relabel = np.full(n, -1)
    for k, (lab, members) in enumerate(sorted(comps.items(), key=lambda kv: kv[1][0])):
        if len(members) < 3:
            raise ResolutionTooCoarse(f"component with {len(members)} nodes; decrease h")
        members = np.array(members)
        relabel[members] = k
        out.append(Component(k, float(w[members].sum()), graph_diameter(g, members), len(members)))
    C = len(out)
    delta = math.inf if C == 1 else _merge_level(edges, clr, relabel, thick)
    removed = float(w[~thick].sum())
    return Decomposition(float(eps), out, C, delta, removed, float(h), (tri, xy, w, clr))
