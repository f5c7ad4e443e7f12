"""Systole estimates from cylinders and closed chains of saddle connections.

A closed geodesic on a flat surface is either the core of a cylinder or a
cyclic chain of saddle connections in which, at every junction, the angle on
at least one side is at least pi.  We search both families with an
increasing length bound ``L``; once the best candidate is no longer than
``L`` every shorter candidate of these kinds has been seen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..paths import CurvePath, merge_pieces
from ..surface import cone_points, euler_characteristic
from .saddle import DEFAULT_NODE_CAP, detect_cylinders, enumerate_saddle_connections, min_edge_length
from ..mesh import TriMesh

CYLINDER_CORE = "CylinderCore"
SINGULAR_LOOP = "SingularLoop"
CONCATENATION = "Concatenation"

_ANG = 1e-9


@dataclass
class SystoleEstimate:
    value: float
    certificate: CurvePath
    kind: str
    lower_confidence: bool
    search_radius: float = 0.0
    punctured: bool = True
    connections: tuple = field(default=(), repr=False)


def _side_angles(theta, th_in, th_out):
    a = (th_out - th_in) % theta
    return a, theta - a


def _junction_ok(mesh, k, th_in, th_out):
    theta = mesh.class_angle[k]
    a, b = _side_angles(theta, th_in, th_out)
    if mesh.class_singular[k]:
        return max(a, b) >= math.pi - _ANG
    # a point that is not a puncture must be crossed straight
    return abs(a - math.pi) <= 1e-7 and abs(b - math.pi) <= 1e-7


def topology(surface, mesh):
    """``(genus, punctures)`` for the semantics encoded in ``mesh``."""
    chi = euler_characteristic(surface)
    genus = (2 - chi) // 2
    return genus, sum(1 for s in mesh.class_singular if s)


def _chain_path(mesh, chain):
    pieces = []
    for sc in chain:
        pieces.extend((mesh.owner(t), a, b) for t, a, b in sc.pieces())
    return merge_pieces(pieces, closed=True)


def _is_reverse(s1, s2):
    return (s1.end == s2.start and s1.start == s2.end and abs(s1.length - s2.length) <= 1e-9 * s1.length
            and abs(s2.start_angle - s1.end_angle) <= 1e-9)


def _candidates(mesh, scs, depth, cap, allow_wrap):
    """Best closed chain of at most ``depth`` connections no longer than ``cap``."""
    best = (math.inf, None)
    by_start = {}
    for sc in scs:
        by_start.setdefault(sc.start, []).append(sc)
    for lst in by_start.values():
        lst.sort(key=lambda s: s.length)

    def extend(chain, total):
        nonlocal best
        last = chain[-1]
        first = chain[0]
        if last.end == first.start and _junction_ok(mesh, first.start, last.end_angle, first.start_angle):
            wrap = len(chain) == 2 and _is_reverse(chain[0], chain[1])
            if not wrap or (allow_wrap and chain[0].start != chain[0].end):
                if total < best[0] - 1e-12:
                    best = (total, list(chain))
        if len(chain) >= depth:
            return
        for nxt in by_start.get(last.end, ()):
            if total + nxt.length >= min(best[0], cap) + 1e-12:
                break
            if not _junction_ok(mesh, last.end, last.end_angle, nxt.start_angle):
                continue
            chain.append(nxt)
            extend(chain, total + nxt.length)
            chain.pop()

    for sc in scs:
        if sc.length >= min(best[0], cap) + 1e-12:
            break
        extend([sc], sc.length)
    return best


def systole_estimate(surface, depth=2, treat_marked_as_singular=True, node_cap=DEFAULT_NODE_CAP,
                     max_radius=None):
    """Estimate the systole: shortest essential closed curve.

    With ``treat_marked_as_singular`` (the default) marked points are punctures
    and essential means essential in the complement of all distinguished points;
    otherwise marked points are ordinary points of the closed surface.
    """
    if isinstance(surface, TriMesh):
        mesh = surface
        surface = mesh.to_surface()
    else:
        mesh = TriMesh(surface, marked_singular=treat_marked_as_singular)
    punctured = mesh.marked_singular
    genus, npunct = topology(surface, mesh)
    if genus == 0 and npunct <= 3:
        # sphere with at most three punctures: every simple closed curve is peripheral
        return SystoleEstimate(math.inf, CurvePath((), True), CONCATENATION, True, 0.0, punctured)
    L = 2 * min_edge_length(mesh)
    diam = math.sqrt(abs(mesh.area())) * 4 + max(
        math.hypot(P[i][0] - P[j][0], P[i][1] - P[j][1]) for P in mesh.P for i in range(3) for j in range(3))
    if max_radius is None:
        max_radius = 64 * diam
    allow_wrap = genus > 0 or npunct > 3
    while True:
        scs = enumerate_saddle_connections(mesh, L, node_cap)
        cyls = detect_cylinders(mesh, L, connections=scs)
        best = (math.inf, None, None)
        for c in cyls:
            if c.circumference < best[0] - 1e-12:
                best = (c.circumference, c.core, CYLINDER_CORE)
        val, chain = _candidates(mesh, scs, max(1, depth), L, allow_wrap)
        if chain is not None and val < best[0] - 1e-9 * max(1.0, val):
            kind = SINGULAR_LOOP if len(chain) == 1 else CONCATENATION
            best = (val, _chain_path(mesh, chain), kind)
            conn = tuple(chain)
        else:
            conn = ()
        if best[0] <= L or L >= max_radius:
            return SystoleEstimate(best[0], best[1] if best[1] is not None else CurvePath((), True),
                                   best[2] or CONCATENATION, best[0] <= L, L, punctured, conn)
        L *= 2


def systole_both(surface, depth=2, node_cap=DEFAULT_NODE_CAP):
    """Estimates under both readings of "essential": ``(punctured, closed)``."""
    return (systole_estimate(surface, depth, True, node_cap),
            systole_estimate(surface, depth, False, node_cap))


def max_cone_angle(surface):
    return max((cp.angle for cp in cone_points(surface)), default=2 * math.pi)
