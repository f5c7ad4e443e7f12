"""Piecewise-straight curves on a flat surface."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .surface import EPS_GLUE, Vec2


@dataclass(frozen=True)
class CurvePath:
    """Ordered ``(polygon id, entry, exit)`` segments; ``closed`` if the last exit
    is glued to the first entry."""

    segments: tuple = ()
    closed: bool = False
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        segs = tuple((str(pid), Vec2(*a), Vec2(*b)) for pid, a, b in self.segments)
        object.__setattr__(self, "segments", segs)

    @property
    def length(self):
        return math.fsum((b - a).norm for _, a, b in self.segments)

    def __len__(self):
        return len(self.segments)

    def reversed(self):
        return CurvePath(tuple((pid, b, a) for pid, a, b in reversed(self.segments)), self.closed)


def merge_pieces(pieces, closed=False, tol=EPS_GLUE):
    """Build a path from ``(pid, a, b)`` pieces, joining consecutive collinear pieces
    that continue inside the same polygon."""
    out = []
    for pid, a, b in pieces:
        a, b = Vec2(*a), Vec2(*b)
        if (b - a).norm <= tol:
            continue
        if out:
            qid, qa, qb = out[-1]
            if qid == pid and (qb - a).norm <= tol:
                u, w = qb - qa, b - a
                if abs(u.x * w.y - u.y * w.x) <= 1e-9 * u.norm * w.norm and u.x * w.x + u.y * w.y > 0:
                    out[-1] = (pid, qa, b)
                    continue
        out.append((pid, a, b))
    if not out and pieces:
        pid, a, b = pieces[0]
        out.append((pid, Vec2(*a), Vec2(*b)))
    if closed and len(out) > 1:
        pid, a, b = out[0]
        qid, qa, qb = out[-1]
        if qid == pid and (qb - a).norm <= tol:
            u, w = qb - qa, b - a
            if abs(u.x * w.y - u.y * w.x) <= 1e-9 * u.norm * w.norm and u.x * w.x + u.y * w.y > 0:
                out[0] = (pid, qa, b)
                out.pop()
    return CurvePath(tuple(out), closed)
