"""Teichmüller flow ``g_t = diag(e^-t, e^t)`` on flat surfaces."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import BadParams
from .surface import Polygon, apply_matrix, delaunay_normalize, teichmuller_matrix, triangulate


def holonomy_length_at(v, t):
    """Length of the holonomy vector ``v`` after flowing for time ``t``."""
    x, y = v
    return math.hypot(math.exp(-t) * x, math.exp(t) * y)


def recentre(surface):
    """Translate every polygon so its first vertex sits at the origin.

    Gluings only see edge vectors, so this is an isometry; it keeps coordinates
    small along long flow orbits.
    """
    polys = []
    for p in surface.polygons:
        ox, oy = p.vertices[0]
        polys.append(Polygon(p.id, [(v.x - ox, v.y - oy) for v in p.vertices]))
    return surface.with_(polygons=polys)


def normalize(surface):
    """Triangulate and flip to Delaunay; returns ``(surface, flips)``."""
    s, flips = delaunay_normalize(triangulate(surface))
    return recentre(s), flips


def flow_to(surface, t, normalize_result=False):
    """``g_t`` applied to ``surface``, optionally re-triangulated to Delaunay."""
    out = apply_matrix(surface, teichmuller_matrix(t))
    if normalize_result:
        out, _ = normalize(out)
    return out


@dataclass
class FlowTrack:
    base_surface: object
    samples: list = field(default_factory=list)  # (t, surface, flip_count)
    schedule: tuple = (0.0, 0.1)

    @property
    def times(self):
        return [t for t, _, _ in self.samples]


def time_grid(t_max, dt):
    if not dt > 0:
        raise BadParams("dt must be positive")
    if t_max < 0:
        raise BadParams("t_max must be non-negative")
    n = int(math.floor(t_max / dt + 1e-9))
    ts = [k * dt for k in range(n + 1)]
    if t_max - ts[-1] > 1e-9 * max(1.0, t_max):
        ts.append(t_max)
    return ts


def build_flow_track(surface, t_max, dt=0.1, normalize_samples=True):
    """Samples of the flow orbit at ``t = 0, dt, ..., t_max``.

    With normalisation each sample is obtained from the previous one by a short
    flow step followed by Delaunay flips, so triangles never get thin.
    """
    ts = time_grid(t_max, dt)
    samples = []
    if normalize_samples:
        cur, flips = normalize(surface)
    else:
        cur, flips = surface, 0
    samples.append((0.0, cur, flips))
    for prev, t in zip(ts, ts[1:]):
        if normalize_samples:
            cur, flips = normalize(apply_matrix(cur, teichmuller_matrix(t - prev)))
        else:
            cur, flips = apply_matrix(surface, teichmuller_matrix(t)), 0
        samples.append((t, cur, flips))
    return FlowTrack(surface, samples, (float(t_max), float(dt)))
