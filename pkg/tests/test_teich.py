import math

import numpy as np
import pytest

from flatue.errors import BadParams
from flatue.generators import GOLDEN, generate
from flatue.geodesics import shortest_saddle_connection
from flatue.mesh import TriMesh
from flatue.surface import area, cone_points, validate
from flatue.teich import build_flow_track, flow_to, holonomy_length_at, normalize, time_grid


def lattice_shortest(slope, t):
    """Shortest nonzero vector of g_t R(-atan slope) Z^2 by Lagrange-Gauss reduction."""
    th = -math.atan(slope)
    g = np.diag([math.exp(-t), math.exp(t)])
    rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    u, v = g @ rot @ np.array([1.0, 0.0]), g @ rot @ np.array([0.0, 1.0])
    if u @ u > v @ v:
        u, v = v, u
    while True:
        v = v - round((u @ v) / (u @ u)) * u
        if v @ v >= u @ u:
            return float(math.sqrt(u @ u))
        u, v = v, u


def test_holonomy_length_at():
    assert holonomy_length_at((1.0, 0.0), 1.0) == pytest.approx(math.exp(-1))
    assert holonomy_length_at((0.0, 2.0), 0.5) == pytest.approx(2 * math.exp(0.5))
    assert holonomy_length_at((3.0, 4.0), 0.0) == 5.0


def test_time_grid():
    assert time_grid(1.0, 0.25) == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert time_grid(1.0, 0.3)[-1] == 1.0
    assert time_grid(0.0, 0.1) == [0.0]
    with pytest.raises(BadParams):
        time_grid(1.0, 0.0)
    with pytest.raises(BadParams):
        time_grid(-1.0, 0.1)


def test_flow_preserves_area_and_cone_data():
    s = generate("lshape", 3, 2)
    for t in (0.5, 2.0, -1.0):
        f = flow_to(s, t, normalize_result=True)
        assert validate(f) == []
        assert area(f) == pytest.approx(area(s), rel=1e-10)
        assert [round(c.angle / math.pi) for c in cone_points(f)] == [6]


def test_flow_group_law():
    s = generate("torus", "golden")
    a = flow_to(flow_to(s, 0.7), 0.6)
    b = flow_to(s, 1.3)
    for p, q in zip(a.polygons, b.polygons):
        assert np.allclose(p.vertices, q.vertices, atol=1e-12)


def test_normalized_samples_are_delaunay_and_isometric():
    track = build_flow_track(generate("torus", "golden"), 5.0, 0.5)
    assert track.times == time_grid(5.0, 0.5)
    for t, s, flips in track.samples:
        assert validate(s) == []
        assert TriMesh(s).make_delaunay() == 0
        assert area(s) == pytest.approx(1.0, rel=1e-9)
        # the shortest saddle connection of the sample is the shortest vector of the flowed lattice
        assert shortest_saddle_connection(s)[0] == pytest.approx(lattice_shortest(GOLDEN, t), rel=1e-9)


def test_normalize_reports_flips():
    s = flow_to(generate("torus", "golden"), 2.0)
    n, flips = normalize(s)
    assert flips > 0
    assert shortest_saddle_connection(n)[0] == pytest.approx(lattice_shortest(GOLDEN, 2.0), rel=1e-9)
