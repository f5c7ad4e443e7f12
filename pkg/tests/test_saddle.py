import math

import numpy as np
import pytest

from flatue.errors import SearchBudgetExceeded
from flatue.generators import generate
from flatue.geodesics import (Box, Disk, detect_cylinders, enumerate_saddle_connections,
                              shortest_saddle_connection)
from flatue.geodesics.criterion import delta_envelope
from flatue.teich import flow_to, time_grid


def primitive_vectors(L, scale=1.0):
    """Primitive integer vectors (p, q) with |scale * (p, q)| <= L."""
    R = int(L / scale) + 1
    return {(p, q) for p in range(-R, R + 1) for q in range(-R, R + 1)
            if math.gcd(p, q) == 1 and scale * math.hypot(p, q) <= L + 1e-9}


def holonomy_set(scs, scale=1.0):
    return sorted((round(sc.holonomy.x / scale), round(sc.holonomy.y / scale)) for sc in scs)


def test_square_torus_matches_lattice():
    scs = enumerate_saddle_connections(generate("torus"), 10.0)
    expected = primitive_vectors(10.0)
    assert len(scs) == len(expected) == 192
    assert holonomy_set(scs) == sorted(expected)
    for sc in scs:
        assert abs(sc.holonomy.x - round(sc.holonomy.x)) < 1e-9
        assert abs(sc.holonomy.y - round(sc.holonomy.y)) < 1e-9


def test_pillowcase_counts_from_half_lattice():
    # the double cover is the torus of side 2s; connections from each of the four
    # angle-pi points are the primitive vectors of sZ^2 modulo sign
    s = 1 / math.sqrt(2)
    pc = generate("pillowcase")
    for L in (1.0, 3.0, 5.0):
        n = len(primitive_vectors(L, s))
        assert len(enumerate_saddle_connections(pc, L)) == 4 * n // 2
    assert len(enumerate_saddle_connections(pc, 1.0)) == 16


def test_lshape_connections_are_sorted_and_symmetric():
    ls = generate("lshape")
    scs = enumerate_saddle_connections(ls, 3.0)
    lengths = [sc.length for sc in scs]
    assert lengths == sorted(lengths)
    assert min(lengths) == pytest.approx(1.0)
    # the reverse of every connection is again a connection
    hol = {(round(sc.holonomy.x, 9), round(sc.holonomy.y, 9)) for sc in scs}
    for sc in scs:
        r = sc.reverse_holonomy()
        assert (round(r.x, 9), round(r.y, 9)) in hol


def test_regions():
    s = generate("torus")
    box = enumerate_saddle_connections(s, 0, region=Box(3.0, 0.5))
    assert holonomy_set(box) == sorted(v for v in primitive_vectors(4.0) if abs(v[0]) <= 3 and abs(v[1]) <= 0.5)
    disk = enumerate_saddle_connections(s, 0, region=Disk(2.0))
    assert holonomy_set(disk) == sorted(primitive_vectors(2.0))


def test_connection_paths_have_holonomy_length():
    for sc in enumerate_saddle_connections(generate("lshape", 3, 2), 2.5):
        assert sc.path.length == pytest.approx(sc.length, rel=1e-9)


def test_shortest_connection():
    assert shortest_saddle_connection(generate("torus"))[0] == pytest.approx(1.0)
    assert shortest_saddle_connection(generate("pillowcase"))[0] == pytest.approx(1 / math.sqrt(2))
    assert shortest_saddle_connection(generate("regular-2ngon", 4))[0] == pytest.approx(1.0)


def test_node_cap():
    with pytest.raises(SearchBudgetExceeded):
        enumerate_saddle_connections(generate("lshape"), 50.0, node_cap=100)


def test_square_torus_cylinders():
    cyls = detect_cylinders(generate("torus"), 3.0)
    dirs = {v if v > (0, 0) else (-v[0], -v[1]) for v in primitive_vectors(3.0)}
    assert len(cyls) == len(dirs)
    for c in cyls:
        # a single cylinder fills the torus: circumference * height = area
        assert c.circumference * c.height == pytest.approx(1.0, rel=1e-9)
        assert c.core.length == pytest.approx(c.circumference, rel=1e-9)


def test_lshape_horizontal_cylinders():
    # L-shape 3x2: horizontal cylinders of circumference 3 (height 1) and 1 (height 1)
    cyls = detect_cylinders(generate("lshape", 3, 2), 3.5, direction=(1.0, 0.0))
    got = sorted((round(c.circumference, 9), round(c.height, 9)) for c in cyls)
    assert got == [(1.0, 1.0), (3.0, 1.0)]


@pytest.mark.parametrize("name,args", [("torus", ("golden",)), ("lshape", ()), ("regular-2ngon", ("4",))])
def test_delta_envelope_matches_reenumeration(name, args):
    s = generate(name, *args)
    ts = time_grid(6.0, 0.5)[1:]
    env = delta_envelope(s, ts)
    for t, d in zip(ts, env):
        direct = shortest_saddle_connection(flow_to(s, t, normalize_result=True))[0]
        assert d == pytest.approx(direct, abs=1e-6)


def test_holonomies_move_with_flow():
    s = generate("lshape")
    t = 0.8
    before = enumerate_saddle_connections(s, 0, region=Box(2.5 * math.exp(t), 2.5 * math.exp(-t)))
    after = enumerate_saddle_connections(flow_to(s, t, normalize_result=True), 2.5)
    pushed = sorted((math.exp(-t) * sc.holonomy.x, math.exp(t) * sc.holonomy.y) for sc in before)
    pushed = [v for v in pushed if math.hypot(*v) <= 2.5 - 1e-9]
    got = sorted((sc.holonomy.x, sc.holonomy.y) for sc in after if sc.length <= 2.5 - 1e-9)
    assert len(got) == len(pushed)
    assert np.allclose(got, pushed, atol=1e-9)
