import math

import numpy as np
import pytest

from flatue.dynamics import (CLOSED_UP, HIT_CONE_POINT, LENGTH_BUDGET, NON_UE_LIKE, UE_LIKE, BoxGrid,
                             Transversal, as_cover, birkhoff_panel, box_discrepancy, checkpoints,
                             direct_returns, first_return_map, project_trace, random_starts, sample_points,
                             trace_leaf, transverse_measure_estimate)
from flatue.errors import BadParams, CylinderDetected, StartAtConePoint
from flatue.generators import GOLDEN, generate
from flatue.surface import area

# one side of the rotated unit square, running from vertex 0 to vertex 3
GOLDEN_SIDE = "0_0:0,0:0.5257311121191337,0.8506508083520399:1"


@pytest.fixture(scope="module")
def golden():
    return as_cover(generate("torus", "golden"))


def test_as_cover():
    assert as_cover(generate("torus")).degree == 1
    c = as_cover(generate("pillowcase"))
    assert c.degree == 2 and c.connected
    with pytest.raises(BadParams):
        as_cover("torus")


def test_square_torus_leaf_closes_after_one_unit():
    tr = trace_leaf(as_cover(generate("torus")), ("0_0", (0.3, 0.4)), 10.0)
    assert tr.terminated_by == CLOSED_UP
    assert tr.total_length == pytest.approx(1.0, abs=1e-12)
    assert tr.segments.length == pytest.approx(1.0, abs=1e-12)
    assert all(abs(a.y - 0.4) < 1e-12 and abs(b.y - 0.4) < 1e-12 for _, a, b in tr.segments.segments)


def test_leaf_hits_cone_point_and_start_checks():
    ls = as_cover(generate("lshape", 3, 2))
    # the height-1/2 leaf of the long arm closes up after its circumference 3
    tr = trace_leaf(ls, ("1_0", (1.5, 0.5)), 2.5)
    assert tr.terminated_by == LENGTH_BUDGET
    assert trace_leaf(ls, ("1_0", (1.5, 0.5)), 5.0).terminated_by == CLOSED_UP
    # the leaf along the top side of the arm runs into the 6pi point
    hit = trace_leaf(ls, ("1_0", (1.5, 1.0)), 10.0)
    assert hit.terminated_by == HIT_CONE_POINT
    assert hit.total_length == pytest.approx(1.5, abs=1e-12)
    with pytest.raises(StartAtConePoint):
        trace_leaf(ls, ("0_0", (1.0, 1.0)), 1.0)
    with pytest.raises(BadParams):
        trace_leaf(ls, ("0_0", (0.5, 0.5)), 0.0)


def test_pillowcase_leaves_project_to_base():
    c = as_cover(generate("pillowcase"))
    tr = trace_leaf(c, ("0_0", (0.2, 0.3)), 5.0)
    # horizontal gluings are translations, so a horizontal leaf stays on its sheet
    # and closes after crossing both squares once
    assert tr.terminated_by == CLOSED_UP
    assert tr.total_length == pytest.approx(math.sqrt(2), abs=1e-9)
    proj = project_trace(tr)
    assert {pid for pid, _, _ in proj.segments} <= {"0", "1"}
    assert proj.length == pytest.approx(tr.total_length, abs=1e-9)


def test_sampling_and_boxes(golden):
    grid = BoxGrid(golden.base, 4)
    assert sum(grid.measure) == pytest.approx(area(golden.base), rel=1e-9)
    tr = trace_leaf(golden, ("0_0", (0.3, 0.1)), 2000.0)
    ids, xy = sample_points(tr, 2000)
    assert len(ids) == 2000
    idx = grid.index(ids, xy)
    assert (idx >= 0).all() and (idx < len(grid.boxes)).all()
    assert checkpoints(10 ** 5) == [100, 1000, 10000, 100000]


def test_golden_discrepancy_decreases(golden):
    tr = trace_leaf(golden, ("0_0", (0.3, 0.1)), 2.0e4)
    rows = box_discrepancy(tr, 4)
    Ns = [N for N, _ in rows]
    Ds = [D for _, D in rows]
    assert Ns == [100, 1000, 10000, 20000]
    assert Ds[-1] < Ds[0]
    assert Ds[-1] <= 0.01


def test_golden_return_map_is_rotation(golden):
    rm = first_return_map(golden, Transversal.parse(GOLDEN_SIDE))
    lengths = sorted(ln for ln, _, _ in rm.intervals)
    assert len(lengths) == 2
    assert lengths == pytest.approx(sorted([1 - GOLDEN, GOLDEN]), abs=1e-6)
    rng = np.random.default_rng(8)
    for s in rng.uniform(0, 1, 200):
        assert rm.apply(s) == pytest.approx((s + GOLDEN) % 1.0, abs=1e-6)


def test_iterated_map_matches_direct_tracing(golden):
    rm = first_return_map(golden, Transversal.parse(GOLDEN_SIDE))
    s0 = 0.123456
    direct = direct_returns(golden, GOLDEN_SIDE, s0, 300)
    s = s0
    for d in direct:
        s = rm.apply(s)
        assert s == pytest.approx(d, abs=1e-6)


def test_rational_slope_return_map_detects_cylinder():
    c = as_cover(generate("torus", "2/5"))
    side = c.total.polygons[0].vertices[3]
    with pytest.raises(CylinderDetected):
        first_return_map(c, f"0_0:0,0:{side.x!r},{side.y!r}:1")


def test_transverse_measure_is_vertical_extent(golden):
    tr = trace_leaf(golden, ("0_0", (0.3, 0.1)), 2.0e4)
    tv = Transversal.parse(GOLDEN_SIDE)
    est = transverse_measure_estimate(golden, tv, tr)
    # the horizontal foliation measures a transversal by its vertical extent
    assert est == pytest.approx(tv.direction[1] / math.hypot(*tv.direction), abs=2e-3)


def test_panels(golden):
    starts = random_starts(golden, 3, np.random.default_rng(4))
    assert starts == random_starts(golden, 3, np.random.default_rng(4))
    rep = birkhoff_panel(golden, starts, budget=10 ** 4)
    assert rep.verdict_hint == UE_LIKE
    assert rep.max_gap <= 0.02
    half = as_cover(generate("torus", "1/2"))
    rep = birkhoff_panel(half, [("0_0", (0.5, 0.1)), ("0_0", (0.5, 0.3))], budget=10 ** 4)
    assert rep.verdict_hint == NON_UE_LIKE
    assert rep.max_gap >= 0.1
    with pytest.raises(BadParams):
        birkhoff_panel(half, [("0_0", (0.5, 0.1))])
