import math

import numpy as np
import pytest
from scipy import ndimage

from flatue.errors import BadParams, ResolutionTooCoarse
from flatue.generators import generate
from flatue.geodesics import thick_thin_decomposition
from flatue.geodesics.decomposition import _triangle_nodes, clearance
from flatue.mesh import TriMesh

SIDE = 1 / math.sqrt(2)


def pillowcase_grid_oracle(eps, step):
    """Brute force on the chart [0, 2s] x [0, s] of the pillowcase.

    The cone points of the pillowcase lift to the lattice sZ^2 in its double
    cover, so the clearance of a chart point is its distance to sZ^2.  Returns
    the thick area of each square and the bottleneck level between the two
    square centres.
    """
    s = SIDE
    xs = np.arange(step / 2, 2 * s, step)
    ys = np.arange(step / 2, s, step)
    X, Y = np.meshgrid(xs, ys)
    fx, fy = X / s - np.round(X / s), Y / s - np.round(Y / s)
    clr = s * np.hypot(fx, fy)
    cell = step * step
    left = float(((clr >= eps) & (X < s)).sum() * cell)
    right = float(((clr >= eps) & (X >= s)).sum() * cell)
    a = (len(ys) // 2, int(np.argmin(abs(xs - s / 2))))
    b = (len(ys) // 2, int(np.argmin(abs(xs - 1.5 * s))))
    lo, hi = 0.0, float(clr.max())
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        lab, _ = ndimage.label(clr >= mid, structure=np.ones((3, 3)))
        if lab[a] and lab[a] == lab[b]:
            lo = mid
        else:
            hi = mid
    return left, right, lo


def test_triangle_nodes_partition_area():
    P = ((0.0, 0.0), (2.0, 0.0), (0.3, 1.1))
    for h in (0.5, 0.1, 0.03):
        pts, w = _triangle_nodes(P, h)
        assert w.sum() == pytest.approx(1.1, rel=1e-12)
        assert (w > 0).all()
        # every node lies inside the triangle
        for x, y in pts:
            assert y > 0 and y < 1.1 and 1.1 * x - 0.3 * y > -1e-12 and (x - 2) * 1.1 - (0.3 - 2) * y < 1e-12


def test_clearance_on_square_torus():
    mesh = TriMesh(generate("torus"))
    rng = np.random.default_rng(0)
    for _ in range(30):
        t = int(rng.integers(len(mesh.P)))
        w = rng.dirichlet(np.ones(3))
        p = tuple(w @ np.array(mesh.P[t]))
        # the only singular point is the lattice Z^2 in any chart
        q = np.array(p) - np.round(p)
        assert clearance(mesh, t, p) == pytest.approx(float(np.hypot(*q)), abs=1e-12)
        assert clearance(mesh, t, p, limit=0.05) == pytest.approx(min(0.05, float(np.hypot(*q))), abs=1e-12)


def test_square_torus_thick_part():
    d = thick_thin_decomposition(generate("torus"), 0.1, 0.01)
    assert d.C == 1 and d.delta == math.inf
    assert d.removed_area == pytest.approx(math.pi * 0.01, rel=0.02)
    # intrinsic diameter of the unit square torus is sqrt(2)/2; graph paths run a little long
    assert math.sqrt(2) / 2 - 0.01 <= d.sum_diameters <= 1.05 * math.sqrt(2) / 2


def test_pillowcase_two_components_against_grid_oracle():
    eps, h = 0.45, 0.02
    d = thick_thin_decomposition(generate("pillowcase"), eps, h)
    left, right, delta = pillowcase_grid_oracle(eps, h / 4)
    assert d.C == 2
    assert delta == pytest.approx(SIDE / 2, abs=h / 4)
    assert delta - h <= d.delta <= delta + h / 4
    # node quadrature misclassifies cells along the boundary (length < 0.4 per component)
    tol = 0.4 * h / 2
    for c, ref in zip(d.components, (left, right)):
        assert c.area == pytest.approx(ref, abs=tol)
    assert d.removed_area == pytest.approx(1.0 - left - right, abs=2 * tol)


def test_pillowcase_bottleneck_above_systole_bound():
    # the gap between two thick components is at least kappa / (2 |Sigma|)
    d = thick_thin_decomposition(generate("pillowcase"), 0.45, 0.02)
    kappa = math.sqrt(2)
    assert d.delta >= kappa / (2 * 4) - 0.02


def test_resolution_and_parameter_errors():
    with pytest.raises(ResolutionTooCoarse):
        thick_thin_decomposition(generate("torus"), 0.9, 0.1)  # nothing is 0.9 away from the corner
    with pytest.raises(ResolutionTooCoarse):
        thick_thin_decomposition(generate("pillowcase"), 0.49, 0.05)  # tiny components
    with pytest.raises(BadParams):
        thick_thin_decomposition(generate("torus"), 0.0)
