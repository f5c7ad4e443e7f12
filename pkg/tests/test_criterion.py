import math

import numpy as np
import pytest

from flatue.errors import BadParams
from flatue.generators import generate
from flatue.geodesics import criterion_integral, shortest_saddle_connection, theorem3_report
from flatue.geodesics.criterion import (CONVERGES, DIVERGES, INCONCLUSIVE, _verdict, thick_thin_integrand,
                                        trapezoid_running)
from flatue.teich import build_flow_track

NORM_FORM_BOUND = math.sqrt(2 / math.sqrt(5))


@pytest.fixture(scope="module")
def golden_report():
    return criterion_integral(build_flow_track(generate("torus", "golden"), 8.0, 0.25))


@pytest.fixture(scope="module")
def half_report():
    return criterion_integral(build_flow_track(generate("torus", "1/2"), 8.0, 0.25))


def test_trapezoid_running_exact_for_linear():
    ts = [0.0, 0.5, 1.5, 2.0]
    assert trapezoid_running(ts, [2 * t + 1 for t in ts]) == pytest.approx([t * t + t for t in ts])


def test_verdict_rules():
    assert _verdict([1.0, 1.0, 1.0]) == INCONCLUSIVE
    assert _verdict([1.0] * 8) == DIVERGES
    assert _verdict([1.0, 0.5, 0.1, 0.01, 1e-3, 1e-4, 1e-5, 1e-6]) == CONVERGES
    assert _verdict([1.0, 1.0, 0.1, 0.1, 0.1, 0.1, 0.1, 0.2]) == INCONCLUSIVE


def test_thick_thin_integrand():
    assert thick_thin_integrand(0.1, 0.5, 1, math.inf) == pytest.approx((0.5 / 0.01) ** -2)
    assert thick_thin_integrand(0.5, 1.0, 3, 0.25) == pytest.approx((4.0 + 8.0) ** -2)


def test_golden_diverges(golden_report):
    rep = golden_report
    assert rep.verdict_hint == DIVERGES
    integral = rep.column("integral")
    assert all(b >= a for a, b in zip(integral, integral[1:]))
    assert min(rep.column("kappa")) >= NORM_FORM_BOUND - 1e-6
    ts = rep.column("t")
    slope = np.polyfit(ts, integral, 1)[0]
    assert integral[-1] >= 0.8 * slope * 8.0
    assert integral[-1] >= NORM_FORM_BOUND ** 2 * 8.0 - 1e-6


def test_half_slope_converges(half_report):
    rep = half_report
    assert rep.verdict_hint == CONVERGES
    assert rep.column("integrand")[-1] <= 2e-4
    # the closed horizontal leaf has holonomy (2, 1) of length sqrt(5): kappa(t) = sqrt(5) e^-t
    for t, k in zip(rep.column("t"), rep.column("kappa")):
        if t >= 2:
            assert k * math.exp(t) == pytest.approx(math.sqrt(5), rel=0.05)


def test_delta_column_matches_samples():
    track = build_flow_track(generate("lshape"), 2.0, 0.5)
    rep = criterion_integral(track)
    for (t, s, _), d, dt in zip(track.samples, rep.column("delta_sc"), rep.column("d_t")):
        assert d == pytest.approx(shortest_saddle_connection(s)[0], abs=1e-9)
        assert dt == pytest.approx(-math.log(d))


def test_theorem3_report_rows():
    track = build_flow_track(generate("torus", "golden"), 1.0, 0.5)
    rep = theorem3_report(track, 0.2, 0.1, 0.02, with_systole=True)
    assert len(rep.rows) == 3 and len(rep.kappas) == 3
    for t, C, sumD, delta, y, I, c1, c2 in rep.rows:
        assert C == 1 and delta == math.inf
        assert y == pytest.approx((sumD / 0.01) ** -2)
        assert c1 and c2
    # a time-dependent schedule is accepted
    rep2 = theorem3_report(track, 0.2, lambda t: 0.1 + 0.01 * t)
    assert [d.epsilon for d in rep2.decompositions] == pytest.approx([0.1, 0.105, 0.11])
    with pytest.raises(BadParams):
        theorem3_report(track, 0.0, 0.1)
