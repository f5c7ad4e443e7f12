"""Shared surfaces and random surface families for the test suite."""

import math

import numpy as np
import pytest

from flatue.generators import _g, generate
from flatue.surface import FLIP, FlatSurface, Polygon

GENERATOR_CASES = [
    ("torus", ()),
    ("torus", ("golden",)),
    ("torus", ("1/2",)),
    ("pillowcase", ()),
    ("lshape", ()),
    ("lshape", ("3", "3/2")),
    ("regular-2ngon", ("2",)),
    ("regular-2ngon", ("3",)),
    ("regular-2ngon", ("4",)),
    ("regular-2ngon", ("5",)),
    ("torus-cover", ("1",)),
    ("torus-cover", ("2",)),
    ("torus-cover", ("3",)),
]


def all_generated():
    return [(f"{name}{list(args)}", generate(name, *args)) for name, args in GENERATOR_CASES]


def random_symmetric_surface(rng):
    """Centrally symmetric convex 2n-gon (n = 2..5) with opposite sides translated together."""
    n = int(rng.integers(2, 6))
    while True:
        # side directions spread over a half turn, no two nearly parallel
        angles = np.sort(rng.uniform(0.0, math.pi - 0.1, n))
        if n == 1 or np.diff(angles).min() > 0.1:
            break
    lengths = rng.uniform(0.3, 1.5, n)
    vecs = [(L * math.cos(a), L * math.sin(a)) for L, a in zip(lengths, angles)]
    vecs = vecs + [(-x, -y) for x, y in vecs]
    pts, x, y = [], 0.0, 0.0
    for dx, dy in vecs:
        pts.append((x, y))
        x, y = x + dx, y + dy
    glue = [_g(0, i, 0, i + n) for i in range(n)]
    return FlatSurface([Polygon("0", pts)], glue)


def random_pillowcase(rng):
    """Random parallelogram with every side folded at its midpoint: a sphere with
    four angle-pi points and one angle-2pi point."""
    a = rng.uniform(0.4, 2.0)
    b = rng.uniform(0.4, 2.0)
    th = rng.uniform(0.3, math.pi - 0.3)
    A = np.array([0.0, 0.0])
    B = np.array([a, 0.0])
    D = np.array([b * math.cos(th), b * math.sin(th)])
    C = B + D
    pts = [A, (A + B) / 2, B, (B + C) / 2, C, (C + D) / 2, D, (D + A) / 2]
    glue = [_g(0, 2 * i, 0, 2 * i + 1, FLIP) for i in range(4)]
    return FlatSurface([Polygon("0", [tuple(p) for p in pts])], glue)


def random_surfaces(seed=2024, count=20):
    rng = np.random.default_rng(seed)
    return [random_symmetric_surface(rng) if k % 2 == 0 else random_pillowcase(rng) for k in range(count)]


@pytest.fixture
def square_torus():
    return generate("torus")


@pytest.fixture
def golden_torus():
    return generate("torus", "golden")


@pytest.fixture
def pillowcase():
    return generate("pillowcase")


@pytest.fixture
def lshape():
    return generate("lshape")


# acceptance lines, collected by test_acceptance and repeated in the terminal summary
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
