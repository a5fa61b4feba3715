import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from stochbundle.prox import (
    ball_indicator,
    no_constraint,
    project_ball,
    project_simplex,
    simplex_indicator,
)

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


def simplex_grid(n, step):
    """All points of the n-simplex on a grid of spacing ``step``."""
    m = int(round(1 / step))
    if n == 2:
        a = np.arange(m + 1) * step
        return np.column_stack([a, 1 - a])
    pts = [(i * step, j * step, (m - i - j) * step) for i in range(m + 1) for j in range(m + 1 - i)]
    return np.array(pts)


# Grid brute force: nearest simplex point on a fine lattice.
@pytest.mark.parametrize("n,step", [(2, 1e-4), (3, 2e-3)])
def test_simplex_projection_matches_grid(n, step, rng):
    grid = simplex_grid(n, step)
    for _ in range(20):
        v = rng.normal(scale=2.0, size=n)
        best = grid[np.argmin(np.sum((grid - v) ** 2, axis=1))]
        assert np.max(np.abs(project_simplex(v) - best)) <= 1e-3


def test_simplex_examples():
    assert np.allclose(project_simplex([0.2, 0.3, 0.5]), [0.2, 0.3, 0.5])
    assert np.allclose(project_simplex([5.0, 0.0, 0.0]), [1.0, 0.0, 0.0])
    assert np.allclose(project_simplex([1.0, 1.0]), [0.5, 0.5])
    assert np.allclose(project_simplex(np.zeros(4)), np.full(4, 0.25))


def test_simplex_rowwise(rng):
    V = rng.normal(size=(7, 5))
    P = project_simplex(V)
    for v, p in zip(V, P):
        assert np.array_equal(project_simplex(v), p)


# Variational inequality: <v - P(v), y - P(v)> <= 0 for every feasible y.
def test_simplex_variational_inequality(rng):
    n = 6
    for _ in range(1000):
        v = rng.normal(scale=3.0, size=n)
        p = project_simplex(v)
        ys = np.vstack([np.eye(n), rng.dirichlet(np.ones(n), size=5)])
        assert np.max((ys - p) @ (v - p)) <= 1e-9


def test_ball_variational_inequality(rng):
    center, r = np.array([1.0, -2.0, 0.5]), 1.5
    for _ in range(1000):
        v = rng.normal(scale=4.0, size=3)
        p = project_ball(v, center, r)
        d = rng.normal(size=(5, 3))
        ys = center + r * rng.uniform(size=(5, 1)) ** (1 / 3) * d / np.linalg.norm(d, axis=1, keepdims=True)
        assert np.max((ys - p) @ (v - p)) <= 1e-9
        assert np.linalg.norm(p - center) <= r * (1 + 1e-12)


def test_ball_examples():
    assert np.allclose(project_ball([3.0, 4.0], [0.0, 0.0], 1.0), [0.6, 0.8])
    inside = np.array([0.1, 0.2])
    assert np.array_equal(project_ball(inside, [0.0, 0.0], 1.0), inside)


@given(arrays(float, st.integers(1, 12), elements=finite))
@settings(max_examples=200, deadline=None)
def test_simplex_projection_properties(v):
    p = project_simplex(v)
    assert p.min() >= 0
    assert abs(p.sum() - 1) <= 1e-9
    # idempotent and translation invariant along the all-ones direction
    assert np.allclose(project_simplex(p), p, atol=1e-12)
    assert np.allclose(project_simplex(v + 3.7), p, atol=1e-9)


@given(arrays(float, 4, elements=finite), arrays(float, 4, elements=finite))
@settings(max_examples=200, deadline=None)
def test_simplex_projection_nonexpansive(a, b):
    assert np.linalg.norm(project_simplex(a) - project_simplex(b)) <= np.linalg.norm(a - b) + 1e-9


def test_prox_operator_constants():
    op = simplex_indicator(5)
    assert op.diameter == pytest.approx(np.sqrt(2))
    assert op.evaluate_h(np.full(5, 0.2)) == 0.0
    assert op.evaluate_h(np.array([1.1, -0.1, 0, 0, 0])) == np.inf
    # prox of an indicator ignores the step size
    v = np.arange(5.0)
    assert np.array_equal(op.prox(v, 0.01), op.prox(v, 100.0))
    ball = ball_indicator(np.zeros(2), 2.0)
    assert ball.diameter == 4.0
    free = no_constraint()
    assert free.diameter == np.inf and free.evaluate_h(v) == 0.0
    assert np.array_equal(free.project(v), v)


def test_simplex_vertices_are_diameter_apart():
    n = 4
    verts = np.eye(n)
    dists = [np.linalg.norm(a - b) for a, b in itertools.combinations(verts, 2)]
    assert max(dists) == pytest.approx(simplex_indicator(n).diameter)
