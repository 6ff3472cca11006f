import math

import numpy as np
import pytest
from scipy import stats

from acsheet.errors import CellOutOfRange, DegenerateGrid, NonIntegralShift, NonIntegralStepCount, \
    TestFunctionBoundaryViolation
from acsheet.grid_noise import NoisePath, TestFunction, h1_seminorm, l2_norm, lp_norm, make_grid, \
    sample_increment, shift


def test_grid_basic():
    g = make_grid(1, 3, 0, 1, 0.5)
    assert g.dx == 0.25
    assert g.M == 2
    assert g.lam(1) == pytest.approx(9.8696044, rel=1e-7)
    assert np.allclose(g.nodes, [0.25, 0.5, 0.75])
    assert make_grid(2, 3, 0, 1, 0.5).lam(1) == pytest.approx(2.4674011, rel=1e-7)


def test_grid_errors():
    with pytest.raises(NonIntegralStepCount):
        make_grid(1, 3, 0, 1, 0.3)
    with pytest.raises(DegenerateGrid):
        make_grid(1, 1, 0, 1, 0.5)
    with pytest.raises(DegenerateGrid):
        make_grid(0, 3, 0, 1, 0.5)


def test_discrete_eigenvalues_formula():
    g = make_grid(1, 16, 0, 1, 0.1)
    n = np.arange(1, 17)
    expect = (2 / g.dx**2) * (1 - np.cos(n * np.pi * g.dx / g.L))
    assert np.allclose(g.lambdas_h, expect, rtol=1e-13)


def test_increment_deterministic():
    g = make_grid(1, 8, 0, 1, 0.01)
    a = NoisePath(7, g)
    b = NoisePath(7, g)
    assert sample_increment(a, 5, 3) == sample_increment(a, 5, 3) == b.increment(5, 3)
    # windows requested out of order agree with one big request
    big = a.increments(-300, 600)
    assert np.array_equal(big[300 + 10:300 + 20], b.increments(10, 20))
    assert np.array_equal(big[:5], NoisePath(7, g).increments(-300, -295))
    assert not np.array_equal(a.increments(0, 5), NoisePath(8, g).increments(0, 5))


def test_cell_out_of_range():
    p = NoisePath(1, make_grid(1, 3, 0, 1, 0.5))
    with pytest.raises(CellOutOfRange):
        p.increment(0, 4)
    with pytest.raises(IndexError):
        p.increment(0, -1)


def test_variance_across_seeds():
    g = make_grid(1, 3, 0, 1, 0.01)
    vals = np.array([NoisePath(s, g, cache_blocks=1).increment(3, 2) for s in range(10_000)])
    assert np.var(vals) / (g.dt * g.dx) == pytest.approx(1.0, abs=0.05)


def test_rectangle_isometry():
    # [0, 2] x [0.25, 0.75] is cells 1..2 of a dx = 0.25 grid over 4 steps of 0.5
    g = make_grid(1, 3, 0, 2, 0.5)
    sums = np.array([NoisePath(s, g, cache_blocks=1).increments(0, 4)[:, 1:3].sum() for s in range(10_000)])
    assert np.var(sums) == pytest.approx(1.0, abs=0.05)


def test_shift_group():
    g = make_grid(1, 3, -4, 4, 0.5)
    p = NoisePath(3, g)
    assert np.array_equal(shift(p, 0.0).increments(-8, 8), p.increments(-8, 8))
    assert np.array_equal(p.shift(0.5).shift(-1.5).increments(-5, 5), p.shift(-1.0).increments(-5, 5))
    assert np.array_equal(p.shift(1.0).increments(0, 3), p.increments(2, 5))
    with pytest.raises(NonIntegralShift):
        p.shift(0.3)


def test_shift_preserves_law():
    g = make_grid(1, 39, 0, 1, 0.01)
    p = NoisePath(11, g)
    a = p.increments(0, 250).ravel()
    b = p.shift(12345 * g.dt).increments(0, 250).ravel()
    assert a.size == b.size == 10_000
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_coarsen_sums_cells():
    g = make_grid(1, 15, 0, 1, 1e-3)
    p = NoisePath(5, g)
    c = p.coarsen(4, 2)
    assert c.grid.N == 7 and c.grid.dt == pytest.approx(4e-3)
    fine = p.increments(0, 16)
    expect = fine.reshape(4, 4, 8, 2).sum(axis=(1, 3))
    assert np.allclose(c.increments(0, 4), expect, rtol=0, atol=1e-15)


def test_scaled_zero():
    p = NoisePath(1, make_grid(1, 7, 0, 1, 0.1)).scaled(0.0)
    assert not np.any(p.increments(0, 10))
    assert not np.any(p.modal_increments(0, 10))


def test_test_function_boundary():
    g = make_grid(1, 15, 0, 1, 0.1)
    with pytest.raises(TestFunctionBoundaryViolation):
        TestFunction.from_callables(g, np.cos, lambda x: -np.cos(x))
    phi = TestFunction.sine(g, 2)
    assert np.allclose(phi.phi_pp, -(2 * np.pi) ** 2 * phi.phi)
    b = TestFunction.bump(g)
    h = 1e-4
    x = g.nodes
    fd = ((x + h) ** 2 * (1 - x - h) ** 2 - 2 * x**2 * (1 - x) ** 2 + (x - h) ** 2 * (1 - x + h) ** 2) / h**2
    assert np.allclose(b.phi_pp, fd, atol=1e-5)


def test_norms():
    g = make_grid(1, 63, 0, 1, 0.1)
    s = np.sin(np.pi * g.nodes)
    # sum of sin^2 over the interior nodes is exactly (N + 1)/2
    assert l2_norm(s, g.dx) == pytest.approx(math.sqrt(0.5), rel=1e-14)
    assert lp_norm(np.ones(g.N), g.dx, 3) == pytest.approx((g.N * g.dx) ** (1 / 3))
    # discrete H1 seminorm of sin(pi x) is sqrt(lambda_h(1) / 2)
    assert h1_seminorm(s, g.dx) == pytest.approx(math.sqrt(g.lambdas_h[0] / 2), rel=1e-12)
