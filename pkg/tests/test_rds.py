import math

import numpy as np
import pytest

from acsheet.drift import allen_cahn, make_drift
from acsheet.errors import BetaBelowThreshold, DegeneratePair, GridMismatch, InsufficientSamples, \
    UnboundedInitialSet
from acsheet.grid_noise import NoisePath, l2_norm, make_grid
from acsheet.rds import (ProjectorSpec, absorbing_radius, attractor_samples, box_dimension, determining_modes,
                         fractal_dimension, linear_delta, phi, pullback_experiment, squeezing_estimate,
                         start_state, synthetic_cloud)
from acsheet.rds.pullback import default_initial_set, diameter
from acsheet.rds.squeezing import MIN_WINDOWS, factor, monotone_in_m
from acsheet.solver import SolveConfig

F = allen_cahn()
CFG = SolveConfig(F, beta=1.0, dt=1e-3)
N = 32


@pytest.fixture
def grid():
    return make_grid(1.0, N, 0.0, 1.0, 1e-3)


def test_projector_split(grid, rng):
    u = rng.standard_normal(N)
    pr = ProjectorSpec.for_grid(grid, 5)
    assert np.allclose(pr.P(u) + pr.Q(u), u, atol=1e-13)
    assert np.hypot(pr.p_norm(u), pr.q_norm(u)) == pytest.approx(float(l2_norm(u, grid.dx)), rel=1e-12)
    full = ProjectorSpec.for_grid(grid, N)
    assert full.p_norm(u) == pytest.approx(float(l2_norm(u, grid.dx)), rel=1e-12)
    with pytest.raises(ValueError):
        ProjectorSpec(1.0, N, N + 1)


def test_cocycle_identity_and_composition(grid):
    noise = NoisePath(2, grid.with_window(-2.0, 1.0))
    s = start_state(np.sin(np.pi * grid.nodes), noise, 1.0, -1.0)
    assert phi(0.0, s, noise, CFG) is s
    a = phi(0.5, phi(0.3, s, noise, CFG), noise, CFG)
    b = phi(0.8, s, noise, CFG)
    assert np.array_equal(a.V, b.V) and np.array_equal(a.z, b.z)


def test_pullback_single_point_and_overlap(grid):
    D = np.sin(np.pi * grid.nodes)[None]
    r = pullback_experiment(D, [0.5, 1.0], 1, CFG, N=N)
    assert np.all(r.diameters == 0)
    DD = default_initial_set(grid)
    a = pullback_experiment(DD, [0.5, 1.0, 2.0], 4, CFG, N=N)
    b = pullback_experiment(DD, [0.5, 1.0, 2.0], 4, CFG, N=N, verify_overlap=True)
    assert np.array_equal(a.diameters, b.diameters)
    assert a.monotone and a.diameters[-1] < a.diameters[0]


def test_pullback_unbounded(grid):
    with pytest.raises(UnboundedInitialSet):
        pullback_experiment(10 * default_initial_set(grid), [1.0, 2.0], 1, CFG, N=N)
    with pytest.raises(ValueError):
        pullback_experiment(default_initial_set(grid), [2.0, 1.0], 1, CFG, N=N)


def test_absorbing_basic():
    e = absorbing_radius(1, 1.0, [1.0, 10.0], SolveConfig(F, 1.0, 1e-4), N=N, T=2.0, shifts=[0.0, 20.0, 40.0],
                         shift_cfg=CFG)
    assert np.all(np.isfinite(e.entry_times))
    assert e.entry_times[1] >= e.entry_times[0]
    assert e.spread < 0.05
    assert e.tempered_decreasing
    assert len(list(e.rows())) == 5
    with pytest.raises(BetaBelowThreshold):
        absorbing_radius(1, 0.5, [1.0], CFG, N=N, beta_threshold=1.0)


def test_absorbing_deterministic():
    quiet = absorbing_radius(1, 1.0, [1.0, 10.0], SolveConfig(F, 1.0, 1e-4), N=N, T=2.0, noise_scale=0.0)
    # lambda_1 > K: the deterministic attractor is {0}; the late-window radius bounds |V(t)|^4 from T/2 on
    assert quiet.radius < 1e-6
    zero = absorbing_radius(1, 1.0, [1e-300, 1e-300], CFG, N=N, T=1.0, noise_scale=0.0)
    assert zero.radius <= 1e-300


def test_squeezing_linear_oracle(grid):
    f = make_drift([0.0, -1.0])
    cfg = SolveConfig(f, beta=1.0, dt=1e-3, scheme="etd")
    x = grid.nodes
    u0 = 0.5 * np.sin(np.pi * x)
    v0 = u0 + 0.1 * sum(np.sin(k * np.pi * x) / k for k in range(1, 20))
    est = squeezing_estimate(3, (u0, v0), [0, 2, 4, 8], cfg, N=N, n_windows=4, burn_in=0.5)
    for e in est:
        assert e.delta == pytest.approx(linear_delta(grid, -1.0, e.m), rel=1e-6)


def test_squeezing_gronwall_and_monotone(grid):
    x = grid.nodes
    u0 = 0.5 * np.sin(np.pi * x)
    v0 = u0 + 0.1 * sum(np.sin(k * np.pi * x) / k for k in range(1, 20))
    est = squeezing_estimate(3, (u0, v0), [0, 2, 4, 8], CFG, N=N, n_windows=6, burn_in=0.5)
    # m = 0: one-sided Lipschitz bound over unit windows
    assert np.all(est[0].log_rho <= F.K + 1e-9)
    assert monotone_in_m(est)
    with pytest.raises(InsufficientSamples):
        est[0].verdict


def test_squeezing_degenerate(grid):
    u = np.sin(np.pi * grid.nodes)
    with pytest.raises(DegeneratePair):
        squeezing_estimate(1, (u, u), [2], CFG, N=N)


def test_factor_statistics():
    lr = np.log(np.full(MIN_WINDOWS, 0.25))
    e = factor(3, lr)
    assert e.delta == pytest.approx(0.25) and e.mean_c == 0.0
    assert e.verdict


@pytest.mark.parametrize("d", [1, 2, 3])
def test_box_dimension_cubes(d):
    e = box_dimension(synthetic_cloud(d, 20_000, seed=d), eps_max=2.0, eps_min=1e-3)
    assert e.dimension == pytest.approx(d, abs=0.2)


def test_box_dimension_errors_and_point():
    with pytest.raises(InsufficientSamples):
        box_dimension(np.zeros((999, 2)))
    assert box_dimension(np.zeros((1000, 3))).dimension == 0.0


def test_deterministic_attractor_is_a_point():
    S = attractor_samples(1, CFG, 1000, 4.0, N=N, noise_scale=0.0)
    assert fractal_dimension(S, 8).dimension < 0.2


def test_linear_random_attractor_is_a_point():
    cfg = SolveConfig(make_drift([0.0, -1.0]), beta=1.0, dt=1e-3)
    S = attractor_samples(2, cfg, 1000, 6.0, N=N)
    assert fractal_dimension(S, 8).dimension < 0.2
    assert diameter(S, 1 / (N + 1)) < 1e-6


def test_determining_modes_small():
    g = make_grid(1.0, N, 0, 1, 1e-3)
    x = g.nodes
    rep = determining_modes(np.sin(2 * np.pi * x), -np.sin(np.pi * x), [0, 1, 4, N], "forward", 1, CFG, N=N,
                            T=10.0)
    assert rep.implication[0] is None
    assert rep.m_star is not None
    full = [r for r in rep.rows() if r["m"] == N]
    assert all(r["p_diff"] == pytest.approx(r["full_diff"], rel=1e-12, abs=1e-300) for r in full)
    with pytest.raises(GridMismatch):
        determining_modes(x, x[:-1], [1], "forward", 1, CFG, N=N)
    with pytest.raises(ValueError):
        determining_modes(x, -x, [1], "sideways", 1, CFG, N=N)
