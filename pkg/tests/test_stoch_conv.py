import math

import numpy as np
import pytest

from acsheet.errors import EnsembleTooSmall, GridMismatch, StepMisalignment
from acsheet.grid_noise import NoisePath, TestFunction, make_grid
from acsheet.stoch_conv import (OUState, evolve, growth_report, holder_slopes, ito_variance, reconstruct,
                                stationary_variance, z_diagnostics, z_kernel_quadrature, z_spectral_step)


def test_deterministic_decay():
    g = make_grid(1, 15, 0, 1, 0.01)
    quiet = NoisePath(1, g).scaled(0.0)
    st = OUState(g, 0.0, 0, np.ones(g.N))
    nxt = z_spectral_step(st, quiet, 0)
    assert nxt.k == 1
    assert np.allclose(nxt.z, np.exp(-g.lambdas * g.dt), rtol=1e-15)


def test_step_misalignment():
    g = make_grid(1, 7, 0, 1, 0.01)
    st = OUState.zero(g, 0.0)
    with pytest.raises(StepMisalignment):
        z_spectral_step(st, NoisePath(1, g), 3)
    with pytest.raises(StepMisalignment):
        evolve(OUState(g, 0.0, 5, np.zeros(g.N)), NoisePath(1, g), 2)


def test_grid_mismatch():
    g = make_grid(1, 7, 0, 1, 0.01)
    with pytest.raises(GridMismatch):
        z_spectral_step(OUState.zero(g, 0.0), NoisePath(1, make_grid(1, 9, 0, 1, 0.01)), 0)


def test_evolve_matches_single_steps():
    g = make_grid(1, 15, 0, 1, 0.01)
    p = NoisePath(4, g)
    st = OUState.zero(g, 0.5)
    one = st
    for k in range(40):
        one = z_spectral_step(one, p, k)
    assert np.array_equal(evolve(st, p, 40).z, one.z)


def _long_run_variance(beta, dt, n, spacing, L=1.0, N=32, seed=3):
    g = make_grid(L, N, 0.0, (n + 10) * spacing, dt)
    p = NoisePath(seed, g, cache_blocks=4)
    every = int(round(spacing / dt))
    st = evolve(OUState.zero(g, beta), p, 10 * every)
    out = []
    for _ in range(n):
        st = evolve(st, p, st.k + every)
        out.append(st.z[0])
    return float(np.var(out)), g


def test_stationary_variance_beta0():
    var, g = _long_run_variance(0.0, 0.05, 10_000, 1.0)
    assert stationary_variance(g, 0.0) == pytest.approx(1 / (2 * math.pi**2))
    assert var == pytest.approx(0.05066, rel=0.05)


def test_large_beta_variance_small():
    var, g = _long_run_variance(100.0, 0.01, 2000, 0.1)
    assert var < 1 / 200 + 5e-4


def test_quadrature_zero_noise():
    g = make_grid(1, 15, 0, 0.2, 1e-3)
    assert np.array_equal(z_kernel_quadrature(NoisePath(1, g).scaled(0.0), 0.1, [0.25, 0.5]), np.zeros(2))
    with pytest.raises(GridMismatch):
        z_kernel_quadrature(NoisePath(1, g), 0.10005, 0.5)


def test_quadrature_tracks_spectral():
    g = make_grid(1, 31, 0, 0.1, 2.5e-4)
    p = NoisePath(8, g)
    _, traj = evolve(OUState.zero(g, 0.0), p, g.M, record=True)
    U = reconstruct(traj, g)
    x = g.nodes[[3, 15, 27]]
    q = z_kernel_quadrature(p, 0.1, x)
    typical = math.sqrt(ito_variance(g, 0.0, 0.1, 0.5))
    assert np.max(np.abs(q - U[-1, [3, 15, 27]])) < 0.1 * typical


def test_holder_scaling():
    # the scheme resolves the roughness down to sqrt(dt), so take dt ~ dx^2 / 4
    g = make_grid(1, 63, 0, 1.5, 1 / 4096)
    _, traj = evolve(OUState.zero(g, 1.0), NoisePath(2, g), g.M, record=True)
    st, sx = holder_slopes(traj[2000:], g, lags=(2, 4, 8, 16))
    assert st == pytest.approx(0.25, abs=0.08)
    assert sx == pytest.approx(0.5, abs=0.08)


def test_diagnostics_zero_at_start():
    g = make_grid(1, 15, 0, 4, 0.01)
    d = z_diagnostics(1, g, 0.0, [0.0, 1.0, 4.0], TestFunction.sine(g))
    assert d.sup_norm[0] == 0.0 and d.z_phi[0] == 0.0
    assert np.all(np.isfinite(d.l2)) and np.all(np.isfinite(d.l2p))
    rows = list(d.rows())
    assert len(rows) == 3 and rows[0]["z_phi_over_t"] == 0.0


def test_zphi_is_martingale_of_the_path():
    g = make_grid(1, 15, 0, 2, 0.01)
    phi = TestFunction.sine(g)
    d = z_diagnostics(5, g, 1.0, [2.0], phi)
    xi = NoisePath(5, g).increments(0, 200)
    assert d.z_phi[0] == pytest.approx(float(np.sum(xi @ phi.phi_mid)), rel=1e-12)


def test_ensemble_too_small():
    with pytest.raises(EnsembleTooSmall):
        growth_report(range(49), 1.0, 10.0, 0.05)


def test_median_zphi_over_t_decays():
    rep = growth_report(range(50), 1.0, 100.0, 0.05, N=16, dt=0.05, checkpoints=[10.0, 100.0])
    assert rep.median_zphi_over_t[1] < rep.median_zphi_over_t[0]
    assert np.all(rep.exceedance_se > 0)
